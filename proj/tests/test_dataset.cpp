#include <gtest/gtest.h>

#include <cstring>

#include <fstream>
#include <random>
#include <set>

#include "lrf/dataset.hpp"
#include "lrf/error.hpp"
#include "lrf/image.hpp"
#include "lrf/solvers.hpp"
#include "lrf/training.hpp"
#include "test_support.hpp"

using namespace lrf;
using lrf::testing::TempDir;

namespace {

std::vector<ImagePair> gray_pairs(int count, int side, std::mt19937_64& rng) {
  std::vector<ImagePair> pairs;
  for (int i = 0; i < count; ++i)
    pairs.push_back({lrf::testing::random_image(side, side, 1, rng), lrf::testing::random_image(side, side, 1, rng),
                     "", ""});
  return pairs;
}

}  // namespace

TEST(ImageIo, RoundTripWithinHalfQuantizationStep) {
  TempDir dir;
  std::mt19937_64 rng(3);
  for (const char* name : {"g.png", "c.png", "g.pgm", "c.ppm"}) {
    const bool color = name[0] == 'c';
    const auto img = lrf::testing::random_image(7, 5, color ? 3 : 1, rng);
    write_image(dir / name, img);
    const auto back = read_image(dir / name);
    ASSERT_TRUE(back.same_shape(img)) << name;
    for (std::size_t i = 0; i < img.data.size(); ++i) ASSERT_LE(std::abs(back.data[i] - img.data[i]), 1.0 / 510 + 1e-12);
  }
}

TEST(ImageIo, FullWhiteLoadsAsExactlyOne) {
  TempDir dir;
  {
    std::ofstream out(dir / "w.pgm", std::ios::binary);
    out << "P5\n2 1\n255\n" << char(255) << char(0);
  }
  const auto img = read_image(dir / "w.pgm");
  EXPECT_EQ(img.data[0], 1.0);
  EXPECT_EQ(img.data[1], 0.0);
  write_image(dir / "w.png", img);
  EXPECT_EQ(read_image(dir / "w.png").data[0], 1.0);
}

TEST(ImageIo, AsciiPnmAndComments) {
  TempDir dir;
  {
    std::ofstream out(dir / "a.pgm");
    out << "P2\n# comment\n2 2\n255\n0 51\n102 255\n";
  }
  const auto img = read_image(dir / "a.pgm");
  EXPECT_DOUBLE_EQ(img.at(0, 0, 1), 0.2);
  EXPECT_DOUBLE_EQ(img.at(0, 1, 0), 0.4);
}

TEST(ImageIo, Errors) {
  TempDir dir;
  EXPECT_THROW(read_image(dir / "missing.png"), IoError);
  {
    std::ofstream out(dir / "x.bmp");
    out << "BM";
  }
  EXPECT_THROW(read_image(dir / "x.bmp"), DataError);
  {
    std::ofstream out(dir / "deep.pgm");
    out << "P5\n1 1\n65535\n\0\0";
  }
  EXPECT_THROW(read_image(dir / "deep.pgm"), DataError);
}

TEST(Manifest, LoadsPairsInOrder) {
  TempDir dir;
  std::mt19937_64 rng(1);
  std::ofstream m(dir / "m.csv");
  for (int i = 0; i < 3; ++i) {
    const auto a = "in" + std::to_string(i) + ".png";
    const auto b = "out" + std::to_string(i) + ".png";
    auto img = lrf::testing::random_image(4, 4, 1, rng);
    img.data[0] = i / 255.0;
    write_image(dir / a, img);
    write_image(dir / b, lrf::testing::random_image(4, 4, 1, rng));
    m << a << "," << b << "\r\n";
  }
  m.close();
  const auto pairs = load_manifest(dir / "m.csv");
  ASSERT_EQ(pairs.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(pairs[std::size_t(i)].input.data[0], i / 255.0);
}

TEST(Manifest, DimensionMismatchNamesBothFiles) {
  TempDir dir;
  write_image(dir / "small.png", ImageBuffer(56, 56, 1, 0.5));
  write_image(dir / "large.png", ImageBuffer(64, 64, 1, 0.5));
  std::ofstream(dir / "m.csv") << "small.png,large.png\n";
  try {
    load_manifest(dir / "m.csv");
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("small.png"), std::string::npos);
    EXPECT_NE(msg.find("large.png"), std::string::npos);
  }
}

TEST(Manifest, MissingImageIsReportedWithPath) {
  TempDir dir;
  write_image(dir / "a.png", ImageBuffer(4, 4, 1, 0.5));
  std::ofstream(dir / "m.csv") << "a.png,nope.png\n";
  try {
    load_manifest(dir / "m.csv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("nope.png"), std::string::npos);
  }
  EXPECT_THROW(load_manifest(dir / "absent.csv"), IoError);
}

TEST(Split, SizesFollowFloorAllocation) {
  const auto ten = split_indices(10, SplitSpec{0.8, 0.1, 0.1, 7});
  EXPECT_EQ(ten.train.size(), 8u);
  EXPECT_EQ(ten.val.size(), 1u);
  EXPECT_EQ(ten.test.size(), 1u);

  const auto big = split_indices(1116, SplitSpec{0.8, 0.1, 0.1, 7});
  EXPECT_EQ(big.train.size(), 894u);
  EXPECT_EQ(big.val.size(), 111u);
  EXPECT_EQ(big.test.size(), 111u);

  std::set<std::size_t> seen;
  for (const auto* part : {&big.train, &big.val, &big.test})
    for (auto i : *part) EXPECT_TRUE(seen.insert(i).second);
  EXPECT_EQ(seen.size(), 1116u);
  EXPECT_EQ(*seen.rbegin(), 1115u);
}

TEST(Split, DeterministicPerSeed) {
  const auto a = split_indices(50, SplitSpec{0.6, 0.2, 0.2, 42});
  const auto b = split_indices(50, SplitSpec{0.6, 0.2, 0.2, 42});
  const auto c = split_indices(50, SplitSpec{0.6, 0.2, 0.2, 43});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.train, c.train);
}

TEST(Split, Errors) {
  EXPECT_THROW(split_indices(10, SplitSpec{0.5, 0.1, 0.1, 0}), UsageError);
  EXPECT_THROW(split_indices(10, SplitSpec{1.2, -0.1, -0.1, 0}), UsageError);
  EXPECT_THROW(split_indices(2, SplitSpec{0.0, 0.5, 0.5, 0}), DataError);
  EXPECT_THROW(split_indices(0, SplitSpec{}), DataError);
  EXPECT_NO_THROW(split_indices(1, SplitSpec{}));
  EXPECT_THROW(parse_split("0.8,0.2", 0), UsageError);
  EXPECT_THROW(parse_split("a,b,c", 0), UsageError);
  EXPECT_DOUBLE_EQ(parse_split("0.7,0.2,0.1", 0).val_fraction, 0.2);
}

TEST(DesignSet, Shapes) {
  std::mt19937_64 rng(5);
  const auto gray = gray_pairs(5, 4, rng);
  const auto ds = build_design_set(gray, ChannelStrategy::Grayscale);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].X.rows(), 5);
  EXPECT_EQ(ds[0].X.cols(), 16);
  EXPECT_EQ(ds[0].T.cols(), 16);
  EXPECT_EQ(ds[0].X(3, 5), gray[3].input.data[5]);

  std::vector<ImagePair> rgb;
  for (int i = 0; i < 5; ++i)
    rgb.push_back({lrf::testing::random_image(4, 4, 3, rng), lrf::testing::random_image(4, 4, 3, rng), "", ""});
  const auto joint = build_design_set(rgb, ChannelStrategy::JointColor);
  ASSERT_EQ(joint.size(), 1u);
  EXPECT_EQ(joint[0].X.rows(), 15);
  EXPECT_EQ(joint[0].X.cols(), 16);
  // Channel blocks stacked in order.
  EXPECT_EQ(joint[0].X(2 * 5 + 1, 7), rgb[1].input.at(2, 1, 3));
  EXPECT_EQ(build_design_set(rgb, ChannelStrategy::PerChannel).size(), 3u);
  EXPECT_EQ(build_design_set(rgb, ChannelStrategy::ReplicateGray)[0].X.rows(), 5);
}

TEST(DesignSet, StrategyMustMatchChannels) {
  std::mt19937_64 rng(5);
  const auto gray = gray_pairs(2, 4, rng);
  EXPECT_THROW(build_design_set(gray, ChannelStrategy::PerChannel), DataError);
  EXPECT_THROW(build_design_set(gray, ChannelStrategy::ReplicateGray), DataError);
  std::vector<ImagePair> rgb{{ImageBuffer(4, 4, 3), ImageBuffer(4, 4, 3), "", ""}};
  EXPECT_THROW(build_design_set(rgb, ChannelStrategy::Grayscale), DataError);
  EXPECT_THROW(build_design_set({}, ChannelStrategy::Grayscale), DataError);
  EXPECT_THROW(parse_strategy("sepia"), UsageError);
}

TEST(DesignSet, JointColorWithOneChannelEqualsGray) {
  std::mt19937_64 rng(9);
  const auto pairs = gray_pairs(6, 5, rng);
  const auto g = build_design_set(pairs, ChannelStrategy::Grayscale)[0];
  const auto j = build_design_set(pairs, ChannelStrategy::JointColor)[0];
  ASSERT_EQ(g.X.rows(), j.X.rows());
  EXPECT_EQ(0, std::memcmp(g.X.data(), j.X.data(), sizeof(double) * std::size_t(g.X.size())));
  EXPECT_EQ(0, std::memcmp(g.T.data(), j.T.data(), sizeof(double) * std::size_t(g.T.size())));
}

// Images with R = G = B: every strategy sees the same per-channel data.
// Per-channel and replicate-gray fit identical normal equations. Joint-color
// stacks three copies of each example, so its data term is three times
// larger and it coincides with the others at 3 lambda.
TEST(DesignSet, EqualChannelStrategiesAgree) {
  std::mt19937_64 rng(11);
  std::vector<ImagePair> pairs;
  for (int i = 0; i < 8; ++i) {
    auto a = lrf::testing::random_image(5, 5, 1, rng);
    auto b = lrf::testing::random_image(5, 5, 1, rng);
    ImagePair p{ImageBuffer(5, 5, 3), ImageBuffer(5, 5, 3), "", ""};
    for (int c = 0; c < 3; ++c) {
      std::copy(a.data.begin(), a.data.end(), p.input.plane(c));
      std::copy(b.data.begin(), b.data.end(), p.target.plane(c));
    }
    pairs.push_back(std::move(p));
  }
  const double lambda = 0.9;
  TrainSpec spec;
  spec.taps_per_side = 3;
  spec.strategy = ChannelStrategy::PerChannel;
  const auto per = fit_model(pairs, spec, lambda);
  spec.strategy = ChannelStrategy::ReplicateGray;
  const auto rep = fit_model(pairs, spec, lambda);
  spec.strategy = ChannelStrategy::JointColor;
  const auto joint = fit_model(pairs, spec, 3.0 * lambda);

  const auto x = pairs[0].input;
  const auto y_per = synthesize_raw(per, x);
  const auto y_rep = synthesize_raw(rep, x);
  const auto y_joint = synthesize_raw(joint, x);
  for (std::size_t i = 0; i < y_per.data.size(); ++i) {
    EXPECT_NEAR(y_per.data[i], y_rep.data[i], 1e-10);
    EXPECT_NEAR(y_per.data[i], y_joint.data[i], 1e-10);
  }
}
