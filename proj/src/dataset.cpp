#include "lrf/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "lrf/error.hpp"

namespace lrf {

std::string_view to_string(ChannelStrategy s) {
  switch (s) {
    case ChannelStrategy::Grayscale: return "gray";
    case ChannelStrategy::PerChannel: return "per-channel";
    case ChannelStrategy::ReplicateGray: return "replicate-gray";
    case ChannelStrategy::JointColor: return "joint-color";
  }
  return "unknown";
}

ChannelStrategy parse_strategy(std::string_view name) {
  if (name == "gray" || name == "grayscale") return ChannelStrategy::Grayscale;
  if (name == "per-channel") return ChannelStrategy::PerChannel;
  if (name == "replicate-gray") return ChannelStrategy::ReplicateGray;
  if (name == "joint-color") return ChannelStrategy::JointColor;
  throw UsageError("unknown channel strategy '" + std::string(name) + "'");
}

void SplitSpec::validate() const {
  if (train_fraction < 0 || val_fraction < 0 || test_fraction < 0)
    throw UsageError("split fractions must be nonnegative");
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
    throw UsageError("split fractions must sum to 1");
}

SplitSpec parse_split(std::string_view text, std::uint64_t seed) {
  std::vector<double> parts;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("malformed split '" + std::string(text) + "'");
    }
  }
  if (parts.size() != 3) throw UsageError("split needs three fractions, got '" + std::string(text) + "'");
  SplitSpec spec{parts[0], parts[1], parts[2], seed};
  spec.validate();
  return spec;
}

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

std::vector<ImagePair> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<ImagePair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected input_path,target_path");
    std::filesystem::path a = trim(line.substr(0, comma));
    std::filesystem::path b = trim(line.substr(comma + 1));
    if (a.is_relative()) a = base / a;
    if (b.is_relative()) b = base / b;

    ImagePair pair;
    pair.input_path = a.string();
    pair.target_path = b.string();
    try {
      pair.input = read_image(a);
      pair.target = read_image(b);
    } catch (const Error& e) {
      throw DataError("pair " + std::to_string(pairs.size() + 1) + " (" + pair.input_path + ", " +
                      pair.target_path + "): " + e.what());
    }
    if (!pair.input.same_shape(pair.target)) {
      throw DataError("dimension mismatch in pair " + std::to_string(pairs.size() + 1) + ": " + pair.input_path +
                      " is " + std::to_string(pair.input.height) + "x" + std::to_string(pair.input.width) + "x" +
                      std::to_string(pair.input.channels) + " but " + pair.target_path + " is " +
                      std::to_string(pair.target.height) + "x" + std::to_string(pair.target.width) + "x" +
                      std::to_string(pair.target.channels));
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

SplitIndices split_indices(std::size_t count, const SplitSpec& spec) {
  spec.validate();
  const auto n_val = std::size_t(std::floor(double(count) * spec.val_fraction + 1e-9));
  const auto n_test = std::size_t(std::floor(double(count) * spec.test_fraction + 1e-9));
  if (n_val + n_test >= count)
    throw DataError("split leaves no training pairs (" + std::to_string(count) + " pairs available)");

  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  // Fisher-Yates on raw mt19937_64 output so the permutation does not
  // depend on the standard library's distribution implementation.
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

  SplitIndices out;
  const std::size_t n_train = count - n_val - n_test;
  out.train.assign(order.begin(), order.begin() + std::ptrdiff_t(n_train));
  out.val.assign(order.begin() + std::ptrdiff_t(n_train), order.begin() + std::ptrdiff_t(n_train + n_val));
  out.test.assign(order.begin() + std::ptrdiff_t(n_train + n_val), order.end());
  return out;
}

DataSplit split(const std::vector<ImagePair>& pairs, const SplitSpec& spec) {
  const auto idx = split_indices(pairs.size(), spec);
  DataSplit out;
  for (auto i : idx.train) out.train.push_back(pairs[i]);
  for (auto i : idx.val) out.val.push_back(pairs[i]);
  for (auto i : idx.test) out.test.push_back(pairs[i]);
  return out;
}

std::vector<DesignSet> build_design_set(const std::vector<ImagePair>& pairs, ChannelStrategy strategy) {
  if (pairs.empty()) throw DataError("cannot build a design set from zero pairs");
  const auto& first = pairs.front();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (!pairs[p].input.same_shape(first.input) || !pairs[p].target.same_shape(first.target))
      throw DataError("pair " + std::to_string(p + 1) + " differs in shape from pair 1");
    if (pairs[p].input.channels != pairs[p].target.channels)
      throw DataError("pair " + std::to_string(p + 1) + " has mismatched channel counts");
  }
  const int C = first.input.channels;
  switch (strategy) {
    case ChannelStrategy::Grayscale:
      if (C != 1) throw DataError("gray strategy needs 1-channel images, got " + std::to_string(C));
      break;
    case ChannelStrategy::PerChannel:
    case ChannelStrategy::ReplicateGray:
      if (C != 3) throw DataError(std::string(to_string(strategy)) + " strategy needs RGB images, got " +
                                  std::to_string(C) + " channel(s)");
      break;
    case ChannelStrategy::JointColor:
      break;
  }

  const auto P = Eigen::Index(pairs.size());
  const auto D = Eigen::Index(first.input.plane_size());
  const auto K = Eigen::Index(first.target.plane_size());
  auto blank = [&](Eigen::Index rows, int channels) {
    DesignSet ds;
    ds.X.resize(rows, D);
    ds.T.resize(rows, K);
    ds.in_height = first.input.height;
    ds.in_width = first.input.width;
    ds.out_height = first.target.height;
    ds.out_width = first.target.width;
    ds.strategy = strategy;
    ds.channels = channels;
    return ds;
  };
  auto fill_row = [&](DesignSet& ds, Eigen::Index row, const ImageBuffer& in, int cin, const ImageBuffer& tg,
                      int ctg) {
    ds.X.row(row) = Eigen::Map<const Eigen::RowVectorXd>(in.plane(cin), D);
    ds.T.row(row) = Eigen::Map<const Eigen::RowVectorXd>(tg.plane(ctg), K);
  };

  std::vector<DesignSet> out;
  if (strategy == ChannelStrategy::PerChannel) {
    for (int c = 0; c < 3; ++c) {
      auto ds = blank(P, 3);
      for (Eigen::Index p = 0; p < P; ++p) fill_row(ds, p, pairs[p].input, c, pairs[p].target, c);
      out.push_back(std::move(ds));
    }
  } else if (strategy == ChannelStrategy::ReplicateGray) {
    auto ds = blank(P, 3);
    for (Eigen::Index p = 0; p < P; ++p)
      fill_row(ds, p, to_luma(pairs[p].input), 0, to_luma(pairs[p].target), 0);
    out.push_back(std::move(ds));
  } else {
    auto ds = blank(P * C, C);
    for (int c = 0; c < C; ++c)
      for (Eigen::Index p = 0; p < P; ++p) fill_row(ds, c * P + p, pairs[p].input, c, pairs[p].target, c);
    out.push_back(std::move(ds));
  }
  return out;
}

}  // namespace lrf
