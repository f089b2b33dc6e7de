#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lrf/image.hpp"

namespace lrf {

enum class ChannelStrategy : std::uint8_t {
  Grayscale = 0,      // single-channel images, one mapping
  PerChannel = 1,     // RGB, an independent mapping per channel
  ReplicateGray = 2,  // RGB, mapping learned on luma and applied to every channel
  JointColor = 3,     // one mapping fit to all channels jointly
};

std::string_view to_string(ChannelStrategy s);
ChannelStrategy parse_strategy(std::string_view name);

struct ImagePair {
  ImageBuffer input;
  ImageBuffer target;
  std::string input_path;
  std::string target_path;
};

/// Row-wise design and response matrices: one example per row.
struct DesignSet {
  Eigen::MatrixXd X;  // N x D
  Eigen::MatrixXd T;  // N x K
  int in_height = 0;
  int in_width = 0;
  int out_height = 0;
  int out_width = 0;
  ChannelStrategy strategy = ChannelStrategy::Grayscale;
  int channels = 1;

  Eigen::Index examples() const { return X.rows(); }
  Eigen::Index input_dim() const { return X.cols(); }
  Eigen::Index output_dim() const { return T.cols(); }
};

struct SplitSpec {
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Parses "0.8,0.1,0.1".
SplitSpec parse_split(std::string_view text, std::uint64_t seed);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct DataSplit {
  std::vector<ImagePair> train;
  std::vector<ImagePair> val;
  std::vector<ImagePair> test;
};

/// Reads a two-column CSV (input_path,target_path; no header). Relative
/// paths are resolved against the manifest's directory.
std::vector<ImagePair> load_manifest(const std::filesystem::path& path);

/// Seeded shuffle followed by floor allocation of validation and test
/// counts; the remainder goes to training.
SplitIndices split_indices(std::size_t count, const SplitSpec& spec);
DataSplit split(const std::vector<ImagePair>& pairs, const SplitSpec& spec);

/// One DesignSet per fitted mapping: three for PerChannel, one otherwise.
/// JointColor stacks the per-channel design matrices vertically, channel
/// blocks in order, so a single mapping is fit to every channel.
std::vector<DesignSet> build_design_set(const std::vector<ImagePair>& pairs, ChannelStrategy strategy);

}  // namespace lrf
