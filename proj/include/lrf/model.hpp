#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lrf/dataset.hpp"
#include "lrf/error.hpp"
#include "lrf/image.hpp"
#include "lrf/topology.hpp"

namespace lrf {

enum class SolverKind : std::uint8_t { Masked = 0, Ridge = 1, Lasso = 2, Omp = 3 };

std::string_view to_string(SolverKind s);
SolverKind parse_solver(std::string_view name);

/// One output pixel: sparse weights over input pixels plus a bias.
struct SparseRow {
  std::vector<std::uint32_t> indices;
  std::vector<double> weights;
  double bias = 0.0;

  bool operator==(const SparseRow&) const = default;
};

using Mapping = std::vector<SparseRow>;

/// A learned image-to-image linear map. PerChannel models carry three
/// mappings (R, G, B); every other strategy carries one.
struct SparseRowModel {
  RfGeometry geometry;
  ChannelStrategy strategy = ChannelStrategy::Grayscale;
  SolverKind solver = SolverKind::Masked;
  double lambda = 0.0;
  std::vector<Mapping> mappings;

  static std::size_t mappings_for(ChannelStrategy s) { return s == ChannelStrategy::PerChannel ? 3 : 1; }

  /// Throws DataError on any structural inconsistency.
  void validate() const;
  std::size_t parameter_count() const;

  bool operator==(const SparseRowModel&) const = default;
};

/// Materializes mapping `m` as a dense K x (D+1) matrix, bias in the last column.
Eigen::MatrixXd dense_weights(const SparseRowModel& model, std::size_t m = 0);

/// Unclamped prediction y = W x (+ b). Channels are mapped according to the
/// model's strategy.
ImageBuffer synthesize_raw(const SparseRowModel& model, const ImageBuffer& image, bool include_bias = true);

/// Prediction clamped to [0, 1] for emission.
ImageBuffer synthesize(const SparseRowModel& model, const ImageBuffer& image);

/// As synthesize, with every bias forced to zero.
ImageBuffer weight_only_synthesize(const SparseRowModel& model, const ImageBuffer& image);

struct Importance {
  double mean_abs_weighted = 0.0;  // mean |W x| over pixels, channels and images
  double mean_abs_bias = 0.0;      // mean |b| over output pixels
  double ratio = 0.0;              // weighted / bias; +inf when the bias term vanishes
};

Importance relative_importance(const SparseRowModel& model, const std::vector<ImageBuffer>& images);

/// Stored weights with |w| > tolerance plus biases with |b| > tolerance.
std::size_t count_nonzeros(const SparseRowModel& model, double tolerance);

/// Bias image of mapping 0, min-max rescaled into [0, 1] for viewing.
ImageBuffer bias_image(const SparseRowModel& model);

// Binary .lrm persistence.

class ModelFormatError : public DataError {
 public:
  enum class Kind { BadMagic, VersionMismatch, Truncated, IndexOutOfRange, Checksum, Malformed };
  ModelFormatError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr char kModelMagic[4] = {'L', 'R', 'F', 'M'};
inline constexpr std::uint16_t kModelVersion = 1;

std::string serialize_model(const SparseRowModel& model);
SparseRowModel deserialize_model(std::string_view bytes);
void save_model(const SparseRowModel& model, const std::filesystem::path& path);
SparseRowModel load_model(const std::filesystem::path& path);

}  // namespace lrf
