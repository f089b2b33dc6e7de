#include "lrf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lrf/error.hpp"

namespace lrf {

std::string_view to_string(SolverKind s) {
  switch (s) {
    case SolverKind::Masked: return "mr";
    case SolverKind::Ridge: return "ridge";
    case SolverKind::Lasso: return "lasso";
    case SolverKind::Omp: return "omp";
  }
  return "unknown";
}

SolverKind parse_solver(std::string_view name) {
  if (name == "mr") return SolverKind::Masked;
  if (name == "ridge") return SolverKind::Ridge;
  if (name == "lasso") return SolverKind::Lasso;
  if (name == "omp") return SolverKind::Omp;
  throw UsageError("unknown solver '" + std::string(name) + "' (expected mr|ridge|lasso|omp)");
}

void SparseRowModel::validate() const {
  try {
    geometry.validate();
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
  if (mappings.size() != mappings_for(strategy))
    throw DataError("model has " + std::to_string(mappings.size()) + " mapping(s), strategy " +
                    std::string(to_string(strategy)) + " needs " + std::to_string(mappings_for(strategy)));
  const std::size_t K = geometry.output_size();
  const std::size_t D = geometry.input_size();
  for (std::size_t m = 0; m < mappings.size(); ++m) {
    if (mappings[m].size() != K)
      throw DataError("mapping " + std::to_string(m) + " has " + std::to_string(mappings[m].size()) +
                      " rows, expected " + std::to_string(K));
    for (std::size_t k = 0; k < K; ++k) {
      const auto& r = mappings[m][k];
      if (r.indices.size() != r.weights.size())
        throw DataError("row " + std::to_string(k) + ": index/weight count mismatch");
      for (std::size_t t = 0; t < r.indices.size(); ++t) {
        if (r.indices[t] >= D) throw DataError("row " + std::to_string(k) + ": index out of range");
        if (t > 0 && r.indices[t] <= r.indices[t - 1])
          throw DataError("row " + std::to_string(k) + ": indices not strictly increasing");
      }
    }
  }
}

std::size_t SparseRowModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& mapping : mappings)
    for (const auto& r : mapping) n += r.weights.size() + 1;
  return n;
}

Eigen::MatrixXd dense_weights(const SparseRowModel& model, std::size_t m) {
  const auto K = Eigen::Index(model.geometry.output_size());
  const auto D = Eigen::Index(model.geometry.input_size());
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(K, D + 1);
  const auto& mapping = model.mappings.at(m);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& r = mapping[std::size_t(k)];
    for (std::size_t t = 0; t < r.indices.size(); ++t) W(k, r.indices[t]) = r.weights[t];
    W(k, D) = r.bias;
  }
  return W;
}

namespace {

void apply_mapping(const Mapping& mapping, const double* in, double* out, bool include_bias) {
  for (std::size_t k = 0; k < mapping.size(); ++k) {
    const auto& r = mapping[k];
    double acc = 0.0;
    const std::size_t n = r.indices.size();
    const std::uint32_t* idx = r.indices.data();
    const double* w = r.weights.data();
    for (std::size_t t = 0; t < n; ++t) acc += w[t] * in[idx[t]];
    out[k] = include_bias ? acc + r.bias : acc;
  }
}

}  // namespace

ImageBuffer synthesize_raw(const SparseRowModel& model, const ImageBuffer& image, bool include_bias) {
  const auto& g = model.geometry;
  if (image.height != g.in_height || image.width != g.in_width)
    throw DataError("image is " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                    " but the model expects " + std::to_string(g.in_height) + "x" + std::to_string(g.in_width));
  switch (model.strategy) {
    case ChannelStrategy::Grayscale:
      if (image.channels != 1) throw DataError("gray model applied to a multi-channel image");
      break;
    case ChannelStrategy::PerChannel:
      if (image.channels != 3) throw DataError("per-channel model needs an RGB image");
      break;
    default:
      break;
  }
  ImageBuffer out(g.out_height, g.out_width, image.channels);
  for (int c = 0; c < image.channels; ++c) {
    const auto& mapping = model.strategy == ChannelStrategy::PerChannel ? model.mappings.at(std::size_t(c))
                                                                        : model.mappings.at(0);
    apply_mapping(mapping, image.plane(c), out.plane(c), include_bias);
  }
  return out;
}

ImageBuffer synthesize(const SparseRowModel& model, const ImageBuffer& image) {
  return clamped(synthesize_raw(model, image, true));
}

ImageBuffer weight_only_synthesize(const SparseRowModel& model, const ImageBuffer& image) {
  return clamped(synthesize_raw(model, image, false));
}

Importance relative_importance(const SparseRowModel& model, const std::vector<ImageBuffer>& images) {
  if (images.empty()) throw DataError("relative importance needs at least one image");
  double weighted = 0.0;
  std::size_t n_weighted = 0;
  for (const auto& img : images) {
    const auto y = synthesize_raw(model, img, false);
    for (double v : y.data) weighted += std::abs(v);
    n_weighted += y.data.size();
  }
  double bias = 0.0;
  std::size_t n_bias = 0;
  for (const auto& mapping : model.mappings)
    for (const auto& r : mapping) {
      bias += std::abs(r.bias);
      ++n_bias;
    }
  Importance out;
  out.mean_abs_weighted = weighted / double(n_weighted);
  out.mean_abs_bias = n_bias ? bias / double(n_bias) : 0.0;
  out.ratio = out.mean_abs_bias > 0 ? out.mean_abs_weighted / out.mean_abs_bias
                                    : std::numeric_limits<double>::infinity();
  return out;
}

std::size_t count_nonzeros(const SparseRowModel& model, double tolerance) {
  if (tolerance < 0) throw UsageError("nonzero tolerance must be >= 0");
  std::size_t n = 0;
  for (const auto& mapping : model.mappings)
    for (const auto& r : mapping) {
      for (double w : r.weights) n += std::abs(w) > tolerance;
      n += std::abs(r.bias) > tolerance;
    }
  return n;
}

ImageBuffer bias_image(const SparseRowModel& model) {
  const auto& g = model.geometry;
  ImageBuffer out(g.out_height, g.out_width, 1);
  const auto& mapping = model.mappings.at(0);
  for (std::size_t k = 0; k < mapping.size(); ++k) out.data[k] = mapping[k].bias;
  const auto [lo, hi] = std::minmax_element(out.data.begin(), out.data.end());
  const double a = *lo, b = *hi;
  for (auto& v : out.data) v = b > a ? (v - a) / (b - a) : 0.0;
  return out;
}

}  // namespace lrf
