#pragma once

#include "lrf/image.hpp"
#include "lrf/model.hpp"

namespace lrf {

/// Controls for the alpha map. A non-positive radius or sigma means "derive
/// from the image size": radius round(0.03 * min(H, W)) (at least 1) and
/// sigma 0.02 * min(H, W) (at least 0.5).
struct AlphaParams {
  double steepness = 10.0;
  double threshold = 0.2;
  int dilation_radius = 0;
  double gaussian_sigma = 0.0;

  AlphaParams resolved(int height, int width) const;
  void validate() const;
};

/// Per-pixel blending weights plus every intermediate stage. All maps are
/// single-channel images of the model's output size.
struct AlphaMap {
  ImageBuffer s;         // L1 norm of each receptive field including the bias
  ImageBuffer z;         // |s - mu| / sigma
  ImageBuffer dilated;   // disk max filter of z
  ImageBuffer scaled;    // min-max rescale of dilated
  ImageBuffer stepped;   // logistic step of scaled
  ImageBuffer rescaled;  // min-max rescale of stepped
  ImageBuffer alpha;     // Gaussian blur of rescaled, clamped to [0, 1]
  double mu = 0.0;
  double sigma = 0.0;
  bool degenerate = false;  // every receptive field has the same L1 norm; alpha is all zeros
  AlphaParams params;
};

AlphaMap compute_alpha(const SparseRowModel& model, const AlphaParams& params = {});

/// (1 - alpha) * x + alpha * y, the same alpha for every channel.
ImageBuffer refine(const ImageBuffer& x, const ImageBuffer& y, const ImageBuffer& alpha);

// Building blocks; borders are handled by half-sample reflection.

/// Max over the disk {(di, dj) : di^2 + dj^2 <= radius^2}.
ImageBuffer dilate_disk(const ImageBuffer& plane, int radius);

/// Separable Gaussian with a kernel truncated at 4 sigma.
ImageBuffer gaussian_blur(const ImageBuffer& plane, double sigma);

/// Affine map onto [0, 1]; a constant plane maps to all zeros.
ImageBuffer minmax_rescale(const ImageBuffer& plane);

/// Index into [0, n) after half-sample symmetric reflection.
int reflect_index(int i, int n);

}  // namespace lrf
