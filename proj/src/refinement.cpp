#include "lrf/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lrf/error.hpp"

namespace lrf {

AlphaParams AlphaParams::resolved(int height, int width) const {
  AlphaParams p = *this;
  const int m = std::min(height, width);
  if (p.dilation_radius <= 0) p.dilation_radius = std::max(1, int(std::lround(0.03 * m)));
  if (p.gaussian_sigma <= 0) p.gaussian_sigma = std::max(0.5, 0.02 * m);
  return p;
}

void AlphaParams::validate() const {
  if (!(steepness > 0)) throw UsageError("sigmoid steepness must be > 0");
  if (!(threshold > 0 && threshold < 1)) throw UsageError("sigmoid threshold must lie in (0, 1)");
  if (dilation_radius < 1) throw UsageError("dilation radius must be >= 1");
  if (!(gaussian_sigma > 0)) throw UsageError("Gaussian sigma must be > 0");
}

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

ImageBuffer dilate_disk(const ImageBuffer& plane, int radius) {
  ImageBuffer out(plane.height, plane.width, 1);
  const int r2 = radius * radius;
  for (int i = 0; i < plane.height; ++i) {
    for (int j = 0; j < plane.width; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      for (int di = -radius; di <= radius; ++di) {
        for (int dj = -radius; dj <= radius; ++dj) {
          if (di * di + dj * dj > r2) continue;
          best = std::max(best, plane.at(0, reflect_index(i + di, plane.height), reflect_index(j + dj, plane.width)));
        }
      }
      out.at(0, i, j) = best;
    }
  }
  return out;
}

ImageBuffer gaussian_blur(const ImageBuffer& plane, double sigma) {
  const int radius = std::max(1, int(4.0 * sigma + 0.5));
  std::vector<double> kernel(std::size_t(2 * radius + 1));
  double total = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    kernel[std::size_t(t + radius)] = std::exp(-0.5 * double(t * t) / (sigma * sigma));
    total += kernel[std::size_t(t + radius)];
  }
  for (auto& k : kernel) k /= total;

  ImageBuffer tmp(plane.height, plane.width, 1);
  for (int i = 0; i < plane.height; ++i)
    for (int j = 0; j < plane.width; ++j) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t)
        acc += kernel[std::size_t(t + radius)] * plane.at(0, i, reflect_index(j + t, plane.width));
      tmp.at(0, i, j) = acc;
    }
  ImageBuffer out(plane.height, plane.width, 1);
  for (int i = 0; i < plane.height; ++i)
    for (int j = 0; j < plane.width; ++j) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t)
        acc += kernel[std::size_t(t + radius)] * tmp.at(0, reflect_index(i + t, plane.height), j);
      out.at(0, i, j) = acc;
    }
  return out;
}

ImageBuffer minmax_rescale(const ImageBuffer& plane) {
  ImageBuffer out = plane;
  const auto [lo, hi] = std::minmax_element(plane.data.begin(), plane.data.end());
  const double a = *lo, b = *hi;
  for (auto& v : out.data) v = b > a ? (v - a) / (b - a) : 0.0;
  return out;
}

AlphaMap compute_alpha(const SparseRowModel& model, const AlphaParams& params) {
  model.validate();
  const int H = model.geometry.out_height;
  const int W = model.geometry.out_width;
  AlphaMap m;
  m.params = params.resolved(H, W);
  m.params.validate();

  m.s = ImageBuffer(H, W, 1);
  for (const auto& mapping : model.mappings)
    for (std::size_t k = 0; k < mapping.size(); ++k) {
      double l1 = std::abs(mapping[k].bias);
      for (double w : mapping[k].weights) l1 += std::abs(w);
      m.s.data[k] += l1;
    }

  const double n = double(m.s.data.size());
  double sum = 0.0;
  for (double v : m.s.data) sum += v;
  m.mu = sum / n;
  double ss = 0.0;
  for (double v : m.s.data) ss += (v - m.mu) * (v - m.mu);
  m.sigma = std::sqrt(ss / n);

  const auto [lo, hi] = std::minmax_element(m.s.data.begin(), m.s.data.end());
  if (*lo == *hi || m.sigma == 0.0) {
    m.degenerate = true;
    m.z = m.dilated = m.scaled = m.stepped = m.rescaled = m.alpha = ImageBuffer(H, W, 1, 0.0);
    return m;
  }

  m.z = ImageBuffer(H, W, 1);
  for (std::size_t k = 0; k < m.s.data.size(); ++k) m.z.data[k] = std::abs((m.s.data[k] - m.mu) / m.sigma);
  m.dilated = dilate_disk(m.z, m.params.dilation_radius);
  m.scaled = minmax_rescale(m.dilated);
  m.stepped = m.scaled;
  for (auto& v : m.stepped.data) v = 1.0 / (1.0 + std::exp(-m.params.steepness * (v - m.params.threshold)));
  m.rescaled = minmax_rescale(m.stepped);
  m.alpha = clamped(gaussian_blur(m.rescaled, m.params.gaussian_sigma));
  return m;
}

ImageBuffer refine(const ImageBuffer& x, const ImageBuffer& y, const ImageBuffer& alpha) {
  if (!x.same_shape(y)) throw DataError("refine: input and synthesized images differ in shape");
  if (alpha.height != x.height || alpha.width != x.width || alpha.channels != 1)
    throw DataError("refine: alpha map must be a single-channel " + std::to_string(x.height) + "x" +
                    std::to_string(x.width) + " image");
  ImageBuffer out(x.height, x.width, x.channels);
  const std::size_t n = x.plane_size();
  for (int c = 0; c < x.channels; ++c) {
    const double* xp = x.plane(c);
    const double* yp = y.plane(c);
    double* op = out.plane(c);
    for (std::size_t p = 0; p < n; ++p) op[p] = (1.0 - alpha.data[p]) * xp[p] + alpha.data[p] * yp[p];
  }
  return out;
}

}  // namespace lrf
