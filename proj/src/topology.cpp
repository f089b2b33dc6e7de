#include "lrf/topology.hpp"

#include <algorithm>
#include <sstream>

#include "lrf/error.hpp"

namespace lrf {

void RfGeometry::validate() const {
  auto fail = [](const std::string& what) { throw UsageError("invalid receptive-field geometry: " + what); };
  if (in_height <= 0 || in_width <= 0) fail("input dimensions must be positive");
  if (out_height <= 0 || out_width <= 0) fail("output dimensions must be positive");
  if (taps_per_side < 1) fail("taps per side must be >= 1, got " + std::to_string(taps_per_side));
  if (taps_per_side % 2 == 0) fail("taps per side must be odd, got " + std::to_string(taps_per_side));
  if (dilation < 1) fail("dilation must be >= 1, got " + std::to_string(dilation));
  if (std::size_t(in_height) * std::size_t(in_width) > UINT32_MAX) fail("input too large for 32-bit indices");
}

RfGeometry RfGeometry::square(int height, int width, int taps_per_side, int dilation) {
  return RfGeometry{height, width, height, width, taps_per_side, dilation};
}

RfGeometry RfGeometry::full_coverage(int in_height, int in_width, int out_height, int out_width) {
  // Reaching any input pixel from any output pixel needs a half-width of
  // max(in, out) - 1 along each axis.
  const int half = std::max({in_height, in_width, out_height, out_width}) - 1;
  return RfGeometry{in_height, in_width, out_height, out_width, 2 * half + 1, 1};
}

Topology::Topology(const RfGeometry& geometry) : geometry_(geometry) {
  geometry_.validate();
  const int h = (geometry_.taps_per_side - 1) / 2;
  const int d = geometry_.dilation;
  rows_.resize(geometry_.output_size());
  for (int i = 0; i < geometry_.out_height; ++i) {
    for (int j = 0; j < geometry_.out_width; ++j) {
      auto& row = rows_[std::size_t(i) * geometry_.out_width + j];
      row.reserve(std::size_t(geometry_.taps_per_side) * geometry_.taps_per_side);
      // Row-major traversal of the taps already yields increasing indices.
      for (int a = -h; a <= h; ++a) {
        const long ii = long(i) + long(a) * d;
        if (ii < 0 || ii >= geometry_.in_height) continue;
        for (int b = -h; b <= h; ++b) {
          const long jj = long(j) + long(b) * d;
          if (jj < 0 || jj >= geometry_.in_width) continue;
          row.push_back(std::uint32_t(ii * geometry_.in_width + jj));
        }
      }
    }
  }
}

std::size_t Topology::weight_count() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.size();
  return n;
}

std::size_t Topology::max_row_size() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n = std::max(n, r.size());
  return n;
}

std::string Topology::mask_text() const {
  const std::size_t in = geometry_.input_size();
  const std::size_t out = geometry_.output_size();
  const std::size_t col_w = std::to_string(in).size() + 1;
  const std::size_t label_w = std::to_string(out).size();

  std::ostringstream os;
  auto pad = [&os](const std::string& s, std::size_t w) {
    for (std::size_t n = s.size(); n < w; ++n) os << ' ';
    os << s;
  };
  pad("", label_w);
  os << " |";
  for (std::size_t j = 1; j <= in; ++j) pad(std::to_string(j), col_w);
  os << '\n';
  for (std::size_t n = 0; n < label_w + 2 + col_w * in; ++n) os << '-';
  os << '\n';
  for (std::size_t k = 0; k < out; ++k) {
    pad(std::to_string(k + 1), label_w);
    os << " |";
    std::string line;
    std::size_t next = 0;
    const auto& r = rows_[k];
    for (std::size_t j = 0; j < in; ++j) {
      const bool on = next < r.size() && r[next] == j;
      if (on) ++next;
      line.append(col_w - 1, ' ');
      line.push_back(on ? '1' : ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << '\n';
  }
  return os.str();
}

std::size_t total_parameters(const Topology& topology) {
  return topology.weight_count() + (topology.has_bias() ? topology.row_count() : 0);
}

}  // namespace lrf
