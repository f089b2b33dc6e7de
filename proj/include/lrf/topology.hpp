#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lrf {

/// Image sizes plus the shape of each output pixel's receptive field.
/// A field has taps_per_side x taps_per_side taps spaced `dilation` pixels
/// apart, centered on the output pixel's own (row, col) in the input.
struct RfGeometry {
  int in_height = 0;
  int in_width = 0;
  int out_height = 0;
  int out_width = 0;
  int taps_per_side = 1;
  int dilation = 1;

  /// Throws UsageError describing the first violated constraint.
  void validate() const;

  std::size_t input_size() const { return std::size_t(in_height) * std::size_t(in_width); }
  std::size_t output_size() const { return std::size_t(out_height) * std::size_t(out_width); }

  /// Square images of side h x w with an r x r field.
  static RfGeometry square(int height, int width, int taps_per_side, int dilation = 1);

  /// Smallest undilated field that covers every input pixel from every
  /// output pixel (the dense, global-receptive-field case).
  static RfGeometry full_coverage(int in_height, int in_width, int out_height, int out_width);

  bool operator==(const RfGeometry&) const = default;
};

/// Per-output-pixel input index sets (0-based, row-major, strictly
/// increasing). Every row additionally owns a bias slot.
class Topology {
 public:
  explicit Topology(const RfGeometry& geometry);

  const RfGeometry& geometry() const { return geometry_; }
  const std::vector<std::uint32_t>& row(std::size_t k) const { return rows_[k]; }
  const std::vector<std::vector<std::uint32_t>>& rows() const { return rows_; }
  std::size_t row_count() const { return rows_.size(); }
  bool has_bias() const { return true; }

  std::size_t weight_count() const;
  std::size_t max_row_size() const;

  /// Text dump in the layout of a 0/1 mask matrix: 1-based indices, a
  /// header of input indices, one line per output pixel, blanks for zeros.
  std::string mask_text() const;

 private:
  RfGeometry geometry_;
  std::vector<std::vector<std::uint32_t>> rows_;
};

inline Topology build_topology(const RfGeometry& geometry) { return Topology(geometry); }

/// Weight slots plus one bias per output pixel.
std::size_t total_parameters(const Topology& topology);

}  // namespace lrf
