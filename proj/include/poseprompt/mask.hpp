#pragma once

#include <cstdint>
#include <Eigen/Core>

namespace poseprompt {

using Index = Eigen::Index;

/// Pixel storage for masks. Eigen's default column-major layout matches
/// the COCO RLE pixel order, so `data()` can be run-length encoded as is.
using MaskArray = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct MaskDims {
  Index height = 1;
  Index width = 1;

  MaskDims() = default;
  MaskDims(Index h, Index w);

  Index area() const { return height * width; }
  bool operator==(const MaskDims&) const = default;
};

/// Dense instance mask addressed (row, col), row 0 at the top. Pixel values
/// are always 0 or 1.
class BinaryMask {
 public:
  BinaryMask() : BinaryMask(MaskDims{}) {}
  explicit BinaryMask(MaskDims dims);
  /// Any non-zero entry counts as set.
  explicit BinaryMask(const MaskArray& pixels);

  static BinaryMask zeros(MaskDims dims) { return BinaryMask(dims); }
  static BinaryMask ones(MaskDims dims);

  MaskDims dims() const { return {pixels_.rows(), pixels_.cols()}; }
  Index height() const { return pixels_.rows(); }
  Index width() const { return pixels_.cols(); }

  bool operator()(Index row, Index col) const { return pixels_(row, col) != 0; }
  void set(Index row, Index col, bool value = true) { pixels_(row, col) = value ? 1 : 0; }

  bool contains(Index row, Index col) const {
    return row >= 0 && col >= 0 && row < height() && col < width();
  }

  const MaskArray& array() const { return pixels_; }

  Index count() const { return static_cast<Index>((pixels_ != 0).count()); }
  bool empty() const { return count() == 0; }

  bool operator==(const BinaryMask& other) const {
    return dims() == other.dims() && (pixels_ == other.pixels_).all();
  }

 private:
  MaskArray pixels_;
};

/// |a ∧ b| / |a ∨ b|; 1.0 when both masks are empty.
double iou(const BinaryMask& a, const BinaryMask& b);

/// Symmetric difference: false negatives plus false positives.
BinaryMask error_region(const BinaryMask& gt, const BinaryMask& pred);

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b);

/// Column-major (row, col) of the k-th set pixel, k in [0, count()).
std::pair<Index, Index> nth_set_pixel(const BinaryMask& m, Index k);

}  // namespace poseprompt
