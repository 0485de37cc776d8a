#pragma once

#include <cmath>

#include "poseprompt/mask.hpp"

namespace poseprompt {

/// Axis-aligned box, COCO convention: (x, y) is the top-left corner.
template <typename Scalar>
struct Box {
  Scalar x{};
  Scalar y{};
  Scalar w{};
  Scalar h{};

  Scalar area() const { return w * h; }
  Scalar right() const { return x + w; }
  Scalar bottom() const { return y + h; }

  template <typename Other>
  Box<Other> cast() const {
    return {static_cast<Other>(x), static_cast<Other>(y), static_cast<Other>(w),
            static_cast<Other>(h)};
  }

  bool operator==(const Box&) const = default;
};

using BBox = Box<double>;

/// Throws InvalidArgument unless w > 0 and h > 0.
void validate(const BBox& b);

inline double round_half_up(double v) { return std::floor(v + 0.5); }

/// Extends every side outward by factor_per_side times the matching
/// dimension, keeping the centre. No clamping.
BBox inflate_bbox_unclamped(const BBox& b, double factor_per_side);

/// inflate_bbox_unclamped intersected with [0, width] x [0, height].
BBox inflate_bbox(const BBox& b, double factor_per_side, MaskDims dims);

BBox intersect_with_image(const BBox& b, MaskDims dims);

/// Tight box over the set pixels, in whole pixels.
BBox bbox_of_mask(const BinaryMask& m);

/// Integer pixel window of a box after half-up rounding and clamping.
struct PixelWindow {
  Index row0 = 0;
  Index col0 = 0;
  Index rows = 0;
  Index cols = 0;
};

PixelWindow pixel_window(const BBox& b, MaskDims dims);

BinaryMask crop_to_bbox(const BinaryMask& m, const BBox& b);

}  // namespace poseprompt
