#include "poseprompt/bbox.hpp"

#include <algorithm>
#include <string>

#include "poseprompt/error.hpp"

namespace poseprompt {

void validate(const BBox& b) {
  if (!(b.w > 0) || !(b.h > 0)) {
    throw Error(ErrorCode::InvalidArgument,
                "box needs positive size, got w=" + std::to_string(b.w) + " h=" + std::to_string(b.h));
  }
}

BBox inflate_bbox_unclamped(const BBox& b, double factor_per_side) {
  validate(b);
  if (!(factor_per_side >= 0)) {
    throw Error(ErrorCode::InvalidArgument, "inflation factor must be >= 0");
  }
  const double dx = factor_per_side * b.w;
  const double dy = factor_per_side * b.h;
  return {b.x - dx, b.y - dy, b.w + 2 * dx, b.h + 2 * dy};
}

BBox intersect_with_image(const BBox& b, MaskDims dims) {
  const double x0 = std::max(b.x, 0.0);
  const double y0 = std::max(b.y, 0.0);
  const double x1 = std::min(b.right(), static_cast<double>(dims.width));
  const double y1 = std::min(b.bottom(), static_cast<double>(dims.height));
  if (!(x1 > x0) || !(y1 > y0)) {
    throw Error(ErrorCode::EmptyAfterClamp, "box does not overlap the image");
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

BBox inflate_bbox(const BBox& b, double factor_per_side, MaskDims dims) {
  return intersect_with_image(inflate_bbox_unclamped(b, factor_per_side), dims);
}

BBox bbox_of_mask(const BinaryMask& m) {
  const auto& a = m.array();
  const auto col_any = (a != 0).colwise().any();
  const auto row_any = (a != 0).rowwise().any();
  Index c0 = -1, c1 = -1, r0 = -1, r1 = -1;
  for (Index c = 0; c < m.width(); ++c) {
    if (col_any(c)) {
      if (c0 < 0) c0 = c;
      c1 = c;
    }
  }
  if (c0 < 0) throw Error(ErrorCode::EmptyMask, "bbox of an empty mask");
  for (Index r = 0; r < m.height(); ++r) {
    if (row_any(r)) {
      if (r0 < 0) r0 = r;
      r1 = r;
    }
  }
  return {static_cast<double>(c0), static_cast<double>(r0), static_cast<double>(c1 - c0 + 1),
          static_cast<double>(r1 - r0 + 1)};
}

PixelWindow pixel_window(const BBox& b, MaskDims dims) {
  const auto clamp_to = [](double v, Index hi) {
    return static_cast<Index>(std::clamp(v, 0.0, static_cast<double>(hi)));
  };
  const Index c0 = clamp_to(round_half_up(b.x), dims.width);
  const Index c1 = clamp_to(round_half_up(b.right()), dims.width);
  const Index r0 = clamp_to(round_half_up(b.y), dims.height);
  const Index r1 = clamp_to(round_half_up(b.bottom()), dims.height);
  if (c1 <= c0 || r1 <= r0) {
    throw Error(ErrorCode::EmptyAfterClamp, "box covers no whole pixel inside the image");
  }
  return {r0, c0, r1 - r0, c1 - c0};
}

BinaryMask crop_to_bbox(const BinaryMask& m, const BBox& b) {
  const PixelWindow win = pixel_window(b, m.dims());
  return BinaryMask(MaskArray(m.array().block(win.row0, win.col0, win.rows, win.cols)));
}

}  // namespace poseprompt
