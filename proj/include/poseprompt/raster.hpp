#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "poseprompt/mask.hpp"
#include "poseprompt/rle.hpp"

namespace poseprompt {

/// Implicitly closed polygon in pixel coordinates (x = column, y = row).
struct Polygon {
  std::vector<Eigen::Vector2d> vertices;

  /// From a flat COCO coordinate list [x0, y0, x1, y1, ...].
  static Polygon from_flat(std::span<const double> xy);
};

/// Single polygon with the COCO toolkit's boundary-crossing fill.
Rle rasterize_polygon(const Polygon& poly, MaskDims dims);

/// Union of the filled polygons.
BinaryMask rasterize(std::span<const Polygon> polys, MaskDims dims);

}  // namespace poseprompt
