#include "poseprompt/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "poseprompt/error.hpp"

namespace poseprompt {

Polygon Polygon::from_flat(std::span<const double> xy) {
  if (xy.size() % 2 != 0) {
    throw Error(ErrorCode::DegeneratePolygon, "odd number of polygon coordinates");
  }
  Polygon poly;
  for (std::size_t i = 0; i + 1 < xy.size(); i += 2) poly.vertices.emplace_back(xy[i], xy[i + 1]);
  return poly;
}

// Port of the COCO toolkit's polygon encoder: the boundary is traced on a 5x
// upsampled grid, crossings with pixel-centre columns are collected, and the
// sorted crossings become run boundaries (so fill is even-odd).
Rle rasterize_polygon(const Polygon& poly, MaskDims dims) {
  if (poly.vertices.size() < 3) {
    throw Error(ErrorCode::DegeneratePolygon,
                "polygon has " + std::to_string(poly.vertices.size()) + " vertices");
  }
  constexpr double kScale = 5.0;
  const Index h = dims.height;
  const Index w = dims.width;

  std::vector<int> xs, ys;
  for (const auto& v : poly.vertices) {
    xs.push_back(static_cast<int>(kScale * v.x() + .5));
    ys.push_back(static_cast<int>(kScale * v.y() + .5));
  }
  if (xs.back() != xs.front() || ys.back() != ys.front()) {
    xs.push_back(xs.front());
    ys.push_back(ys.front());
  }

  std::vector<int> bx, by;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    int x0 = xs[i], x1 = xs[i + 1], y0 = ys[i], y1 = ys[i + 1];
    const int dx = std::abs(x1 - x0);
    const int dy = std::abs(y0 - y1);
    if (dx == 0 && dy == 0) {
      bx.push_back(x0);
      by.push_back(y0);
      continue;
    }
    const bool flip = (dx >= dy && x0 > x1) || (dx < dy && y0 > y1);
    if (flip) {
      std::swap(x0, x1);
      std::swap(y0, y1);
    }
    const double slope = dx >= dy ? static_cast<double>(y1 - y0) / dx : static_cast<double>(x1 - x0) / dy;
    if (dx >= dy) {
      for (int j = 0; j <= dx; ++j) {
        const int t = flip ? dx - j : j;
        bx.push_back(t + x0);
        by.push_back(static_cast<int>(y0 + slope * t + .5));
      }
    } else {
      for (int j = 0; j <= dy; ++j) {
        const int t = flip ? dy - j : j;
        by.push_back(t + y0);
        bx.push_back(static_cast<int>(x0 + slope * t + .5));
      }
    }
  }

  // Crossings with pixel-centre columns, downsampled.
  std::vector<std::int64_t> crossings;
  for (std::size_t i = 1; i < bx.size(); ++i) {
    if (bx[i] == bx[i - 1]) continue;
    double xd = static_cast<double>(bx[i] < bx[i - 1] ? bx[i] : bx[i] - 1);
    xd = (xd + .5) / kScale - .5;
    if (std::floor(xd) != xd || xd < 0 || xd > static_cast<double>(w - 1)) continue;
    double yd = static_cast<double>(by[i] < by[i - 1] ? by[i] : by[i - 1]);
    yd = (yd + .5) / kScale - .5;
    if (yd < 0) {
      yd = 0;
    } else if (yd > static_cast<double>(h)) {
      yd = static_cast<double>(h);
    }
    yd = std::ceil(yd);
    crossings.push_back(static_cast<std::int64_t>(xd) * h + static_cast<std::int64_t>(yd));
  }
  std::sort(crossings.begin(), crossings.end());
  crossings.push_back(h * w);

  std::vector<std::uint32_t> raw;
  std::int64_t prev = 0;
  for (const auto c : crossings) {
    raw.push_back(static_cast<std::uint32_t>(c - prev));
    prev = c;
  }
  // Zero-length interior runs cancel a toggle pair; merge around them.
  Rle rle{dims, {raw[0]}};
  std::size_t i = 1;
  while (i < raw.size()) {
    if (raw[i] > 0) {
      rle.counts.push_back(raw[i++]);
    } else {
      ++i;
      if (i < raw.size()) rle.counts.back() += raw[i++];
    }
  }
  return rle;
}

BinaryMask rasterize(std::span<const Polygon> polys, MaskDims dims) {
  MaskArray acc = MaskArray::Zero(dims.height, dims.width);
  for (const auto& poly : polys) {
    acc = acc.max(rle_decode(rasterize_polygon(poly, dims)).array());
  }
  return BinaryMask(acc);
}

}  // namespace poseprompt
