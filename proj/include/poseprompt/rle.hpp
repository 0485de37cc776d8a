#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "poseprompt/mask.hpp"

namespace poseprompt {

/// COCO-compatible uncompressed run-length encoding. Runs alternate
/// 0,1,0,... in column-major order; the first run may be empty.
struct Rle {
  MaskDims dims;
  std::vector<std::uint32_t> counts;

  /// Number of set pixels (sum of odd-indexed runs).
  std::uint64_t area() const;
  bool operator==(const Rle&) const = default;
};

Rle rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(const Rle& rle);

/// COCO compressed-RLE string: 6-bit little-endian varints offset from
/// ASCII '0', counts from index 3 onward stored as deltas to counts[i-2].
std::string rle_compress(const Rle& rle);
Rle rle_decompress(std::string_view s, MaskDims dims);

/// Mask IoU computed by walking both run lists. With `crowd_gt` the union is
/// replaced by the detection area, as COCO does for crowd regions.
double rle_iou(const Rle& dt, const Rle& gt, bool crowd_gt = false);

}  // namespace poseprompt
