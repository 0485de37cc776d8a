#include "poseprompt/rle.hpp"

#include <algorithm>
#include <numeric>

#include "poseprompt/error.hpp"

namespace poseprompt {

std::uint64_t Rle::area() const {
  std::uint64_t a = 0;
  for (std::size_t i = 1; i < counts.size(); i += 2) a += counts[i];
  return a;
}

Rle rle_encode(const BinaryMask& mask) {
  Rle rle{mask.dims(), {}};
  const std::uint8_t* data = mask.array().data();
  const Index n = mask.dims().area();
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (Index i = 0; i < n; ++i) {
    if (data[i] != current) {
      rle.counts.push_back(run);
      run = 0;
      current = data[i];
    }
    ++run;
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask rle_decode(const Rle& rle) {
  const std::uint64_t total =
      std::accumulate(rle.counts.begin(), rle.counts.end(), std::uint64_t{0});
  if (total != static_cast<std::uint64_t>(rle.dims.area())) {
    throw Error(ErrorCode::CountSumMismatch, "counts sum to " + std::to_string(total) +
                                                 ", expected " +
                                                 std::to_string(rle.dims.area()));
  }
  MaskArray pixels(rle.dims.height, rle.dims.width);
  std::uint8_t* out = pixels.data();
  std::uint8_t value = 0;
  for (const auto run : rle.counts) {
    std::fill_n(out, run, value);
    out += run;
    value ^= 1;
  }
  return BinaryMask(pixels);
}

std::string rle_compress(const Rle& rle) {
  std::string s;
  for (std::size_t i = 0; i < rle.counts.size(); ++i) {
    std::int64_t x = rle.counts[i];
    if (i > 2) x -= static_cast<std::int64_t>(rle.counts[i - 2]);
    bool more = true;
    while (more) {
      char c = static_cast<char>(x & 0x1f);
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      s.push_back(static_cast<char>(c + 48));
    }
  }
  return s;
}

Rle rle_decompress(std::string_view s, MaskDims dims) {
  Rle rle{dims, {}};
  std::size_t k = 0;
  while (k < s.size()) {
    std::int64_t x = 0;
    int shift = 0;
    bool more = true;
    while (more) {
      if (k >= s.size()) {
        throw Error(ErrorCode::MalformedRleString, "truncated varint at offset " + std::to_string(k));
      }
      const int c = static_cast<unsigned char>(s[k]) - 48;
      if (c < 0 || c > 63) {
        throw Error(ErrorCode::MalformedRleString,
                    "character outside alphabet at offset " + std::to_string(k));
      }
      if (shift > 55) {
        throw Error(ErrorCode::MalformedRleString, "varint too long at offset " + std::to_string(k));
      }
      x |= static_cast<std::int64_t>(c & 0x1f) << shift;
      more = (c & 0x20) != 0;
      ++k;
      shift += 5;
      if (!more && (c & 0x10)) x |= -(std::int64_t{1} << shift);
    }
    const std::size_t i = rle.counts.size();
    if (i > 2) x += static_cast<std::int64_t>(rle.counts[i - 2]);
    if (x < 0 || x > static_cast<std::int64_t>(UINT32_MAX)) {
      throw Error(ErrorCode::MalformedRleString, "run length out of range at run " + std::to_string(i));
    }
    rle.counts.push_back(static_cast<std::uint32_t>(x));
  }
  return rle;
}

double rle_iou(const Rle& dt, const Rle& gt, bool crowd_gt) {
  if (!(dt.dims == gt.dims)) {
    throw Error(ErrorCode::DimsMismatch, "rle_iou on masks of different size");
  }
  if (dt.counts.empty() || gt.counts.empty()) {
    throw Error(ErrorCode::CountSumMismatch, "empty run list");
  }
  std::size_t a = 1, b = 1;
  const std::size_t ka = dt.counts.size(), kb = gt.counts.size();
  std::uint64_t ca = dt.counts[0], cb = gt.counts[0];
  bool va = false, vb = false;
  std::uint64_t inter = 0, uni = 0;
  std::uint64_t remaining = 1;
  while (remaining > 0) {
    const std::uint64_t c = std::min(ca, cb);
    if (va || vb) {
      uni += c;
      if (va && vb) inter += c;
    }
    remaining = 0;
    ca -= c;
    if (ca == 0 && a < ka) {
      ca = dt.counts[a++];
      va = !va;
    }
    remaining += ca;
    cb -= c;
    if (cb == 0 && b < kb) {
      cb = gt.counts[b++];
      vb = !vb;
    }
    remaining += cb;
  }
  if (inter == 0) return 0.0;
  if (crowd_gt) uni = dt.area();
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace poseprompt
