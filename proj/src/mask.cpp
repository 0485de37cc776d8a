#include "poseprompt/mask.hpp"

#include <string>

#include "poseprompt/error.hpp"

namespace poseprompt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CountSumMismatch: return "CountSumMismatch";
    case ErrorCode::MalformedRleString: return "MalformedRleString";
    case ErrorCode::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::DimsMismatch: return "DimsMismatch";
    case ErrorCode::EmptyAfterClamp: return "EmptyAfterClamp";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::FieldAbsent: return "FieldAbsent";
    case ErrorCode::NoKeypointsAvailable: return "NoKeypointsAvailable";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::EmptyGtMask: return "EmptyGtMask";
    case ErrorCode::NothingToSample: return "NothingToSample";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::PeerClosed: return "PeerClosed";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

MaskDims::MaskDims(Index h, Index w) : height(h), width(w) {
  if (h < 1 || w < 1) {
    throw Error(ErrorCode::InvalidArgument,
                "mask dims must be positive, got " + std::to_string(h) + "x" + std::to_string(w));
  }
}

BinaryMask::BinaryMask(MaskDims dims) : pixels_(MaskArray::Zero(dims.height, dims.width)) {}

BinaryMask::BinaryMask(const MaskArray& pixels)
    : pixels_((pixels != 0).cast<std::uint8_t>()) {
  MaskDims checked(pixels.rows(), pixels.cols());
  (void)checked;
}

BinaryMask BinaryMask::ones(MaskDims dims) {
  return BinaryMask(MaskArray::Ones(dims.height, dims.width));
}

namespace {

void require_same_dims(const BinaryMask& a, const BinaryMask& b) {
  if (!(a.dims() == b.dims())) {
    throw Error(ErrorCode::DimsMismatch,
                std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                    std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
}

}  // namespace

double iou(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a, b);
  const auto inter = ((a.array() != 0) && (b.array() != 0)).count();
  const auto uni = ((a.array() != 0) || (b.array() != 0)).count();
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask error_region(const BinaryMask& gt, const BinaryMask& pred) {
  require_same_dims(gt, pred);
  return BinaryMask(MaskArray((gt.array() != pred.array()).cast<std::uint8_t>()));
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a, b);
  return BinaryMask(MaskArray(a.array().max(b.array())));
}

BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a, b);
  return BinaryMask(MaskArray(a.array().min(b.array())));
}

std::pair<Index, Index> nth_set_pixel(const BinaryMask& m, Index k) {
  const std::uint8_t* data = m.array().data();
  const Index n = m.dims().area();
  Index seen = 0;
  for (Index i = 0; i < n; ++i) {
    if (data[i] != 0) {
      if (seen == k) return {i % m.height(), i / m.height()};
      ++seen;
    }
  }
  throw Error(ErrorCode::InvalidArgument,
              "pixel rank " + std::to_string(k) + " out of range (" + std::to_string(seen) + ")");
}

}  // namespace poseprompt
