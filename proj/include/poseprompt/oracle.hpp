#pragma once

#include <cstdint>
#include <optional>

#include "poseprompt/mask.hpp"
#include "poseprompt/prompt.hpp"
#include "poseprompt/rle.hpp"

namespace poseprompt {

struct SegmenterRequest {
  std::int64_t image_id = 0;
  std::int64_t instance_id = 0;
  MaskDims dims;
  PromptSet prompts;
  std::optional<Rle> prior_mask;  // previous prediction
};

struct SegmenterResponse {
  Rle mask;
  double confidence = 0.0;
};

/// Pluggable segmenter: the in-process oracle or an external process.
class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual SegmenterResponse segment(const SegmenterRequest& req) = 0;
};

/// GT-anchored stand-in for a promptable segmenter. The first call returns
/// a corrupted copy of the GT; calls with a prior repair a disk around every
/// prompt point toward the GT.
struct OracleConfig {
  int corruption_erode = 2;
  int corruption_dilate = 0;
  double drop_component_prob = 0.3;
  double repair_radius = 12.0;
  std::uint64_t seed = 0;
};

void validate(const OracleConfig& cfg);

/// Disk morphology with a Euclidean structuring element; outside the image
/// counts as unset.
BinaryMask erode(const BinaryMask& m, int radius);
BinaryMask dilate(const BinaryMask& m, int radius);

/// 4-connected component labels (0 = background, components numbered from
/// 1 in column-major order of their first pixel).
Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic> label_components(const BinaryMask& m,
                                                                           int* count = nullptr);

BinaryMask corrupt_mask(const OracleConfig& cfg, const BinaryMask& gt, std::int64_t image_id,
                        std::int64_t instance_id);

BinaryMask repair_mask(const OracleConfig& cfg, const BinaryMask& gt, BinaryMask prior,
                       const PromptSet& prompts);

SegmenterResponse oracle_segment(const OracleConfig& cfg, const BinaryMask& gt,
                                 const SegmenterRequest& req);

}  // namespace poseprompt
