#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "poseprompt/coco_io.hpp"

namespace poseprompt {

struct AreaRange {
  double lo = 0.0;
  double hi = 1e10;
};

/// COCO mask-AP protocol parameters.
struct EvalParams {
  std::vector<double> iou_thresholds = linspace(0.5, 0.95, 10);
  std::vector<double> recall_points = linspace(0.0, 1.0, 101);
  int max_dets = 100;
  AreaRange all{0.0, 1e10};
  AreaRange small{0.0, 32.0 * 32.0};
  AreaRange medium{32.0 * 32.0, 96.0 * 96.0};
  AreaRange large{96.0 * 96.0, 1e10};
  /// COCO*: GT in the small range (and detections matched only to them) are
  /// ignored in every summary.
  bool exclude_small = false;

  /// Same floating-point values as numpy.linspace.
  static std::vector<double> linspace(double start, double stop, int num);
};

void validate(const EvalParams& params);

struct MatchCounts {
  long long true_positives = 0;
  long long false_positives = 0;
  long long false_negatives = 0;
};

struct EvalResult {
  double ap = -1.0;  // -1 when no GT exists in the slice
  double ap50 = -1.0;
  double ap75 = -1.0;
  double ap_small = -1.0;
  double ap_medium = -1.0;
  double ap_large = -1.0;
  double ar = -1.0;
  std::vector<double> ap_per_threshold;
  MatchCounts counts;  // at the first threshold, all areas
};

EvalResult evaluate(const GtDataset& gt, std::span<const DetInstance> dets,
                    const EvalParams& params = {});

/// {ap, ap50, ap75, ap_small?, ap_medium, ap_large, ar}; ap_small is left
/// out under exclude_small.
nlohmann::json report_json(const EvalResult& result, const EvalParams& params);

}  // namespace poseprompt
