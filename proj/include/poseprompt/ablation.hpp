#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "poseprompt/oracle.hpp"
#include "poseprompt/refine_loop.hpp"

namespace poseprompt {

enum class BoxModeKind { None, GtBox, InflatedGtBox };

struct BoxMode {
  BoxModeKind kind = BoxModeKind::None;
  double factor = 0.5;  // per side, used by InflatedGtBox

  static BoxMode none() { return {}; }
  static BoxMode gt_box() { return {BoxModeKind::GtBox, 0.0}; }
  static BoxMode inflated(double factor = 0.5) { return {BoxModeKind::InflatedGtBox, factor}; }
};

BoxMode box_mode_from_string(std::string_view name, double factor = 0.5);

/// Keypoint-to-prompt strategy applied to each instance's pose.
using PromptStrategy = std::function<PromptSet(const Pose&)>;

/// Box prompt for an instance under `mode`: none, the tight GT box, or the
/// GT box inflated by mode.factor per side and clamped to the image.
std::optional<BBox> ablation_box(const BoxMode& mode, const BinaryMask& gt);

/// One first-call request per instance, prompts from `strategy` plus the box
/// chosen by `mode`. Instances that end up with neither a positive point
/// nor a box are skipped.
std::vector<SegmenterRequest> run_bbox_ablation(const BoxMode& mode,
                                                std::span<const SimInstance> instances,
                                                const PromptStrategy& strategy);

/// Per-side inflation equivalent to scaling each box dimension by `scale`.
inline double per_side_factor(double scale) { return (scale - 1.0) / 2.0; }

/// Instance restricted to its GT box scaled by `crop_factor`: the mask is
/// cropped, keypoints outside the window become unavailable and the rest are
/// shifted into crop coordinates.
struct CroppedInstance {
  SimInstance instance;
  BBox window;  // in source image coordinates
};

CroppedInstance crop_instance(const SimInstance& inst, double crop_factor);

}  // namespace poseprompt
