#include "poseprompt/ablation.hpp"

#include <iostream>
#include <string>

#include "poseprompt/error.hpp"

namespace poseprompt {

BoxMode box_mode_from_string(std::string_view name, double factor) {
  if (name == "none") return BoxMode::none();
  if (name == "gt_box") return BoxMode::gt_box();
  if (name == "inflated_gt_box" || name == "inflated") return BoxMode::inflated(factor);
  throw Error(ErrorCode::InvalidArgument, "unknown bbox mode '" + std::string(name) + "'");
}

std::optional<BBox> ablation_box(const BoxMode& mode, const BinaryMask& gt) {
  switch (mode.kind) {
    case BoxModeKind::None: return std::nullopt;
    case BoxModeKind::GtBox: return bbox_of_mask(gt);
    case BoxModeKind::InflatedGtBox: return inflate_bbox(bbox_of_mask(gt), mode.factor, gt.dims());
  }
  return std::nullopt;
}

std::vector<SegmenterRequest> run_bbox_ablation(const BoxMode& mode,
                                                std::span<const SimInstance> instances,
                                                const PromptStrategy& strategy) {
  std::vector<SegmenterRequest> out;
  for (const auto& inst : instances) {
    SegmenterRequest req{inst.image_id, inst.instance_id, inst.gt.dims(), {}, std::nullopt};
    try {
      req.prompts = strategy(inst.pose);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoKeypointsAvailable) throw;
    }
    req.prompts.box = ablation_box(mode, inst.gt);
    if (!req.prompts.has_positive() && !req.prompts.box) {
      std::cerr << "instance " << inst.instance_id << ": no prompt available, skipped\n";
      continue;
    }
    validate(req.prompts);
    out.push_back(std::move(req));
  }
  return out;
}

CroppedInstance crop_instance(const SimInstance& inst, double crop_factor) {
  if (!(crop_factor >= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "crop factor must be >= 1");
  }
  const BBox window = inflate_bbox(bbox_of_mask(inst.gt), per_side_factor(crop_factor), inst.gt.dims());
  const PixelWindow pix = pixel_window(window, inst.gt.dims());
  CroppedInstance out{inst, window};
  out.instance.gt = crop_to_bbox(inst.gt, window);
  const Eigen::Vector2d origin(static_cast<double>(pix.col0), static_cast<double>(pix.row0));
  for (auto& slot : out.instance.pose.keypoints) {
    if (!slot) continue;
    const Eigen::Vector2d local = slot->position - origin;
    const double col = round_half_up(local.x()), row = round_half_up(local.y());
    if (col < 0 || row < 0 || col >= static_cast<double>(pix.cols) ||
        row >= static_cast<double>(pix.rows)) {
      slot.reset();
    } else {
      slot->position = local;
    }
  }
  return out;
}

}  // namespace poseprompt
