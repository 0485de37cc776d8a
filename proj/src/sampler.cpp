#include "poseprompt/sampler.hpp"

#include <string>

#include "poseprompt/bbox.hpp"
#include "poseprompt/error.hpp"

namespace poseprompt {

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::MaskRefine: return "mask_refine";
    case SamplerKind::Pose1MaskRefine: return "pose1_mask_refine";
    case SamplerKind::PoseMaskRefine: return "pose_mask_refine";
  }
  return "pose_mask_refine";
}

SamplerKind sampler_kind_from_string(std::string_view name) {
  if (name == "mask_refine" || name == "mR") return SamplerKind::MaskRefine;
  if (name == "pose1_mask_refine" || name == "P1mR") return SamplerKind::Pose1MaskRefine;
  if (name == "pose_mask_refine" || name == "PmR") return SamplerKind::PoseMaskRefine;
  throw Error(ErrorCode::InvalidArgument, "unknown sampler '" + std::string(name) + "'");
}

std::string_view to_string(SampleBranch branch) {
  switch (branch) {
    case SampleBranch::FirstMask: return "first_mask";
    case SampleBranch::FirstPose: return "first_pose";
    case SampleBranch::GtMask: return "gt";
    case SampleBranch::ErrorRegion: return "error";
    case SampleBranch::PoseInError: return "pose_error";
  }
  return "error";
}

void validate(const SamplerConfig& cfg) {
  if (cfg.total_points < 1 || cfg.total_points > kMaxPromptPoints) {
    throw Error(ErrorCode::InvalidArgument, "total_points must be in [1, 8]");
  }
  if (!(cfg.p_gt_sample >= 0.0 && cfg.p_gt_sample <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "p_gt_sample must be in [0, 1]");
  }
}

RefineState RefineState::start(const SamplerConfig& cfg, BinaryMask gt, Pose pose) {
  RefineState s{std::move(gt), BinaryMask(), std::move(pose), {}, {}, {}};
  s.pred = BinaryMask::zeros(s.gt.dims());
  s.rng = CounterRng::for_instance(cfg.seed, s.pose.image_id, s.pose.instance_id);
  return s;
}

std::pair<Index, Index> point_pixel(const PromptPoint& p) {
  return {static_cast<Index>(round_half_up(p.position.y())),
          static_cast<Index>(round_half_up(p.position.x()))};
}

namespace {

PromptPoint pixel_point(std::pair<Index, Index> rc, PointLabel label, PointSource source) {
  return {Eigen::Vector2d(static_cast<double>(rc.second), static_cast<double>(rc.first)), label,
          source, -1};
}

std::pair<Index, Index> uniform_pixel(const BinaryMask& m, CounterRng& rng) {
  const Index n = m.count();
  return nth_set_pixel(m, static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(n))));
}

}  // namespace

std::pair<PromptPoint, SampleBranch> first_point(const SamplerConfig& cfg, const BinaryMask& gt,
                                                 const Pose& pose, const CounterRng& rng) {
  validate(cfg);
  if (gt.empty()) throw Error(ErrorCode::EmptyGtMask, "first_point");
  CounterRng step = rng.split(0);
  if (cfg.kind != SamplerKind::MaskRefine) {
    const auto kps = available_keypoints(pose, cfg.score_field, 0.0);
    const IndexedKeypoint* best = nullptr;
    for (const auto& kp : kps) {
      if (!best || kp.score > best->score) best = &kp;
    }
    if (best) {
      return {{best->keypoint.position, PointLabel::Positive, PointSource::PoseKeypoint,
               best->index},
              SampleBranch::FirstPose};
    }
  }
  return {pixel_point(uniform_pixel(gt, step), PointLabel::Positive, PointSource::MaskSample),
          SampleBranch::FirstMask};
}

RefineState first_point(const SamplerConfig& cfg, RefineState state) {
  if (!state.sampled.empty()) {
    throw Error(ErrorCode::InvalidArgument, "first_point on a state that already has points");
  }
  auto [p, branch] = first_point(cfg, state.gt, state.pose, state.rng);
  state.sampled.push_back(p);
  state.branches.push_back(branch);
  return state;
}

PromptPoint advance(const SamplerConfig& cfg, RefineState& state) {
  validate(cfg);
  if (state.sampled.empty()) {
    throw Error(ErrorCode::InvalidArgument, "next_point needs a first point");
  }
  if (state.sampled.size() >= static_cast<std::size_t>(cfg.total_points)) {
    throw Error(ErrorCode::InvalidArgument, "point budget exhausted");
  }
  if (!(state.gt.dims() == state.pred.dims())) {
    throw Error(ErrorCode::DimsMismatch, "gt and prediction differ in size");
  }
  CounterRng step = state.rng.split(state.sampled.size());
  const double u = step.next_unit();

  PromptPoint p;
  SampleBranch branch;
  if (u < cfg.p_gt_sample) {
    p = pixel_point(uniform_pixel(state.gt, step), PointLabel::Positive, PointSource::MaskSample);
    branch = SampleBranch::GtMask;
  } else {
    const BinaryMask err = error_region(state.gt, state.pred);
    const auto label_at = [&](std::pair<Index, Index> rc) {
      return state.gt(rc.first, rc.second) ? PointLabel::Positive : PointLabel::Negative;
    };
    std::optional<PromptPoint> from_pose;
    if (cfg.kind == SamplerKind::PoseMaskRefine) {
      std::array<bool, kNumKeypoints> used{};
      for (const auto& s : state.sampled) {
        if (s.source == PointSource::PoseKeypoint && s.keypoint_index >= 0) {
          used[static_cast<std::size_t>(s.keypoint_index)] = true;
        }
      }
      double best_score = -1.0;
      for (const auto& kp : available_keypoints(state.pose, cfg.score_field, 0.0)) {
        if (used[static_cast<std::size_t>(kp.index)]) continue;
        PromptPoint cand{kp.keypoint.position, PointLabel::Positive, PointSource::PoseKeypoint,
                         kp.index};
        const auto rc = point_pixel(cand);
        if (!err.contains(rc.first, rc.second) || !err(rc.first, rc.second)) continue;
        if (kp.score > best_score) {
          best_score = kp.score;
          cand.label = label_at(rc);
          from_pose = cand;
        }
      }
    }
    if (from_pose) {
      p = *from_pose;
      branch = SampleBranch::PoseInError;
    } else {
      if (err.empty()) {
        throw Error(ErrorCode::NothingToSample, "error region is empty");
      }
      const auto rc = uniform_pixel(err, step);
      p = pixel_point(rc, label_at(rc), PointSource::ErrorSample);
      branch = SampleBranch::ErrorRegion;
    }
  }
  state.sampled.push_back(p);
  state.branches.push_back(branch);
  return p;
}

std::pair<PromptPoint, RefineState> next_point(const SamplerConfig& cfg, RefineState state) {
  PromptPoint p = advance(cfg, state);
  return {p, std::move(state)};
}

std::vector<PromptPoint> sample_sequence(const SamplerConfig& cfg, const BinaryMask& gt,
                                         std::span<const BinaryMask> pred_trace, const Pose& pose,
                                         std::vector<SampleBranch>* branches) {
  validate(cfg);
  if (pred_trace.size() != static_cast<std::size_t>(cfg.total_points - 1)) {
    throw Error(ErrorCode::InvalidArgument,
                "pred_trace needs " + std::to_string(cfg.total_points - 1) + " masks, got " +
                    std::to_string(pred_trace.size()));
  }
  RefineState state = first_point(cfg, RefineState::start(cfg, gt, pose));
  for (const auto& pred : pred_trace) {
    state.pred = pred;
    advance(cfg, state);
  }
  if (branches) *branches = state.branches;
  return state.sampled;
}

}  // namespace poseprompt
