#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "poseprompt/mask.hpp"
#include "poseprompt/pose.hpp"
#include "poseprompt/prompt.hpp"
#include "poseprompt/rng.hpp"

namespace poseprompt {

enum class SamplerKind { MaskRefine, Pose1MaskRefine, PoseMaskRefine };

std::string_view to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(std::string_view name);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::PoseMaskRefine;
  int total_points = kMaxPromptPoints;
  double p_gt_sample = 0.1;
  ScoreField score_field = ScoreField::Visibility;
  std::uint64_t seed = 0;
};

void validate(const SamplerConfig& cfg);

/// Which rule produced a sampled point.
enum class SampleBranch { FirstMask, FirstPose, GtMask, ErrorRegion, PoseInError };

std::string_view to_string(SampleBranch branch);

struct RefineState {
  BinaryMask gt;
  BinaryMask pred;
  Pose pose;
  std::vector<PromptPoint> sampled;
  std::vector<SampleBranch> branches;  // parallel to `sampled`
  CounterRng rng;                      // base stream; step k uses rng.split(k)

  /// Fresh state with no points sampled; pred starts empty.
  static RefineState start(const SamplerConfig& cfg, BinaryMask gt, Pose pose);
};

/// Pixel (row, col) a point refers to: coordinates rounded half-up.
std::pair<Index, Index> point_pixel(const PromptPoint& p);

/// MaskRefine: uniform pixel of gt. Pose variants: available keypoint with
/// the highest score, falling back to the MaskRefine rule. Draws from
/// rng.split(0).
std::pair<PromptPoint, SampleBranch> first_point(const SamplerConfig& cfg, const BinaryMask& gt,
                                                 const Pose& pose, const CounterRng& rng);

/// First point of a fresh state, recorded into a copy of it.
RefineState first_point(const SamplerConfig& cfg, RefineState state);

/// One correction point against state.pred; returns the point and the
/// advanced state.
std::pair<PromptPoint, RefineState> next_point(const SamplerConfig& cfg, RefineState state);

/// In-place form used by loops; appends to state.sampled.
PromptPoint advance(const SamplerConfig& cfg, RefineState& state);

/// first_point then total_points-1 next_point draws, the k-th against
/// pred_trace[k-1].
std::vector<PromptPoint> sample_sequence(const SamplerConfig& cfg, const BinaryMask& gt,
                                         std::span<const BinaryMask> pred_trace, const Pose& pose,
                                         std::vector<SampleBranch>* branches = nullptr);

}  // namespace poseprompt
