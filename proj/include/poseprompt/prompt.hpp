#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "poseprompt/bbox.hpp"
#include "poseprompt/pose.hpp"

namespace poseprompt {

/// Point budget of one refinement sequence; also caps a prompt set.
inline constexpr int kMaxPromptPoints = 8;

enum class PointLabel { Negative = 0, Positive = 1 };
enum class PointSource { PoseKeypoint, MaskSample, ErrorSample };

std::string_view to_string(PointLabel label);
std::string_view to_string(PointSource source);

struct PromptPoint {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // (x, y)
  PointLabel label = PointLabel::Positive;
  PointSource source = PointSource::MaskSample;
  int keypoint_index = -1;  // set when source == PoseKeypoint

  bool operator==(const PromptPoint& o) const {
    return position == o.position && label == o.label && source == o.source &&
           keypoint_index == o.keypoint_index;
  }
};

struct PromptSet {
  std::vector<PromptPoint> points;
  std::optional<BBox> box;

  bool has_positive() const;
};

/// Throws InvalidArgument unless there is a positive point or a box and at
/// most kMaxPromptPoints points.
void validate(const PromptSet& prompts);

/// Top-n keypoints by score, descending; ties go to the lower index.
PromptSet max_vis(const Pose& pose, int n, ScoreField field = ScoreField::Visibility);

/// Highest-score keypoint first, then repeatedly the eligible keypoint
/// farthest (max of min Euclidean distance) from those already chosen.
/// Keypoints below min_score are never eligible, and at most one of
/// nose/left_eye/right_eye is used.
PromptSet max_spread(const Pose& pose, int n, ScoreField field = ScoreField::Visibility,
                     double min_score = kDefaultMinScore);

/// Keypoint of another pose closest to the centroid of the positive prompt
/// points (box centre if there are none). Ties by pose order, then index.
PromptPoint negative_closest(const Pose& target, std::span<const Pose> others,
                             const PromptSet& prompt);

/// Lowest-score keypoint of the target itself; ties to the lower index.
PromptPoint negative_least_visible(const Pose& target, ScoreField field = ScoreField::Visibility);

}  // namespace poseprompt
