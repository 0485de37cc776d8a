#include "poseprompt/prompt.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "poseprompt/error.hpp"

namespace poseprompt {

std::string_view to_string(PointLabel label) {
  return label == PointLabel::Positive ? "positive" : "negative";
}

std::string_view to_string(PointSource source) {
  switch (source) {
    case PointSource::PoseKeypoint: return "pose_keypoint";
    case PointSource::MaskSample: return "mask_sample";
    case PointSource::ErrorSample: return "error_sample";
  }
  return "mask_sample";
}

bool PromptSet::has_positive() const {
  return std::any_of(points.begin(), points.end(),
                     [](const PromptPoint& p) { return p.label == PointLabel::Positive; });
}

void validate(const PromptSet& prompts) {
  if (!prompts.has_positive() && !prompts.box) {
    throw Error(ErrorCode::InvalidArgument, "prompt set needs a positive point or a box");
  }
  if (prompts.points.size() > static_cast<std::size_t>(kMaxPromptPoints)) {
    throw Error(ErrorCode::InvalidArgument,
                "prompt set has " + std::to_string(prompts.points.size()) + " points, budget is " +
                    std::to_string(kMaxPromptPoints));
  }
  if (prompts.box) validate(*prompts.box);
}

namespace {

void check_count(int n) {
  if (n < 1 || n > kMaxPromptPoints) {
    throw Error(ErrorCode::InvalidArgument,
                "keypoint count must be in [1, " + std::to_string(kMaxPromptPoints) + "], got " +
                    std::to_string(n));
  }
}

PromptPoint keypoint_prompt(const IndexedKeypoint& kp, PointLabel label) {
  return {kp.keypoint.position, label, PointSource::PoseKeypoint, kp.index};
}

// Higher score first, lower index on ties.
bool ranks_before(const IndexedKeypoint& a, const IndexedKeypoint& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.index < b.index;
}

}  // namespace

PromptSet max_vis(const Pose& pose, int n, ScoreField field) {
  check_count(n);
  auto candidates = available_keypoints(pose, field, 0.0);
  if (candidates.empty()) throw Error(ErrorCode::NoKeypointsAvailable, "max_vis");
  std::stable_sort(candidates.begin(), candidates.end(), ranks_before);
  PromptSet out;
  const auto take = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < take; ++i) {
    out.points.push_back(keypoint_prompt(candidates[i], PointLabel::Positive));
  }
  return out;
}

PromptSet max_spread(const Pose& pose, int n, ScoreField field, double min_score) {
  check_count(n);
  auto candidates = available_keypoints(pose, field, min_score);
  if (candidates.empty()) throw Error(ErrorCode::NoKeypointsAvailable, "max_spread");

  const auto first = std::min_element(candidates.begin(), candidates.end(), ranks_before);
  std::vector<IndexedKeypoint> chosen{*first};
  std::vector<bool> used(candidates.size(), false);
  used[static_cast<std::size_t>(first - candidates.begin())] = true;
  bool face_used = is_face_keypoint(first->index);

  while (static_cast<int>(chosen.size()) < n) {
    std::ptrdiff_t best = -1;
    double best_dist = -1.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (used[c] || (face_used && is_face_keypoint(candidates[c].index))) continue;
      double d = std::numeric_limits<double>::infinity();
      for (const auto& s : chosen) {
        d = std::min(d, (candidates[c].keypoint.position - s.keypoint.position).norm());
      }
      // Candidates are in index order, so strict > keeps the lower index on ties.
      if (d > best_dist) {
        best_dist = d;
        best = static_cast<std::ptrdiff_t>(c);
      }
    }
    if (best < 0) break;
    used[static_cast<std::size_t>(best)] = true;
    chosen.push_back(candidates[static_cast<std::size_t>(best)]);
    face_used = face_used || is_face_keypoint(chosen.back().index);
  }

  PromptSet out;
  for (const auto& kp : chosen) out.points.push_back(keypoint_prompt(kp, PointLabel::Positive));
  return out;
}

PromptPoint negative_closest(const Pose& target, std::span<const Pose> others,
                             const PromptSet& prompt) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  int positives = 0;
  for (const auto& p : prompt.points) {
    if (p.label == PointLabel::Positive) {
      centroid += p.position;
      ++positives;
    }
  }
  if (positives > 0) {
    centroid /= positives;
  } else if (prompt.box) {
    centroid = {prompt.box->x + prompt.box->w / 2, prompt.box->y + prompt.box->h / 2};
  } else {
    throw Error(ErrorCode::InvalidArgument, "prompt has neither positive points nor a box");
  }

  std::optional<PromptPoint> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& other : others) {
    if (other.image_id == target.image_id && other.instance_id == target.instance_id) continue;
    for (int i = 0; i < kNumKeypoints; ++i) {
      const auto& slot = other.keypoints[static_cast<std::size_t>(i)];
      if (!slot) continue;
      const double d = (slot->position - centroid).norm();
      if (d < best_dist) {
        best_dist = d;
        best = PromptPoint{slot->position, PointLabel::Negative, PointSource::PoseKeypoint, i};
      }
    }
  }
  if (!best) throw Error(ErrorCode::NoCandidates, "no keypoints on other poses");
  return *best;
}

PromptPoint negative_least_visible(const Pose& target, ScoreField field) {
  const auto candidates = available_keypoints(target, field, 0.0);
  if (candidates.empty()) throw Error(ErrorCode::NoKeypointsAvailable, "negative_least_visible");
  const auto lowest = std::min_element(
      candidates.begin(), candidates.end(), [](const IndexedKeypoint& a, const IndexedKeypoint& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.index < b.index;
      });
  return keypoint_prompt(*lowest, PointLabel::Negative);
}

}  // namespace poseprompt
