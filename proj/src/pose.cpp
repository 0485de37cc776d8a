#include "poseprompt/pose.hpp"

#include <string>

#include "poseprompt/error.hpp"

namespace poseprompt {

namespace {

constexpr std::array<std::string_view, kNumKeypoints> kNames = {
    "nose",          "left_eye",       "right_eye",  "left_ear",    "right_ear",
    "left_shoulder", "right_shoulder", "left_elbow", "right_elbow", "left_wrist",
    "right_wrist",   "left_hip",       "right_hip",  "left_knee",   "right_knee",
    "left_ankle",    "right_ankle"};

void check_unit(const std::optional<double>& v, const char* what) {
  if (v && !(*v >= 0.0 && *v <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " outside [0,1]: " + std::to_string(*v));
  }
}

}  // namespace

std::string_view keypoint_name(int index) {
  if (index < 0 || index >= kNumKeypoints) {
    throw Error(ErrorCode::InvalidArgument, "keypoint index " + std::to_string(index));
  }
  return kNames[static_cast<std::size_t>(index)];
}

void validate(const Keypoint& kp) {
  check_unit(kp.visibility, "visibility");
  check_unit(kp.presence_prob, "presence_prob");
  check_unit(kp.expected_oks, "expected_oks");
  if (kp.gt_flag && (*kp.gt_flag < 0 || *kp.gt_flag > 2)) {
    throw Error(ErrorCode::InvalidArgument, "gt_flag must be 0, 1 or 2");
  }
  if (!kp.visibility && !kp.gt_flag) {
    throw Error(ErrorCode::InvalidArgument, "keypoint has neither visibility nor gt_flag");
  }
}

std::string_view to_string(ScoreField field) {
  switch (field) {
    case ScoreField::Visibility: return "visibility";
    case ScoreField::PresenceProb: return "presence_prob";
    case ScoreField::ExpectedOks: return "expected_oks";
    case ScoreField::GtFlag: return "gt_flag";
  }
  return "visibility";
}

ScoreField score_field_from_string(std::string_view name) {
  for (auto f : {ScoreField::Visibility, ScoreField::PresenceProb, ScoreField::ExpectedOks,
                 ScoreField::GtFlag}) {
    if (to_string(f) == name) return f;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown score field '" + std::string(name) + "'");
}

std::optional<double> try_score(const Keypoint& kp, ScoreField field) {
  switch (field) {
    case ScoreField::Visibility: return kp.visibility;
    case ScoreField::PresenceProb: return kp.presence_prob;
    case ScoreField::ExpectedOks: return kp.expected_oks;
    case ScoreField::GtFlag:
      if (!kp.gt_flag) return std::nullopt;
      return *kp.gt_flag == 0 ? 0.0 : 1.0;
  }
  return std::nullopt;
}

double score_of(const Keypoint& kp, ScoreField field) {
  const auto s = try_score(kp, field);
  if (!s) throw Error(ErrorCode::FieldAbsent, std::string(to_string(field)) + " not present");
  return *s;
}

std::vector<IndexedKeypoint> available_keypoints(const Pose& pose, ScoreField field,
                                                 double min_score) {
  if (!(min_score >= 0.0 && min_score <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "min_score outside [0,1]");
  }
  std::vector<IndexedKeypoint> out;
  for (int i = 0; i < kNumKeypoints; ++i) {
    const auto& slot = pose.keypoints[static_cast<std::size_t>(i)];
    if (!slot) continue;
    const auto s = try_score(*slot, field);
    if (s && *s >= min_score) out.push_back({i, *slot, *s});
  }
  return out;
}

}  // namespace poseprompt
