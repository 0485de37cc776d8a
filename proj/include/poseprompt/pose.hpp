#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace poseprompt {

inline constexpr int kNumKeypoints = 17;

/// COCO keypoint order; the ordinal is the slot index in a Pose.
enum class KeypointName : int {
  Nose = 0,
  LeftEye,
  RightEye,
  LeftEar,
  RightEar,
  LeftShoulder,
  RightShoulder,
  LeftElbow,
  RightElbow,
  LeftWrist,
  RightWrist,
  LeftHip,
  RightHip,
  LeftKnee,
  RightKnee,
  LeftAnkle,
  RightAnkle,
};

std::string_view keypoint_name(int index);

/// Nose and eyes; at most one of them is used by spread selection.
inline bool is_face_keypoint(int index) {
  return index == static_cast<int>(KeypointName::Nose) ||
         index == static_cast<int>(KeypointName::LeftEye) ||
         index == static_cast<int>(KeypointName::RightEye);
}

struct Keypoint {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // (x, y) in pixels
  std::optional<double> visibility;
  std::optional<double> presence_prob;
  std::optional<double> expected_oks;
  std::optional<int> gt_flag;  // COCO code 0/1/2
};

/// Throws InvalidArgument if a score is outside [0,1], gt_flag is not
/// 0/1/2, or neither visibility nor gt_flag is present.
void validate(const Keypoint& kp);

struct Pose {
  std::array<std::optional<Keypoint>, kNumKeypoints> keypoints{};
  std::int64_t instance_id = 0;
  std::int64_t image_id = 0;
};

enum class ScoreField { Visibility, PresenceProb, ExpectedOks, GtFlag };

std::string_view to_string(ScoreField field);
ScoreField score_field_from_string(std::string_view name);

/// Default "low visibility" cut-off.
inline constexpr double kDefaultMinScore = 0.3;

std::optional<double> try_score(const Keypoint& kp, ScoreField field);

/// Throws FieldAbsent if the keypoint does not carry `field`.
/// GtFlag is binary: 0 -> 0.0, 1 or 2 -> 1.0.
double score_of(const Keypoint& kp, ScoreField field);

struct IndexedKeypoint {
  int index = 0;
  Keypoint keypoint;
  double score = 0.0;
};

/// Keypoints present in the pose, carrying `field`, with score >= min_score,
/// in canonical index order.
std::vector<IndexedKeypoint> available_keypoints(const Pose& pose, ScoreField field,
                                                 double min_score = kDefaultMinScore);

}  // namespace poseprompt
