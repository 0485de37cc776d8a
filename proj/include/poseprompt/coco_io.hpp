#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "poseprompt/bbox.hpp"
#include "poseprompt/pose.hpp"
#include "poseprompt/raster.hpp"
#include "poseprompt/refine_loop.hpp"
#include "poseprompt/rle.hpp"

namespace poseprompt {

struct ImageInfo {
  std::int64_t id = 0;
  MaskDims dims;
};

using Segmentation = std::variant<Rle, std::vector<Polygon>>;

struct GtInstance {
  std::int64_t image_id = 0;
  std::int64_t instance_id = 0;
  std::int64_t category_id = 1;
  MaskDims dims;
  Segmentation segmentation;
  BBox bbox;
  std::optional<Pose> pose;
  bool iscrowd = false;
  double area = 0.0;

  /// Decoded on demand; polygons are rasterized here.
  Rle rle() const;
  BinaryMask mask() const;
  /// Which GT representation the mask came from: "rle" or "polygon".
  std::string_view mask_source() const;
};

struct GtDataset {
  std::vector<ImageInfo> images;
  std::vector<GtInstance> instances;
  std::vector<std::int64_t> category_ids;

  const ImageInfo& image(std::int64_t id) const;
};

struct DetInstance {
  std::int64_t image_id = 0;
  std::int64_t category_id = 1;
  Rle mask;
  double score = 0.0;
};

/// Parse errors carry line/column; schema errors name the missing field.
GtDataset parse_gt(const std::string& text);
GtDataset load_gt(const std::filesystem::path& path);

std::vector<DetInstance> parse_dets(const std::string& text);
std::vector<DetInstance> load_dets(const std::filesystem::path& path);

/// COCO triplets [x, y, code] plus optional 17-long `visibility`,
/// `presence_prob` and `expected_oks` arrays. With `gt_codes` the third
/// triplet value is a COCO visibility code; otherwise it is a visibility
/// score unless a `visibility` array is given.
Pose pose_from_json(const nlohmann::json& ann, bool gt_codes);

/// A detected-pose file (JSON array of results) or a COCO annotation file.
std::vector<Pose> parse_poses(const std::string& text);
std::vector<Pose> load_poses(const std::filesystem::path& path);

/// GT instances that are not crowd regions, with their pose if annotated.
std::vector<SimInstance> sim_instances(const GtDataset& gt);

std::string results_to_string(std::span<const DetInstance> dets);
void write_results(std::span<const DetInstance> dets, const std::filesystem::path& path);

/// CSV: instance_id,step,iou with steps from 1.
std::string trace_report_csv(std::span<const IterationTrace> traces);
void write_trace_report(std::span<const IterationTrace> traces, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace poseprompt
