#include "poseprompt/coco_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "poseprompt/error.hpp"

namespace poseprompt {

using nlohmann::json;

namespace {

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " +
                                           std::to_string(col) + ": " + e.what());
  }
}

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw Error(ErrorCode::SchemaError, where + ": missing field '" + name + "'");
  }
  return obj[name];
}

template <typename T>
T get_as(const json& obj, const char* name, const std::string& where) {
  try {
    return field(obj, name, where).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, where + ": field '" + name + "' has the wrong type");
  }
}

Rle rle_from_json(const json& seg, const std::string& where) {
  const json& size = field(seg, "size", where);
  if (!size.is_array() || size.size() != 2) {
    throw Error(ErrorCode::SchemaError, where + ": 'size' must be [h, w]");
  }
  const MaskDims dims(size[0].get<Index>(), size[1].get<Index>());
  const json& counts = field(seg, "counts", where);
  if (counts.is_string()) return rle_decompress(counts.get<std::string>(), dims);
  if (counts.is_array()) return Rle{dims, counts.get<std::vector<std::uint32_t>>()};
  throw Error(ErrorCode::SchemaError, where + ": 'counts' must be a string or a list");
}

std::optional<std::vector<double>> score_array(const json& ann, const char* name) {
  if (!ann.contains(name) || ann[name].is_null()) return std::nullopt;
  auto v = ann[name].get<std::vector<double>>();
  if (v.size() != kNumKeypoints) {
    throw Error(ErrorCode::SchemaError,
                std::string("'") + name + "' must have " + std::to_string(kNumKeypoints) + " entries");
  }
  return v;
}

}  // namespace

Rle GtInstance::rle() const {
  if (const auto* r = std::get_if<Rle>(&segmentation)) return *r;
  return rle_encode(rasterize(std::get<std::vector<Polygon>>(segmentation), dims));
}

BinaryMask GtInstance::mask() const {
  if (const auto* r = std::get_if<Rle>(&segmentation)) return rle_decode(*r);
  return rasterize(std::get<std::vector<Polygon>>(segmentation), dims);
}

std::string_view GtInstance::mask_source() const {
  return std::holds_alternative<Rle>(segmentation) ? "rle" : "polygon";
}

const ImageInfo& GtDataset::image(std::int64_t id) const {
  const auto it = std::find_if(images.begin(), images.end(), [&](const ImageInfo& i) { return i.id == id; });
  if (it == images.end()) throw Error(ErrorCode::SchemaError, "unknown image_id " + std::to_string(id));
  return *it;
}

Pose pose_from_json(const json& ann, bool gt_codes) {
  Pose pose;
  const json& kps = ann.at("keypoints");
  if (!kps.is_array() || kps.size() != 3 * kNumKeypoints) {
    throw Error(ErrorCode::SchemaError, "'keypoints' must hold 17 (x, y, v) triplets");
  }
  const auto vis = score_array(ann, "visibility");
  const auto presence = score_array(ann, "presence_prob");
  const auto oks = score_array(ann, "expected_oks");
  for (std::size_t i = 0; i < kNumKeypoints; ++i) {
    const json& jx = kps[3 * i];
    const json& jy = kps[3 * i + 1];
    const json& jv = kps[3 * i + 2];
    if (jx.is_null() || jy.is_null() || jv.is_null()) continue;
    const double x = jx.get<double>(), y = jy.get<double>(), v = jv.get<double>();
    if (x == 0.0 && y == 0.0 && v == 0.0) continue;
    Keypoint kp;
    kp.position = {x, y};
    if (gt_codes) {
      kp.gt_flag = static_cast<int>(v);
      if (*kp.gt_flag == 0) continue;
    } else if (!vis) {
      kp.visibility = v;
    }
    if (vis) kp.visibility = (*vis)[i];
    if (presence) kp.presence_prob = (*presence)[i];
    if (oks) kp.expected_oks = (*oks)[i];
    validate(kp);
    pose.keypoints[i] = kp;
  }
  return pose;
}

GtDataset parse_gt(const std::string& text) {
  const json root = parse_json(text);
  GtDataset ds;
  for (const auto& img : field(root, "images", "root")) {
    const std::string where = "image";
    ds.images.push_back({get_as<std::int64_t>(img, "id", where),
                         MaskDims(get_as<Index>(img, "height", where), get_as<Index>(img, "width", where))});
  }
  if (root.contains("categories")) {
    for (const auto& cat : root["categories"]) ds.category_ids.push_back(get_as<std::int64_t>(cat, "id", "category"));
  }
  for (const auto& ann : field(root, "annotations", "root")) {
    GtInstance inst;
    inst.instance_id = get_as<std::int64_t>(ann, "id", "annotation");
    const std::string where = "annotation " + std::to_string(inst.instance_id);
    inst.image_id = get_as<std::int64_t>(ann, "image_id", where);
    inst.category_id = ann.value("category_id", std::int64_t{1});
    inst.iscrowd = ann.value("iscrowd", 0) != 0;
    inst.area = get_as<double>(ann, "area", where);
    inst.dims = ds.image(inst.image_id).dims;
    const json& seg = field(ann, "segmentation", where);
    if (seg.is_array()) {
      std::vector<Polygon> polys;
      for (const auto& flat : seg) polys.push_back(Polygon::from_flat(flat.get<std::vector<double>>()));
      for (const auto& p : polys) {
        if (p.vertices.size() < 3) throw Error(ErrorCode::DegeneratePolygon, where);
      }
      inst.segmentation = std::move(polys);
    } else {
      Rle r = rle_from_json(seg, where);
      if (!(r.dims == inst.dims)) {
        throw Error(ErrorCode::DimsMismatch, where + ": mask size differs from its image");
      }
      inst.segmentation = std::move(r);
    }
    if (ann.contains("bbox")) {
      const auto b = ann["bbox"].get<std::vector<double>>();
      if (b.size() != 4) throw Error(ErrorCode::SchemaError, where + ": 'bbox' must have 4 values");
      inst.bbox = {b[0], b[1], b[2], b[3]};
    }
    if (ann.contains("keypoints") && !ann["keypoints"].is_null()) {
      inst.pose = pose_from_json(ann, true);
      inst.pose->image_id = inst.image_id;
      inst.pose->instance_id = inst.instance_id;
    }
    ds.instances.push_back(std::move(inst));
  }
  if (ds.category_ids.empty()) {
    for (const auto& inst : ds.instances) ds.category_ids.push_back(inst.category_id);
  }
  std::sort(ds.category_ids.begin(), ds.category_ids.end());
  ds.category_ids.erase(std::unique(ds.category_ids.begin(), ds.category_ids.end()), ds.category_ids.end());
  return ds;
}

GtDataset load_gt(const std::filesystem::path& path) { return parse_gt(read_file(path)); }

std::vector<DetInstance> parse_dets(const std::string& text) {
  const json root = parse_json(text);
  if (!root.is_array()) throw Error(ErrorCode::SchemaError, "results file must be a JSON array");
  std::vector<DetInstance> dets;
  for (const auto& r : root) {
    const std::string where = "result " + std::to_string(dets.size());
    DetInstance d;
    d.image_id = get_as<std::int64_t>(r, "image_id", where);
    d.category_id = r.value("category_id", std::int64_t{1});
    d.score = get_as<double>(r, "score", where);
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw Error(ErrorCode::SchemaError, where + ": score outside [0,1]");
    }
    d.mask = rle_from_json(field(r, "segmentation", where), where);
    dets.push_back(std::move(d));
  }
  return dets;
}

std::vector<DetInstance> load_dets(const std::filesystem::path& path) { return parse_dets(read_file(path)); }

std::vector<Pose> parse_poses(const std::string& text) {
  const json root = parse_json(text);
  std::vector<Pose> poses;
  if (root.is_object()) {
    for (const auto& inst : parse_gt(text).instances) {
      if (inst.pose) poses.push_back(*inst.pose);
    }
    return poses;
  }
  if (!root.is_array()) throw Error(ErrorCode::SchemaError, "pose file must be an array or a COCO file");
  std::int64_t next_id = 1;
  for (const auto& r : root) {
    const std::string where = "pose " + std::to_string(poses.size());
    field(r, "keypoints", where);
    Pose p = pose_from_json(r, false);
    p.image_id = get_as<std::int64_t>(r, "image_id", where);
    p.instance_id = r.contains("instance_id") ? r["instance_id"].get<std::int64_t>()
                                              : r.value("id", next_id);
    ++next_id;
    poses.push_back(p);
  }
  return poses;
}

std::vector<Pose> load_poses(const std::filesystem::path& path) { return parse_poses(read_file(path)); }

std::vector<SimInstance> sim_instances(const GtDataset& gt) {
  std::vector<SimInstance> out;
  for (const auto& inst : gt.instances) {
    if (inst.iscrowd) continue;
    SimInstance s{inst.image_id, inst.instance_id, inst.mask(), inst.pose.value_or(Pose{})};
    if (s.gt.empty()) continue;
    s.pose.image_id = inst.image_id;
    s.pose.instance_id = inst.instance_id;
    out.push_back(std::move(s));
  }
  return out;
}

std::string results_to_string(std::span<const DetInstance> dets) {
  json arr = json::array();
  for (const auto& d : dets) {
    json seg;
    seg["size"] = {d.mask.dims.height, d.mask.dims.width};
    seg["counts"] = rle_compress(d.mask);
    arr.push_back({{"image_id", d.image_id},
                   {"category_id", d.category_id},
                   {"segmentation", seg},
                   {"score", d.score}});
  }
  return arr.dump();
}

void write_results(std::span<const DetInstance> dets, const std::filesystem::path& path) {
  write_file(path, results_to_string(dets));
}

std::string trace_report_csv(std::span<const IterationTrace> traces) {
  std::string out = "instance_id,step,iou\n";
  char buf[64];
  for (const auto& t : traces) {
    for (std::size_t s = 0; s < t.ious.size(); ++s) {
      std::snprintf(buf, sizeof buf, "%lld,%zu,%.6f\n", static_cast<long long>(t.instance_id), s + 1,
                    t.ious[s]);
      out += buf;
    }
  }
  return out;
}

void write_trace_report(std::span<const IterationTrace> traces, const std::filesystem::path& path) {
  write_file(path, trace_report_csv(traces));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace poseprompt
