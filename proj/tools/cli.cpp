#include "cli.hpp"

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "json_config.hpp"
#include "poseprompt/ablation.hpp"
#include "poseprompt/coco_io.hpp"
#include "poseprompt/error.hpp"
#include "poseprompt/evaluator.hpp"
#include "poseprompt/refine_loop.hpp"
#include "poseprompt/wire.hpp"

namespace poseprompt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SelectOptions {
  std::string gt_path;
  std::string poses_path;
  std::string strategy = "max_vis";
  std::vector<int> n = {3};
  std::string score_field = "visibility";
  double min_score = kDefaultMinScore;
  std::string negative = "none";
  std::string bbox_mode = "none";
  double inflate_factor = 0.5;
  std::string out = "out";
};

struct SimulateOptions {
  std::string gt_path;
  std::string sampler = "pose_mask_refine";
  int n = kMaxPromptPoints;
  double p_gt = 0.1;
  std::string score_field = "visibility";
  std::uint64_t seed = 0;
  int erode = 2;
  int dilate = 0;
  double drop_prob = 0.3;
  double repair_radius = 12.0;
  double crop_factor = 0.0;
  std::string endpoint;
  int workers = 0;
  int timeout_ms = 30000;
  int retries = 1;
  std::string out = "out";
};

struct EvaluateOptions {
  std::string gt_path;
  std::string dets_path;
  bool exclude_small = false;
  int max_dets = 100;
  std::string out;
};

struct InflateOptions {
  std::vector<double> box;
  std::vector<long> image_size;
  std::string gt_path;
  double inflate_factor = 0.5;
  std::string out;
};

struct CropOptions {
  std::string gt_path;
  double crop_factor = 1.5;
  std::string out = "out";
};

struct ServeOptions {
  std::string gt_path;
  int erode = 2;
  int dilate = 0;
  double drop_prob = 0.3;
  double repair_radius = 12.0;
  std::uint64_t seed = 0;
  int port = -1;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return kConfigError;
    case ErrorCode::ProtocolError:
    case ErrorCode::Timeout:
    case ErrorCode::PeerClosed:
      return kWireError;
    default:
      return kDataError;
  }
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

void snapshot_config(const CLI::App& sub, const fs::path& dir) {
  write_file(dir / "config.json", sub.config_to_str(true, false));
}

json point_json(const PromptPoint& p) {
  json j = {{"x", p.position.x()},
            {"y", p.position.y()},
            {"label", p.label == PointLabel::Positive ? 1 : 0},
            {"source", std::string(to_string(p.source))}};
  if (p.keypoint_index >= 0) j["keypoint"] = std::string(keypoint_name(p.keypoint_index));
  return j;
}

json box_json(const std::optional<BBox>& b) {
  if (!b) return nullptr;
  return json::array({b->x, b->y, b->w, b->h});
}

json prompt_json(std::int64_t image_id, std::int64_t instance_id, const PromptSet& ps) {
  json points = json::array();
  for (const auto& p : ps.points) points.push_back(point_json(p));
  return {{"image_id", image_id}, {"instance_id", instance_id}, {"points", points}, {"box", box_json(ps.box)}};
}

// ---- select ---------------------------------------------------------------

PromptStrategy make_strategy(const SelectOptions& o, int n, ScoreField field) {
  if (o.strategy == "max_vis") {
    return [n, field](const Pose& p) { return max_vis(p, n, field); };
  }
  if (o.strategy == "max_spread") {
    const double min_score = o.min_score;
    return [n, field, min_score](const Pose& p) { return max_spread(p, n, field, min_score); };
  }
  throw Error(ErrorCode::InvalidArgument, "unknown strategy '" + o.strategy + "'");
}

int cmd_select(const SelectOptions& o, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  if (o.gt_path.empty() == o.poses_path.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give exactly one of --gt or --poses");
  }
  if (o.negative != "none" && o.negative != "closest" && o.negative != "least_visible") {
    throw Error(ErrorCode::InvalidArgument, "unknown negative strategy '" + o.negative + "'");
  }
  const ScoreField field = score_field_from_string(o.score_field);
  const BoxMode mode = box_mode_from_string(o.bbox_mode, o.inflate_factor);
  if (mode.kind != BoxModeKind::None && o.gt_path.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--bbox-mode needs GT masks (--gt)");
  }
  for (int n : o.n) make_strategy(o, n, field);  // validates the strategy name early

  std::vector<SimInstance> instances;
  if (!o.gt_path.empty()) {
    instances = sim_instances(load_gt(o.gt_path));
  } else {
    for (const Pose& p : load_poses(o.poses_path)) {
      instances.push_back({p.image_id, p.instance_id, BinaryMask(), p});
    }
  }
  std::map<std::int64_t, std::vector<Pose>> by_image;
  for (const auto& inst : instances) by_image[inst.image_id].push_back(inst.pose);

  const fs::path dir = prepare_out_dir(o.out);
  snapshot_config(sub, dir);
  const bool sweep = o.n.size() > 1;
  for (int n : o.n) {
    if (n < 1 || n > kMaxPromptPoints) {
      throw Error(ErrorCode::InvalidArgument, "--n values must be in [1, 8]");
    }
    const PromptStrategy strategy = make_strategy(o, n, field);
    json prompts = json::array();
    json skipped = json::array();
    for (const auto& inst : instances) {
      PromptSet ps;
      try {
        ps = strategy(inst.pose);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoKeypointsAvailable) throw;
      }
      if (mode.kind != BoxModeKind::None) ps.box = ablation_box(mode, inst.gt);
      if (!ps.has_positive() && !ps.box) {
        err << "instance " << inst.instance_id << ": no keypoints available, skipped\n";
        skipped.push_back(inst.instance_id);
        continue;
      }
      if (o.negative != "none" && static_cast<int>(ps.points.size()) < kMaxPromptPoints) {
        try {
          if (o.negative == "closest") {
            std::vector<Pose> others;
            for (const auto& p : by_image[inst.image_id]) {
              if (p.instance_id != inst.instance_id) others.push_back(p);
            }
            ps.points.push_back(negative_closest(inst.pose, others, ps));
          } else {
            ps.points.push_back(negative_least_visible(inst.pose, field));
          }
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoCandidates && e.code() != ErrorCode::NoKeypointsAvailable) throw;
        }
      }
      prompts.push_back(prompt_json(inst.image_id, inst.instance_id, ps));
    }
    json doc = {{"strategy", o.strategy},
                {"n", n},
                {"score_field", o.score_field},
                {"negative", o.negative},
                {"bbox_mode", o.bbox_mode},
                {"prompts", prompts},
                {"skipped", skipped}};
    if (o.strategy == "max_spread") doc["min_score"] = o.min_score;
    const fs::path file = dir / (sweep ? "prompts_n" + std::to_string(n) + ".json" : "prompts.json");
    write_json(file, doc);
    out << "wrote " << prompts.size() << " prompt sets to " << file.string() << "\n";
  }
  return kOk;
}

// ---- simulate -------------------------------------------------------------

BinaryMask paste(const BinaryMask& crop, const PixelWindow& win, MaskDims full) {
  MaskArray a = MaskArray::Zero(full.height, full.width);
  a.block(win.row0, win.col0, win.rows, win.cols) = crop.array();
  return BinaryMask(a);
}

int cmd_simulate(const SimulateOptions& o, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  SamplerConfig sc;
  sc.kind = sampler_kind_from_string(o.sampler);
  sc.total_points = o.n;
  sc.p_gt_sample = o.p_gt;
  sc.score_field = score_field_from_string(o.score_field);
  sc.seed = o.seed;
  validate(sc);
  OracleConfig oc;
  oc.corruption_erode = o.erode;
  oc.corruption_dilate = o.dilate;
  oc.drop_component_prob = o.drop_prob;
  oc.repair_radius = o.repair_radius;
  oc.seed = o.seed;
  validate(oc);
  if (o.crop_factor != 0.0 && o.crop_factor < 1.0) {
    throw Error(ErrorCode::InvalidArgument, "--crop-factor must be >= 1");
  }

  const GtDataset gt = load_gt(o.gt_path);
  std::map<std::int64_t, std::int64_t> category;
  for (const auto& g : gt.instances) category[g.instance_id] = g.category_id;
  std::vector<SimInstance> instances = sim_instances(gt);
  std::vector<std::optional<PixelWindow>> windows(instances.size());
  if (o.crop_factor >= 1.0) {
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const MaskDims full = instances[i].gt.dims();
      const CroppedInstance c = crop_instance(instances[i], o.crop_factor);
      windows[i] = pixel_window(c.window, full);
      instances[i] = c.instance;
    }
  }

  SegmenterFactory factory;
  if (o.endpoint.empty()) {
    factory = [&] { return std::make_unique<OracleSegmenter>(oc, instances); };
  } else {
    const auto timeout = std::chrono::milliseconds(o.timeout_ms);
    factory = [&o, timeout] { return std::make_unique<ExternalSegmenter>(open_endpoint(o.endpoint), timeout); };
  }
  const int workers = o.workers > 0 ? o.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto runs = run_batch(sc, instances, factory, workers, o.retries);

  std::vector<IterationTrace> traces;
  std::vector<DetInstance> dets;
  int failed = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!runs[i].outcome) {
      ++failed;
      continue;
    }
    const auto& outcome = *runs[i].outcome;
    traces.push_back(outcome.trace);
    const MaskDims full = gt.image(instances[i].image_id).dims;
    const BinaryMask mask = windows[i] ? paste(outcome.final_mask, *windows[i], full) : outcome.final_mask;
    dets.push_back({instances[i].image_id, category[instances[i].instance_id], rle_encode(mask),
                    std::clamp(outcome.final_confidence, 0.0, 1.0)});
  }

  const fs::path dir = prepare_out_dir(o.out);
  snapshot_config(sub, dir);
  write_trace_report(traces, dir / "traces.csv");
  write_results(dets, dir / "results.json");
  const auto mean = mean_trace(traces, sc.total_points);
  std::ostringstream mean_csv;
  mean_csv << "step,mean_iou\n" << std::fixed << std::setprecision(6);
  for (std::size_t k = 0; k < mean.size(); ++k) mean_csv << k + 1 << "," << mean[k] << "\n";
  write_file(dir / "mean_trace.csv", mean_csv.str());

  out << "simulated " << traces.size() << " of " << instances.size() << " instances\n";
  out << "mean IoU per step:";
  for (double v : mean) out << " " << std::fixed << std::setprecision(4) << v;
  out << "\n";
  if (failed > 0) {
    err << failed << " instance(s) aborted\n";
    bool wire = false;
    for (const auto& r : runs) wire = wire || (r.error_code && exit_code_for(*r.error_code) == kWireError);
    return wire ? kWireError : kDataError;
  }
  return kOk;
}

// ---- evaluate -------------------------------------------------------------

int cmd_evaluate(const EvaluateOptions& o, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  EvalParams params;
  params.exclude_small = o.exclude_small;
  params.max_dets = o.max_dets;
  validate(params);
  const GtDataset gt = load_gt(o.gt_path);
  const auto dets = load_dets(o.dets_path);
  if (dets.empty()) err << "warning: no detections in " << o.dets_path << "\n";
  const EvalResult result = evaluate(gt, dets, params);
  json report = report_json(result, params);
  report["ap_per_threshold"] = result.ap_per_threshold;
  report["exclude_small"] = o.exclude_small;
  out << report.dump(2) << "\n";
  if (!o.out.empty()) {
    const fs::path dir = prepare_out_dir(o.out);
    snapshot_config(sub, dir);
    write_json(dir / "report.json", report);
  }
  return kOk;
}

// ---- inflate-bbox ---------------------------------------------------------

json inflate_json(const BBox& tight, double factor, std::optional<MaskDims> dims) {
  const BBox unclamped = inflate_bbox_unclamped(tight, factor);
  json j = {{"bbox", box_json(tight)},
            {"inflated", box_json(unclamped)},
            {"area_ratio", unclamped.area() / tight.area()}};
  if (dims) j["clamped"] = box_json(inflate_bbox(tight, factor, *dims));
  return j;
}

int cmd_inflate(const InflateOptions& o, const CLI::App& sub, std::ostream& out, std::ostream&) {
  if (o.box.empty() == o.gt_path.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give exactly one of --box or --gt");
  }
  json result;
  if (!o.box.empty()) {
    const BBox b{o.box[0], o.box[1], o.box[2], o.box[3]};
    validate(b);
    std::optional<MaskDims> dims;
    if (!o.image_size.empty()) dims = MaskDims(o.image_size[0], o.image_size[1]);
    result = inflate_json(b, o.inflate_factor, dims);
  } else {
    const GtDataset gt = load_gt(o.gt_path);
    result = json::array();
    for (const auto& inst : gt.instances) {
      json j = inflate_json(bbox_of_mask(inst.mask()), o.inflate_factor, inst.dims);
      j["image_id"] = inst.image_id;
      j["instance_id"] = inst.instance_id;
      result.push_back(j);
    }
  }
  out << result.dump(2) << "\n";
  if (!o.out.empty()) {
    const fs::path dir = prepare_out_dir(o.out);
    snapshot_config(sub, dir);
    write_json(dir / "boxes.json", result);
  }
  return kOk;
}

// ---- crop -----------------------------------------------------------------

json keypoints_json(const Pose& pose, const std::optional<Pose>& source) {
  json triplets = json::array();
  json vis = json::array();
  bool any_vis = false;
  for (int k = 0; k < kNumKeypoints; ++k) {
    const auto& slot = pose.keypoints[static_cast<std::size_t>(k)];
    if (!slot) {
      triplets.insert(triplets.end(), {0, 0, 0});
      vis.push_back(0.0);
      continue;
    }
    triplets.insert(triplets.end(), {slot->position.x(), slot->position.y(), slot->gt_flag.value_or(2)});
    vis.push_back(slot->visibility.value_or(0.0));
    any_vis = any_vis || slot->visibility.has_value();
  }
  json j = {{"keypoints", triplets}};
  if (any_vis && source) j["visibility"] = vis;
  return j;
}

int cmd_crop(const CropOptions& o, const CLI::App& sub, std::ostream& out, std::ostream&) {
  if (!(o.crop_factor >= 1.0)) throw Error(ErrorCode::InvalidArgument, "--crop-factor must be >= 1");
  const GtDataset gt = load_gt(o.gt_path);
  json images = json::array();
  json anns = json::array();
  for (const auto& g : gt.instances) {
    if (g.iscrowd) continue;
    SimInstance inst{g.image_id, g.instance_id, g.mask(), g.pose.value_or(Pose{})};
    if (inst.gt.empty()) continue;
    const CroppedInstance c = crop_instance(inst, o.crop_factor);
    const PixelWindow win = pixel_window(c.window, g.dims);
    const Rle rle = rle_encode(c.instance.gt);
    images.push_back({{"id", g.instance_id},
                      {"height", win.rows},
                      {"width", win.cols},
                      {"source_image_id", g.image_id},
                      {"window", box_json(c.window)},
                      {"offset", {win.col0, win.row0}}});
    json ann = {{"id", g.instance_id},
                {"image_id", g.instance_id},
                {"category_id", g.category_id},
                {"iscrowd", 0},
                {"area", static_cast<double>(rle.area())},
                {"bbox", box_json(bbox_of_mask(c.instance.gt))},
                {"segmentation", {{"size", {win.rows, win.cols}}, {"counts", rle_compress(rle)}}}};
    if (g.pose) ann.update(keypoints_json(c.instance.pose, g.pose));
    anns.push_back(ann);
  }
  json cats = json::array();
  for (auto id : gt.category_ids) cats.push_back({{"id", id}});
  const fs::path dir = prepare_out_dir(o.out);
  snapshot_config(sub, dir);
  write_json(dir / "crops.json", {{"images", images}, {"annotations", anns}, {"categories", cats}});
  out << "wrote " << anns.size() << " crops to " << (dir / "crops.json").string() << "\n";
  return kOk;
}

// ---- serve-oracle ---------------------------------------------------------

int cmd_serve(const ServeOptions& o, std::ostream& err) {
  OracleConfig oc;
  oc.corruption_erode = o.erode;
  oc.corruption_dilate = o.dilate;
  oc.drop_component_prob = o.drop_prob;
  oc.repair_radius = o.repair_radius;
  oc.seed = o.seed;
  validate(oc);
  const auto instances = sim_instances(load_gt(o.gt_path));
  OracleSegmenter oracle(oc, instances);
  const RequestHandler handler = [&](const SegmenterRequest& req) { return oracle.segment(req); };
  if (o.port < 0) {
    serve_segmenter_stdio(handler);
    return kOk;
  }
  TcpListener listener(o.port);
  err << "listening on 127.0.0.1:" << listener.port() << "\n" << std::flush;
  for (;;) {
    auto channel = listener.accept();
    std::thread([ch = std::move(channel), handler]() mutable { serve_segmenter(*ch, handler); }).detach();
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pose-guided prompting toolkit: prompt selection, refinement simulation and COCO mask AP"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.set_config("--config", "", "JSON config file; flags override its values");

  const auto existing = CLI::ExistingFile;

  SelectOptions sel;
  auto* select = app.add_subcommand("select", "Select keypoint prompts for every instance");
  select->add_option("--gt", sel.gt_path, "COCO GT file (poses and masks)")->check(existing);
  select->add_option("--poses", sel.poses_path, "Detected poses (results array or COCO file)")->check(existing);
  select->add_option("--strategy", sel.strategy, "max_vis or max_spread")
      ->check(CLI::IsMember({"max_vis", "max_spread"}))
      ->capture_default_str();
  select->add_option("--n", sel.n, "Keypoints per instance; several values run a sweep")
      ->delimiter(',')
      ->capture_default_str();
  select->add_option("--score-field", sel.score_field, "visibility, presence_prob, expected_oks or gt_flag")
      ->capture_default_str();
  select->add_option("--min-score", sel.min_score, "Low-visibility cut-off for max_spread")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  select->add_option("--negative", sel.negative, "none, closest or least_visible")->capture_default_str();
  select->add_option("--bbox-mode", sel.bbox_mode, "none, gt_box or inflated_gt_box")->capture_default_str();
  select->add_option("--inflate-factor", sel.inflate_factor, "Per-side inflation for inflated_gt_box")
      ->capture_default_str();
  select->add_option("--out", sel.out, "Output directory")->capture_default_str();

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run the iterative refinement loop and record IoU traces");
  simulate->add_option("--gt", sim.gt_path, "COCO GT file")->required()->check(existing);
  simulate->add_option("--sampler", sim.sampler, "mask_refine, pose1_mask_refine or pose_mask_refine")
      ->capture_default_str();
  simulate->add_option("--n", sim.n, "Points per sequence")->check(CLI::Range(1, kMaxPromptPoints))->capture_default_str();
  simulate->add_option("--p-gt", sim.p_gt, "Probability of sampling from the GT mask")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  simulate->add_option("--score-field", sim.score_field, "Keypoint score used by pose samplers")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Run seed")->capture_default_str();
  simulate->add_option("--erode", sim.erode, "Oracle corruption erosion radius")->capture_default_str();
  simulate->add_option("--dilate", sim.dilate, "Oracle corruption dilation radius")->capture_default_str();
  simulate->add_option("--drop-prob", sim.drop_prob, "Oracle component drop probability")->capture_default_str();
  simulate->add_option("--repair-radius", sim.repair_radius, "Oracle repair radius")->capture_default_str();
  simulate->add_option("--crop-factor", sim.crop_factor, "Crop each instance to its GT box scaled by this (0 = off)")
      ->capture_default_str();
  simulate->add_option("--endpoint", sim.endpoint, "External segmenter: tcp://host:port or exec:<command>");
  simulate->add_option("--workers", sim.workers, "Worker threads (0 = logical cores)")->capture_default_str();
  simulate->add_option("--timeout-ms", sim.timeout_ms, "Per-request timeout for external segmenters")
      ->capture_default_str();
  simulate->add_option("--retries", sim.retries, "Reconnect attempts after a transport failure")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();

  EvaluateOptions ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "COCO mask AP of a results file");
  evaluate_cmd->add_option("--gt", ev.gt_path, "COCO GT file")->required()->check(existing);
  evaluate_cmd->add_option("--dets", ev.dets_path, "COCO results file")->required()->check(existing);
  evaluate_cmd->add_flag("--exclude-small", ev.exclude_small, "Ignore small GT (COCO*)");
  evaluate_cmd->add_option("--max-dets", ev.max_dets, "Detections per image")->capture_default_str();
  evaluate_cmd->add_option("--out", ev.out, "Output directory for report.json");

  InflateOptions inf;
  auto* inflate = app.add_subcommand("inflate-bbox", "Inflate a box, or every GT box, per side");
  inflate->add_option("--box", inf.box, "x y w h")->expected(4);
  inflate->add_option("--image-size", inf.image_size, "height width, to clamp --box")->expected(2);
  inflate->add_option("--gt", inf.gt_path, "COCO GT file")->check(existing);
  inflate->add_option("--inflate-factor", inf.inflate_factor, "Per-side factor; 0.5 quadruples the area")
      ->capture_default_str();
  inflate->add_option("--out", inf.out, "Output directory for boxes.json");

  CropOptions cr;
  auto* crop = app.add_subcommand("crop", "Crop every GT instance to its scaled box");
  crop->add_option("--gt", cr.gt_path, "COCO GT file")->required()->check(existing);
  crop->add_option("--crop-factor", cr.crop_factor, "Scale of the box side lengths")->capture_default_str();
  crop->add_option("--out", cr.out, "Output directory")->capture_default_str();

  ServeOptions sv;
  auto* serve = app.add_subcommand("serve-oracle", "Serve the GT oracle over the segmenter wire protocol");
  serve->add_option("--gt", sv.gt_path, "COCO GT file")->required()->check(existing);
  serve->add_option("--erode", sv.erode)->capture_default_str();
  serve->add_option("--dilate", sv.dilate)->capture_default_str();
  serve->add_option("--drop-prob", sv.drop_prob)->capture_default_str();
  serve->add_option("--repair-radius", sv.repair_radius)->capture_default_str();
  serve->add_option("--seed", sv.seed)->capture_default_str();
  serve->add_option("--port", sv.port, "TCP port (0 = any); stdio when omitted");

  // --config belongs to the top-level app but is accepted anywhere.
  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  for (std::size_t i = args.size(); i-- > 0;) {
    const bool split = args[i] == "--config" && i > 0;
    if (split || args[i].rfind("--config=", 0) == 0) {
      const std::string value = split ? args[i - 1] : args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(split ? i - 1 : i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 1));
      args.push_back(value);
      args.push_back("--config");
      break;
    }
  }

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  try {
    if (select->parsed()) return cmd_select(sel, *select, out, err);
    if (simulate->parsed()) return cmd_simulate(sim, *simulate, out, err);
    if (evaluate_cmd->parsed()) return cmd_evaluate(ev, *evaluate_cmd, out, err);
    if (inflate->parsed()) return cmd_inflate(inf, *inflate, out, err);
    if (crop->parsed()) return cmd_crop(cr, *crop, out, err);
    if (serve->parsed()) return cmd_serve(sv, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kConfigError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("poseprompt-cli");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace poseprompt::cli
