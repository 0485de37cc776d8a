// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails or exceeds its time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "poseprompt/ablation.hpp"
#include "poseprompt/coco_io.hpp"
#include "poseprompt/error.hpp"
#include "poseprompt/evaluator.hpp"
#include "poseprompt/refine_loop.hpp"
#include "poseprompt/wire.hpp"
#include "test_util.hpp"

using namespace poseprompt;
using namespace std::chrono_literals;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::vector<SimInstance> sim_suite() {
  return sim_instances(load_gt(testing::fixture_path("sim_suite_gt.json")));
}

// 1. RLE round trip and byte-identical compressed strings.
Outcome rle_round_trip() {
  Outcome o;
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<Index> dim(1, 128);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Index h = dim(gen), w = dim(gen);
    BinaryMask m = testing::random_mask(gen, h, w, density(gen));
    if (i % 2 == 0) {
      // Blocky masks give long runs and multi-char varints.
      MaskArray a = MaskArray::Zero(h, w);
      std::uniform_int_distribution<Index> r(0, h - 1), c(0, w - 1);
      for (int k = 0; k < 4; ++k) {
        const Index r0 = r(gen), c0 = c(gen);
        const Index r1 = std::min(h, r0 + r(gen) + 1), c1 = std::min(w, c0 + c(gen) + 1);
        a.block(r0, c0, r1 - r0, c1 - c0).setOnes();
      }
      m = BinaryMask(a);
    }
    const Rle rle = rle_encode(m);
    if (!(rle_decode(rle_decompress(rle_compress(rle), m.dims())) == m)) {
      o.fail("round trip differs for mask " + std::to_string(i));
    }
  }
  const auto corpus = testing::load_fixture("rle_corpus.json");
  if (corpus.size() < 100) o.fail("reference corpus has fewer than 100 masks");
  for (const auto& c : corpus) {
    const Index h = c["h"], w = c["w"];
    const BinaryMask m = testing::mask_from_hex(c["bits"], h, w);
    if (rle_compress(rle_encode(m)) != c["compressed"].get<std::string>()) {
      o.fail("compressed string differs for " + c["name"].get<std::string>());
    }
  }
  if (o.pass) o.detail = "1000 random masks, " + std::to_string(corpus.size()) + " reference strings";
  return o;
}

// 2. Evaluator against the reference COCO evaluator.
Outcome evaluator_equivalence() {
  Outcome o;
  const auto expected = testing::load_fixture("eval_expected.json");
  const auto check = [&](const std::string& name, const EvalResult& r, const nlohmann::json& e, bool small) {
    const std::vector<std::pair<std::string, double>> got = {
        {"ap", r.ap}, {"ap50", r.ap50}, {"ap75", r.ap75}, {"ar", r.ar},
        {"ap_small", r.ap_small}, {"ap_medium", r.ap_medium}, {"ap_large", r.ap_large}};
    for (const auto& [key, v] : got) {
      if (key == "ap_small" && !small) continue;
      if (std::abs(v - e[key].get<double>()) > 1e-6) {
        o.fail(name + " " + key + " = " + std::to_string(v) + ", reference " + std::to_string(e[key].get<double>()));
      }
    }
  };
  const GtDataset gt = load_gt(testing::fixture_path("eval_gt.json"));
  const auto dets = load_dets(testing::fixture_path("eval_dets.json"));
  check("coco", evaluate(gt, dets), expected["coco"], true);
  EvalParams star;
  star.exclude_small = true;
  check("coco*", evaluate(gt, dets, star), expected["coco_star"], false);

  const GtDataset single_gt = load_gt(testing::fixture_path("eval_single_gt.json"));
  const auto single_dets = load_dets(testing::fixture_path("eval_single_dets.json"));
  const EvalResult single = evaluate(single_gt, single_dets);
  check("single", single, expected["single"], true);
  if (std::abs(single.ap - 0.2) > 1e-6) o.fail("single-detection AP " + std::to_string(single.ap));
  if (o.pass) {
    o.detail = std::to_string(dets.size()) + " detections, COCO and COCO* slices, single IoU-0.55 AP = " +
               std::to_string(single.ap);
  }
  return o;
}

double min_dist(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& chosen) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& c : chosen) d = std::min(d, (p - c).norm());
  return d;
}

// 3. Selection properties on random poses.
Outcome selection_properties() {
  Outcome o;
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> pick_n(1, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  long violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Pose pose = testing::random_pose(gen, 200.0, 0.8);
    const int n = pick_n(gen);
    const double min_score = 0.5 * unit(gen);
    std::vector<IndexedKeypoint> all = available_keypoints(pose, ScoreField::Visibility, 0.0);
    if (all.empty()) continue;

    // max_vis: brute-force top-n with index tie-break, non-increasing scores.
    const PromptSet mv = max_vis(pose, n);
    std::vector<IndexedKeypoint> sorted = all;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const IndexedKeypoint& a, const IndexedKeypoint& b) { return a.score > b.score; });
    const std::size_t expect_n = std::min<std::size_t>(static_cast<std::size_t>(n), sorted.size());
    if (mv.points.size() != expect_n) ++violations;
    for (std::size_t k = 0; k < std::min(expect_n, mv.points.size()); ++k) {
      if (mv.points[k].keypoint_index != sorted[k].index) ++violations;
    }

    // max_spread: farthest-point optimality at every step, face dedup.
    const auto eligible = available_keypoints(pose, ScoreField::Visibility, min_score);
    if (!eligible.empty()) {
      const PromptSet ms = max_spread(pose, n, ScoreField::Visibility, min_score);
      std::vector<Eigen::Vector2d> chosen;
      std::vector<int> chosen_idx;
      int faces = 0;
      for (std::size_t k = 0; k < ms.points.size(); ++k) {
        const auto& p = ms.points[k];
        const auto it = std::find_if(eligible.begin(), eligible.end(),
                                     [&](const IndexedKeypoint& e) { return e.index == p.keypoint_index; });
        if (it == eligible.end()) {
          ++violations;
          continue;
        }
        if (k == 0) {
          for (const auto& e : eligible) {
            if (e.score > it->score) ++violations;
          }
        } else {
          const double d = min_dist(p.position, chosen);
          for (const auto& e : eligible) {
            const bool used = std::find(chosen_idx.begin(), chosen_idx.end(), e.index) != chosen_idx.end();
            const bool blocked = faces > 0 && is_face_keypoint(e.index);
            if (!used && !blocked && min_dist(e.keypoint.position, chosen) > d) ++violations;
          }
        }
        faces += is_face_keypoint(p.keypoint_index) ? 1 : 0;
        chosen.push_back(p.position);
        chosen_idx.push_back(p.keypoint_index);
      }
      if (faces > 1) ++violations;
      // Stops only when no eligible candidate remains.
      if (static_cast<int>(ms.points.size()) < n) {
        for (const auto& e : eligible) {
          const bool used = std::find(chosen_idx.begin(), chosen_idx.end(), e.index) != chosen_idx.end();
          if (!used && !(faces > 0 && is_face_keypoint(e.index))) ++violations;
        }
      }

      // Argmax invariance under positive scaling (threshold scaled alike).
      const double scale = 0.1 + 0.9 * unit(gen);
      Pose scaled = pose;
      for (auto& slot : scaled.keypoints) {
        if (slot) slot->visibility = *slot->visibility * scale;
      }
      if (!(max_vis(scaled, n).points == mv.points)) ++violations;
      if (!(max_spread(scaled, n, ScoreField::Visibility, min_score * scale).points == ms.points)) ++violations;
    }

    // Threshold monotonicity.
    const double hi = min_score + (1.0 - min_score) * unit(gen);
    const auto lo_set = available_keypoints(pose, ScoreField::Visibility, min_score);
    const auto hi_set = available_keypoints(pose, ScoreField::Visibility, hi);
    if (hi_set.size() > lo_set.size()) ++violations;
    for (const auto& k : hi_set) {
      if (std::none_of(lo_set.begin(), lo_set.end(), [&](const IndexedKeypoint& x) { return x.index == k.index; })) {
        ++violations;
      }
    }
  }
  if (violations > 0) o.fail(std::to_string(violations) + " violations");
  else o.detail = "10000 random poses, 0 violations";
  return o;
}

bool inside(const BinaryMask& m, const PromptPoint& p) {
  const auto [r, c] = point_pixel(p);
  return m.contains(r, c) && m(r, c);
}

std::uint64_t hash_points(const std::vector<PromptPoint>& pts, std::uint64_t h) {
  for (const auto& p : pts) {
    for (double v : {p.position.x(), p.position.y()}) h = CounterRng::mix(h ^ std::bit_cast<std::uint64_t>(v));
    h = CounterRng::mix(h ^ (static_cast<std::uint64_t>(p.label) << 8 | static_cast<std::uint64_t>(p.source)));
  }
  return h;
}

// 4. Sampler properties on seeded sequences.
Outcome sampler_properties() {
  Outcome o;
  long violations = 0;
  std::uint64_t run_hash[2] = {0, 0};
  for (int pass = 0; pass < 2; ++pass) {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int seq = 0; seq < 10000; ++seq) {
      const Index h = 24, w = 20;
      BinaryMask gt = testing::random_mask(gen, h, w, 0.05);
      gt = mask_union(gt, [&] {
        BinaryMask b = BinaryMask::zeros({h, w});
        for (Index r = 4; r < 20; ++r) {
          for (Index c = 5; c < 15; ++c) b.set(r, c, true);
        }
        return b;
      }());
      std::vector<BinaryMask> preds;
      for (int k = 0; k < 7; ++k) preds.push_back(testing::random_mask(gen, h, w, 0.1 + 0.5 * unit(gen)));
      Pose pose = testing::random_pose(gen, 20.0, 0.6);
      pose.image_id = seq / 100;
      pose.instance_id = seq;

      SamplerConfig cfg;
      cfg.seed = static_cast<std::uint64_t>(seq % 17);
      cfg.p_gt_sample = (seq % 3) * 0.1;
      const SamplerKind kinds[] = {SamplerKind::MaskRefine, SamplerKind::Pose1MaskRefine, SamplerKind::PoseMaskRefine};
      std::vector<PromptPoint> by_kind[3];
      for (int k = 0; k < 3; ++k) {
        cfg.kind = kinds[k];
        std::vector<SampleBranch> branches;
        by_kind[k] = sample_sequence(cfg, gt, preds, pose, &branches);
        const auto& pts = by_kind[k];
        if (pts.size() != 8) ++violations;
        for (std::size_t s = 1; s < pts.size(); ++s) {
          const BinaryMask err = error_region(gt, preds[s - 1]);
          const bool in_gt = inside(gt, pts[s]);
          if (!in_gt && !inside(err, pts[s])) ++violations;
          if (branches[s] == SampleBranch::GtMask) {
            if (pts[s].label != PointLabel::Positive) ++violations;
          } else if (pts[s].label != (in_gt ? PointLabel::Positive : PointLabel::Negative)) {
            ++violations;
          }
        }
        run_hash[pass] = hash_points(pts, run_hash[pass]);
      }
      if (!std::equal(by_kind[0].begin() + 1, by_kind[0].end(), by_kind[1].begin() + 1)) ++violations;
    }
  }
  if (run_hash[0] != run_hash[1]) o.fail("replay differs between runs");
  if (violations > 0) o.fail(std::to_string(violations) + " violations");
  if (o.pass) o.detail = "2 x 10000 seeds x 3 samplers, 0 violations, identical replay";
  return o;
}

// 5. Simulation monotonicity and golden traces.
Outcome simulation_monotonicity() {
  Outcome o;
  const auto instances = sim_suite();
  const SamplerConfig sc;
  OracleSegmenter oracle(OracleConfig{}, instances);
  std::vector<IterationTrace> traces;
  for (const auto& inst : instances) traces.push_back(run_refine_loop(sc, oracle, inst).trace);
  for (const auto& t : traces) {
    for (std::size_t k = 1; k < t.ious.size(); ++k) {
      if (t.ious[k] < t.ious[k - 1]) o.fail("trace " + std::to_string(t.instance_id) + " decreases");
    }
  }
  const auto mean = mean_trace(traces, sc.total_points);
  std::ostringstream shape;
  shape.precision(3);
  shape << std::fixed;
  for (double v : mean) shape << v << " ";
  if (!(mean.back() > mean.front())) o.fail("no mean gain: " + shape.str());
  for (std::size_t k = 2; k < mean.size(); ++k) {
    const double prev = mean[k - 1] - mean[k - 2], gain = mean[k] - mean[k - 1];
    if (gain > prev) o.fail("gain rises at step " + std::to_string(k + 1) + ": " + shape.str());
  }
  if (trace_report_csv(traces) != read_file(testing::fixture_path("golden_traces.csv"))) {
    o.fail("golden CSV differs");
  }
  if (o.pass) o.detail = "mean IoU " + shape.str() + "(" + std::to_string(traces.size()) + " instances)";
  return o;
}

// 6. Box inflation and crop arithmetic.
Outcome bbox_arithmetic() {
  Outcome o;
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> pos(-50.0, 500.0), size(0.5, 300.0);
  for (int i = 0; i < 1000; ++i) {
    const BBox b{pos(gen), pos(gen), size(gen), size(gen)};
    const BBox inflated = inflate_bbox_unclamped(b, 0.5);
    if (inflated.area() != 4.0 * b.area()) o.fail("area ratio " + std::to_string(inflated.area() / b.area()));
    if (std::abs(inflated.x + inflated.w / 2 - (b.x + b.w / 2)) > 1e-9) o.fail("centre moved");
  }
  if (per_side_factor(1.5) != 0.25) o.fail("crop factor 1.5 is not 0.25 per side");
  for (const auto& inst : sim_suite()) {
    const auto cropped = crop_instance(inst, 1.5);
    const BBox tight = bbox_of_mask(inst.gt);
    const BBox expect = inflate_bbox(tight, 0.25, inst.gt.dims());
    if (!(cropped.window == expect)) o.fail("crop window differs for " + std::to_string(inst.instance_id));
    if (cropped.instance.gt.count() != inst.gt.count()) o.fail("crop cuts the mask of " + std::to_string(inst.instance_id));
    const BBox unclamped = inflate_bbox_unclamped(tight, 0.25);
    if (std::abs(unclamped.w - 1.5 * tight.w) > 1e-9 || std::abs(unclamped.h - 1.5 * tight.h) > 1e-9) {
      o.fail("crop side lengths are not 1.5x");
    }
  }
  if (o.pass) o.detail = "1000 random boxes at exactly 4.0x, 20 fixture crops at 1.5x";
  return o;
}

// 7. Loopback wire protocol equals the in-process oracle.
Outcome wire_equivalence() {
  Outcome o;
  const auto instances = sim_suite();
  const SamplerConfig sc;
  OracleSegmenter local(OracleConfig{}, instances);
  std::vector<std::vector<double>> expected;
  for (const auto& inst : instances) expected.push_back(run_refine_loop(sc, local, inst).trace.ious);

  // Socket pair.
  {
    auto [client, server] = channel_pair();
    std::thread t([s = std::move(server), &instances]() mutable {
      OracleSegmenter remote(OracleConfig{}, instances);
      serve_segmenter(*s, [&](const SegmenterRequest& r) { return remote.segment(r); });
    });
    {
      ExternalSegmenter ext(std::move(client), 5s);
      for (std::size_t i = 0; i < instances.size(); ++i) {
        if (run_refine_loop(sc, ext, instances[i]).trace.ious != expected[i]) o.fail("socketpair trace differs");
      }
    }
    t.join();
  }
  // TCP, one connection per worker.
  {
    TcpListener listener(0);
    const int workers = 2;
    std::vector<std::thread> servers;
    for (int w = 0; w < workers; ++w) {
      servers.emplace_back([&] {
        auto ch = listener.accept();
        OracleSegmenter remote(OracleConfig{}, instances);
        serve_segmenter(*ch, [&](const SegmenterRequest& r) { return remote.segment(r); });
      });
    }
    const std::string endpoint = "tcp://127.0.0.1:" + std::to_string(listener.port());
    {
      const auto runs = run_batch(sc, instances,
                                  [&] { return std::make_unique<ExternalSegmenter>(open_endpoint(endpoint), 5s); },
                                  workers, 0);
      for (std::size_t i = 0; i < runs.size(); ++i) {
        if (!runs[i].outcome || runs[i].outcome->trace.ious != expected[i]) o.fail("tcp trace differs");
      }
    }
    for (auto& t : servers) t.join();
  }
  // A malformed frame aborts one instance only.
  {
    auto [client, server] = channel_pair();
    const std::int64_t victim = instances[4].instance_id;
    std::thread t([s = std::move(server), &instances, victim]() mutable {
      OracleSegmenter remote(OracleConfig{}, instances);
      bool corrupted = false;
      for (;;) {
        std::string line;
        try {
          line = s->read_line(10s);
        } catch (const Error&) {
          return;
        }
        const SegmenterRequest req = request_from_json(nlohmann::json::parse(line));
        if (req.instance_id == victim && !corrupted) {
          corrupted = true;
          s->write_line("{\"id\": \"" + wire_id(req.image_id, req.instance_id) + "\", \"rle\": \"!!\"");
          continue;
        }
        s->write_line(encode_response_line(wire_id(req.image_id, req.instance_id), remote.segment(req)));
      }
    });
    std::shared_ptr<LineChannel> shared(std::move(client));
    struct Borrowed : Segmenter {
      std::shared_ptr<LineChannel> ch;
      SegmenterResponse segment(const SegmenterRequest& r) override { return external_segment(*ch, r, 5s); }
    };
    {
      const auto runs = run_batch(sc, instances, [&] {
        auto b = std::make_unique<Borrowed>();
        b->ch = shared;
        return b;
      }, 1);
      for (std::size_t i = 0; i < runs.size(); ++i) {
        if (instances[i].instance_id == victim) {
          if (runs[i].outcome || runs[i].error_code != ErrorCode::ProtocolError) o.fail("malformed frame not reported");
        } else if (!runs[i].outcome || runs[i].outcome->trace.ious != expected[i]) {
          o.fail("instance after a malformed frame differs");
        }
      }
    }
    shared->close_write();
    t.join();
  }
  if (o.pass) o.detail = "socketpair and TCP traces identical; malformed frame isolated to one instance";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "RLE round trip", 10, rle_round_trip},
      {2, "evaluator equivalence", 5, evaluator_equivalence},
      {3, "selection properties", 30, selection_properties},
      {4, "sampler properties", 60, sampler_properties},
      {5, "simulation monotonicity", 30, simulation_monotonicity},
      {6, "bbox arithmetic", 5, bbox_arithmetic},
      {7, "wire protocol equivalence", 15, wire_equivalence},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) o.fail("took " + std::to_string(secs) + " s, budget " + std::to_string(c.budget_s) + " s");
    failures += o.pass ? 0 : 1;
    std::printf("criterion %d %-26s %s  (%.2f s) %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
