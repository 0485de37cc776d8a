#include "poseprompt/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "poseprompt/error.hpp"

namespace poseprompt {

std::vector<double> EvalParams::linspace(double start, double stop, int num) {
  std::vector<double> out(static_cast<std::size_t>(num));
  if (num == 1) {
    out[0] = start;
    return out;
  }
  const double step = (stop - start) / static_cast<double>(num - 1);
  for (int i = 0; i < num; ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(i) * step + start;
  out.back() = stop;
  return out;
}

void validate(const EvalParams& params) {
  if (params.iou_thresholds.empty()) throw Error(ErrorCode::InvalidArgument, "no IoU thresholds");
  for (std::size_t i = 0; i < params.iou_thresholds.size(); ++i) {
    const double t = params.iou_thresholds[i];
    if (!(t > 0.0 && t <= 1.0) || (i > 0 && !(t > params.iou_thresholds[i - 1]))) {
      throw Error(ErrorCode::InvalidArgument, "IoU thresholds must increase strictly within (0, 1]");
    }
  }
  if (params.max_dets < 1) throw Error(ErrorCode::InvalidArgument, "max_dets must be >= 1");
}

namespace {

struct GtEntry {
  const GtInstance* inst;
  Rle rle;
};

struct DetEntry {
  const DetInstance* det;
  double area;
};

// Per (image, category): matching outcome for one area range.
struct ImageEval {
  std::vector<double> scores;                 // sorted descending, truncated
  std::vector<std::vector<char>> matched;     // [threshold][det]
  std::vector<std::vector<char>> det_ignore;  // [threshold][det]
  long long gt_not_ignored = 0;
  std::vector<std::vector<char>> gt_matched;  // [threshold][gt], non-ignored only counted
  std::vector<char> gt_ignore;
};

ImageEval evaluate_image(const std::vector<GtEntry>& gts, const std::vector<DetEntry>& dts,
                         const std::vector<std::vector<double>>& ious,  // [det][gt], dts sorted
                         const AreaRange& range, const EvalParams& p) {
  const std::size_t T = p.iou_thresholds.size();
  ImageEval ev;

  std::vector<char> gt_ig(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    const auto* inst = gts[g].inst;
    gt_ig[g] = inst->iscrowd || inst->area < range.lo || inst->area > range.hi;
  }
  // Stable order: non-ignored GT first.
  std::vector<std::size_t> gorder(gts.size());
  std::iota(gorder.begin(), gorder.end(), 0);
  std::stable_sort(gorder.begin(), gorder.end(), [&](std::size_t a, std::size_t b) { return gt_ig[a] < gt_ig[b]; });

  const std::size_t D = std::min<std::size_t>(dts.size(), static_cast<std::size_t>(p.max_dets));
  ev.matched.assign(T, std::vector<char>(D, 0));
  ev.det_ignore.assign(T, std::vector<char>(D, 0));
  ev.gt_matched.assign(T, std::vector<char>(gts.size(), 0));
  ev.gt_ignore.resize(gts.size());
  for (std::size_t k = 0; k < gts.size(); ++k) ev.gt_ignore[k] = gt_ig[gorder[k]];
  ev.gt_not_ignored = std::count(ev.gt_ignore.begin(), ev.gt_ignore.end(), 0);
  for (std::size_t d = 0; d < D; ++d) ev.scores.push_back(dts[d].det->score);

  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t d = 0; d < D; ++d) {
      double best = std::min(p.iou_thresholds[t], 1.0 - 1e-10);
      std::ptrdiff_t m = -1;
      for (std::size_t k = 0; k < gorder.size(); ++k) {
        const std::size_t g = gorder[k];
        if (ev.gt_matched[t][k] && !gts[g].inst->iscrowd) continue;
        if (m > -1 && !ev.gt_ignore[static_cast<std::size_t>(m)] && ev.gt_ignore[k]) break;
        if (ious[d][g] < best) continue;
        best = ious[d][g];
        m = static_cast<std::ptrdiff_t>(k);
      }
      if (m == -1) continue;
      ev.det_ignore[t][d] = ev.gt_ignore[static_cast<std::size_t>(m)];
      ev.matched[t][d] = 1;
      ev.gt_matched[t][static_cast<std::size_t>(m)] = 1;
    }
  }
  for (std::size_t d = 0; d < D; ++d) {
    const bool outside = dts[d].area < range.lo || dts[d].area > range.hi;
    if (!outside) continue;
    for (std::size_t t = 0; t < T; ++t) {
      if (!ev.matched[t][d]) ev.det_ignore[t][d] = 1;
    }
  }
  return ev;
}

struct Accumulated {
  // [threshold][category] -> precision over recall points, or empty if no GT
  std::vector<std::vector<std::vector<double>>> precision;
  std::vector<std::vector<double>> recall;  // [threshold][category], -1 when no GT
};

Accumulated accumulate(const std::vector<std::vector<const ImageEval*>>& per_cat, const EvalParams& p) {
  const std::size_t T = p.iou_thresholds.size();
  const std::size_t R = p.recall_points.size();
  Accumulated acc;
  acc.precision.assign(T, std::vector<std::vector<double>>(per_cat.size()));
  acc.recall.assign(T, std::vector<double>(per_cat.size(), -1.0));

  for (std::size_t k = 0; k < per_cat.size(); ++k) {
    const auto& evs = per_cat[k];
    std::vector<double> scores;
    std::vector<std::pair<std::size_t, std::size_t>> where;  // (eval, det)
    long long npig = 0;
    for (std::size_t e = 0; e < evs.size(); ++e) {
      for (std::size_t d = 0; d < evs[e]->scores.size(); ++d) {
        scores.push_back(evs[e]->scores[d]);
        where.emplace_back(e, d);
      }
      npig += evs[e]->gt_not_ignored;
    }
    if (npig == 0) continue;
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    for (std::size_t t = 0; t < T; ++t) {
      std::vector<double> rc, pr;
      double tp = 0, fp = 0;
      for (const auto i : order) {
        const auto [e, d] = where[i];
        // Ignored detections stay in the cumulative arrays without adding to
        // either sum, as in the reference accumulation.
        if (!evs[e]->det_ignore[t][d]) {
          (evs[e]->matched[t][d] ? tp : fp) += 1;
        }
        rc.push_back(tp / static_cast<double>(npig));
        pr.push_back(tp / (fp + tp + std::numeric_limits<double>::epsilon()));
      }
      acc.recall[t][k] = rc.empty() ? 0.0 : rc.back();
      for (std::size_t i = pr.size(); i-- > 1;) {
        if (pr[i] > pr[i - 1]) pr[i - 1] = pr[i];
      }
      std::vector<double> q(R, 0.0);
      for (std::size_t r = 0; r < R; ++r) {
        const auto pos = std::lower_bound(rc.begin(), rc.end(), p.recall_points[r]) - rc.begin();
        if (static_cast<std::size_t>(pos) < pr.size()) q[r] = pr[static_cast<std::size_t>(pos)];
      }
      acc.precision[t][k] = std::move(q);
    }
  }
  return acc;
}

double mean_precision(const Accumulated& acc, std::ptrdiff_t threshold) {
  double sum = 0;
  long long n = 0;
  for (std::size_t t = 0; t < acc.precision.size(); ++t) {
    if (threshold >= 0 && static_cast<std::ptrdiff_t>(t) != threshold) continue;
    for (const auto& q : acc.precision[t]) {
      for (const double v : q) {
        sum += v;
        ++n;
      }
    }
  }
  return n == 0 ? -1.0 : sum / static_cast<double>(n);
}

double mean_recall(const Accumulated& acc) {
  double sum = 0;
  long long n = 0;
  for (const auto& row : acc.recall) {
    for (const double v : row) {
      if (v > -1) {
        sum += v;
        ++n;
      }
    }
  }
  return n == 0 ? -1.0 : sum / static_cast<double>(n);
}

std::ptrdiff_t threshold_index(const EvalParams& p, double value) {
  for (std::size_t i = 0; i < p.iou_thresholds.size(); ++i) {
    if (std::abs(p.iou_thresholds[i] - value) < 1e-12) return static_cast<std::ptrdiff_t>(i);
  }
  return -2;
}

}  // namespace

EvalResult evaluate(const GtDataset& gt, std::span<const DetInstance> dets, const EvalParams& params) {
  validate(params);

  std::vector<std::int64_t> image_ids;
  for (const auto& img : gt.images) image_ids.push_back(img.id);
  std::sort(image_ids.begin(), image_ids.end());
  image_ids.erase(std::unique(image_ids.begin(), image_ids.end()), image_ids.end());
  const auto& cats = gt.category_ids;

  using Key = std::pair<std::int64_t, std::int64_t>;  // (image, category)
  std::map<Key, std::vector<GtEntry>> gts;
  std::map<Key, std::vector<DetEntry>> dts;
  for (const auto& inst : gt.instances) gts[{inst.image_id, inst.category_id}].push_back({&inst, inst.rle()});
  for (const auto& d : dets) {
    const auto& img = gt.image(d.image_id);
    if (!(img.dims == d.mask.dims)) {
      throw Error(ErrorCode::DimsMismatch, "detection mask size differs from image " + std::to_string(d.image_id));
    }
    dts[{d.image_id, d.category_id}].push_back({&d, static_cast<double>(d.mask.area())});
  }

  std::vector<AreaRange> ranges = {params.all, params.small, params.medium, params.large};
  if (params.exclude_small) ranges[0].lo = std::max(ranges[0].lo, params.small.hi);

  // evals[range][category] -> per-image evaluations in image-id order
  std::vector<std::vector<std::vector<ImageEval>>> evals(
      ranges.size(), std::vector<std::vector<ImageEval>>(cats.size()));
  for (std::size_t k = 0; k < cats.size(); ++k) {
    for (const auto img : image_ids) {
      const Key key{img, cats[k]};
      static const std::vector<GtEntry> kNoGt;
      static const std::vector<DetEntry> kNoDt;
      const auto git = gts.find(key);
      const auto dit = dts.find(key);
      const auto& g = git == gts.end() ? kNoGt : git->second;
      std::vector<DetEntry> d = dit == dts.end() ? kNoDt : dit->second;
      if (g.empty() && d.empty()) continue;
      std::stable_sort(d.begin(), d.end(), [](const DetEntry& a, const DetEntry& b) { return a.det->score > b.det->score; });
      if (d.size() > static_cast<std::size_t>(params.max_dets)) d.resize(static_cast<std::size_t>(params.max_dets));
      std::vector<std::vector<double>> ious(d.size(), std::vector<double>(g.size(), 0.0));
      for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < g.size(); ++j) ious[i][j] = rle_iou(d[i].det->mask, g[j].rle, g[j].inst->iscrowd);
      }
      for (std::size_t a = 0; a < ranges.size(); ++a) {
        evals[a][k].push_back(evaluate_image(g, d, ious, ranges[a], params));
      }
    }
  }

  std::vector<Accumulated> acc;
  for (std::size_t a = 0; a < ranges.size(); ++a) {
    std::vector<std::vector<const ImageEval*>> per_cat(cats.size());
    for (std::size_t k = 0; k < cats.size(); ++k) {
      for (const auto& ev : evals[a][k]) per_cat[k].push_back(&ev);
    }
    acc.push_back(accumulate(per_cat, params));
  }

  EvalResult res;
  res.ap = mean_precision(acc[0], -1);
  res.ap50 = mean_precision(acc[0], threshold_index(params, 0.5));
  res.ap75 = mean_precision(acc[0], threshold_index(params, 0.75));
  res.ap_small = params.exclude_small ? -1.0 : mean_precision(acc[1], -1);
  res.ap_medium = mean_precision(acc[2], -1);
  res.ap_large = mean_precision(acc[3], -1);
  res.ar = mean_recall(acc[0]);
  for (std::size_t t = 0; t < params.iou_thresholds.size(); ++t) {
    res.ap_per_threshold.push_back(mean_precision(acc[0], static_cast<std::ptrdiff_t>(t)));
  }
  for (const auto& per_cat : evals[0]) {
    for (const auto& ev : per_cat) {
      for (std::size_t d = 0; d < ev.scores.size(); ++d) {
        if (ev.det_ignore[0][d]) continue;
        (ev.matched[0][d] ? res.counts.true_positives : res.counts.false_positives) += 1;
      }
      for (std::size_t g = 0; g < ev.gt_ignore.size(); ++g) {
        if (!ev.gt_ignore[g] && !ev.gt_matched[0][g]) res.counts.false_negatives += 1;
      }
    }
  }
  return res;
}

nlohmann::json report_json(const EvalResult& r, const EvalParams& params) {
  nlohmann::json j;
  j["ap"] = r.ap;
  j["ap50"] = r.ap50;
  j["ap75"] = r.ap75;
  if (!params.exclude_small) j["ap_small"] = r.ap_small;
  j["ap_medium"] = r.ap_medium;
  j["ap_large"] = r.ap_large;
  j["ar"] = r.ar;
  return j;
}

}  // namespace poseprompt
