#include "poseprompt/oracle.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "poseprompt/error.hpp"
#include "poseprompt/rng.hpp"

namespace poseprompt {

void validate(const OracleConfig& cfg) {
  if (cfg.corruption_erode < 0 || cfg.corruption_dilate < 0 || !(cfg.repair_radius >= 0)) {
    throw Error(ErrorCode::InvalidArgument, "oracle radii must be >= 0");
  }
  if (!(cfg.drop_component_prob >= 0.0 && cfg.drop_component_prob <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "drop_component_prob must be in [0, 1]");
  }
}

namespace {

std::vector<std::pair<Index, Index>> disk_offsets(int radius) {
  std::vector<std::pair<Index, Index>> out;
  for (int dr = -radius; dr <= radius; ++dr) {
    for (int dc = -radius; dc <= radius; ++dc) {
      if (dr * dr + dc * dc <= radius * radius) out.emplace_back(dr, dc);
    }
  }
  return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& m, int radius) {
  if (radius <= 0) return m;
  const auto offsets = disk_offsets(radius);
  BinaryMask out(m.dims());
  for (Index c = 0; c < m.width(); ++c) {
    for (Index r = 0; r < m.height(); ++r) {
      if (!m(r, c)) continue;
      bool keep = true;
      for (const auto& [dr, dc] : offsets) {
        if (!m.contains(r + dr, c + dc) || !m(r + dr, c + dc)) {
          keep = false;
          break;
        }
      }
      if (keep) out.set(r, c);
    }
  }
  return out;
}

BinaryMask dilate(const BinaryMask& m, int radius) {
  if (radius <= 0) return m;
  const auto offsets = disk_offsets(radius);
  BinaryMask out(m.dims());
  for (Index c = 0; c < m.width(); ++c) {
    for (Index r = 0; r < m.height(); ++r) {
      if (!m(r, c)) continue;
      for (const auto& [dr, dc] : offsets) {
        if (out.contains(r + dr, c + dc)) out.set(r + dr, c + dc);
      }
    }
  }
  return out;
}

Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic> label_components(const BinaryMask& m,
                                                                           int* count) {
  Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic> labels =
      Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(m.height(), m.width());
  std::int32_t next = 0;
  std::vector<std::pair<Index, Index>> stack;
  for (Index c = 0; c < m.width(); ++c) {
    for (Index r = 0; r < m.height(); ++r) {
      if (!m(r, c) || labels(r, c) != 0) continue;
      ++next;
      labels(r, c) = next;
      stack.emplace_back(r, c);
      while (!stack.empty()) {
        const auto [pr, pc] = stack.back();
        stack.pop_back();
        constexpr Index kNeighbours[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
        for (const auto& d : kNeighbours) {
          const Index nr = pr + d[0], nc = pc + d[1];
          if (m.contains(nr, nc) && m(nr, nc) && labels(nr, nc) == 0) {
            labels(nr, nc) = next;
            stack.emplace_back(nr, nc);
          }
        }
      }
    }
  }
  if (count) *count = next;
  return labels;
}

BinaryMask corrupt_mask(const OracleConfig& cfg, const BinaryMask& gt, std::int64_t image_id,
                        std::int64_t instance_id) {
  validate(cfg);
  BinaryMask m = dilate(erode(gt, cfg.corruption_erode), cfg.corruption_dilate);
  if (cfg.drop_component_prob <= 0.0) return m;

  int n = 0;
  const auto labels = label_components(m, &n);
  CounterRng rng = CounterRng::for_instance(cfg.seed, image_id, instance_id).split(0x0c0ffee);
  std::vector<bool> drop(static_cast<std::size_t>(n) + 1, false);
  for (int k = 1; k <= n; ++k) drop[static_cast<std::size_t>(k)] = rng.next_unit() < cfg.drop_component_prob;
  MaskArray out = m.array();
  for (Index i = 0; i < out.size(); ++i) {
    if (drop[static_cast<std::size_t>(labels(i))]) out(i) = 0;
  }
  return BinaryMask(out);
}

BinaryMask repair_mask(const OracleConfig& cfg, const BinaryMask& gt, BinaryMask prior,
                       const PromptSet& prompts) {
  if (!(gt.dims() == prior.dims())) {
    throw Error(ErrorCode::DimsMismatch, "prior mask does not match the GT size");
  }
  const double r = cfg.repair_radius;
  for (const auto& p : prompts.points) {
    const double px = p.position.x(), py = p.position.y();
    const Index c0 = std::max<Index>(0, static_cast<Index>(std::floor(px - r)));
    const Index c1 = std::min<Index>(gt.width() - 1, static_cast<Index>(std::ceil(px + r)));
    const Index r0 = std::max<Index>(0, static_cast<Index>(std::floor(py - r)));
    const Index r1 = std::min<Index>(gt.height() - 1, static_cast<Index>(std::ceil(py + r)));
    const bool positive = p.label == PointLabel::Positive;
    for (Index c = c0; c <= c1; ++c) {
      for (Index row = r0; row <= r1; ++row) {
        const double dx = static_cast<double>(c) - px, dy = static_cast<double>(row) - py;
        if (dx * dx + dy * dy > r * r) continue;
        if (positive && gt(row, c)) prior.set(row, c, true);
        if (!positive && !gt(row, c)) prior.set(row, c, false);
      }
    }
  }
  return prior;
}

SegmenterResponse oracle_segment(const OracleConfig& cfg, const BinaryMask& gt,
                                 const SegmenterRequest& req) {
  validate(cfg);
  if (gt.empty()) throw Error(ErrorCode::EmptyGtMask, "oracle needs a non-empty GT mask");
  if (!(req.dims == gt.dims())) {
    throw Error(ErrorCode::DimsMismatch, "request dims do not match the GT mask");
  }
  BinaryMask result = req.prior_mask
                          ? repair_mask(cfg, gt, rle_decode(*req.prior_mask), req.prompts)
                          : corrupt_mask(cfg, gt, req.image_id, req.instance_id);
  return {rle_encode(result), iou(result, gt)};
}

}  // namespace poseprompt
