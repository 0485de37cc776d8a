#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "poseprompt/error.hpp"
#include "poseprompt/oracle.hpp"
#include "poseprompt/sampler.hpp"

namespace poseprompt {

struct SimInstance {
  std::int64_t image_id = 0;
  std::int64_t instance_id = 0;
  BinaryMask gt;
  Pose pose;  // ids are overwritten with the instance's ids
};

struct IterationTrace {
  std::int64_t instance_id = 0;
  std::vector<double> ious;  // one per segmenter call
};

struct LoopOutcome {
  IterationTrace trace;
  std::vector<PromptPoint> points;
  BinaryMask final_mask;
  double final_confidence = 0.0;
};

/// In-process oracle over a fixed set of GT masks keyed by instance id.
class OracleSegmenter : public Segmenter {
 public:
  explicit OracleSegmenter(OracleConfig cfg) : cfg_(cfg) {}
  OracleSegmenter(OracleConfig cfg, std::span<const SimInstance> instances);

  void add(std::int64_t instance_id, const BinaryMask& gt) { gts_[instance_id] = gt; }

  SegmenterResponse segment(const SegmenterRequest& req) override;

 private:
  OracleConfig cfg_;
  std::unordered_map<std::int64_t, BinaryMask> gts_;
};

/// Alternates sampler and segmenter: point 1 -> mask 1 -> point 2 against
/// mask 1's error region -> ... up to total_points, recording IoU with the
/// GT after every call. Stops early once the prediction equals the GT and
/// the sampler has nothing left to draw.
LoopOutcome run_refine_loop(const SamplerConfig& sampler_cfg, Segmenter& segmenter,
                            const SimInstance& instance);

IterationTrace run_refine_loop(const SamplerConfig& sampler_cfg, const OracleConfig& oracle_cfg,
                               const BinaryMask& gt, const Pose& pose);

/// Result of one instance in a batch run; `error` is set when the instance
/// was aborted.
struct InstanceRun {
  std::optional<LoopOutcome> outcome;
  std::string error;
  std::optional<ErrorCode> error_code;  // unset for non-toolkit exceptions
};

using SegmenterFactory = std::function<std::unique_ptr<Segmenter>()>;

/// Runs every instance on a bounded worker pool. Each worker owns one
/// segmenter from `factory`. Output order follows the input order.
/// Transport failures (timeout, closed peer) recreate the worker's
/// segmenter and retry up to `retries` times; other errors abort only
/// that instance.
std::vector<InstanceRun> run_batch(const SamplerConfig& sampler_cfg,
                                   std::span<const SimInstance> instances,
                                   const SegmenterFactory& factory, int workers, int retries = 1);

/// Per-step mean over traces; shorter traces are padded with their last IoU.
std::vector<double> mean_trace(std::span<const IterationTrace> traces, int steps);

}  // namespace poseprompt
