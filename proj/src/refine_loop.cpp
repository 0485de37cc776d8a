#include "poseprompt/refine_loop.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <thread>

#include "poseprompt/error.hpp"

namespace poseprompt {

OracleSegmenter::OracleSegmenter(OracleConfig cfg, std::span<const SimInstance> instances)
    : cfg_(cfg) {
  for (const auto& inst : instances) gts_[inst.instance_id] = inst.gt;
}

SegmenterResponse OracleSegmenter::segment(const SegmenterRequest& req) {
  const auto it = gts_.find(req.instance_id);
  if (it == gts_.end()) {
    throw Error(ErrorCode::InvalidArgument,
                "oracle has no GT for instance " + std::to_string(req.instance_id));
  }
  return oracle_segment(cfg_, it->second, req);
}

LoopOutcome run_refine_loop(const SamplerConfig& sampler_cfg, Segmenter& segmenter,
                            const SimInstance& instance) {
  validate(sampler_cfg);
  Pose pose = instance.pose;
  pose.image_id = instance.image_id;
  pose.instance_id = instance.instance_id;
  RefineState state = first_point(sampler_cfg, RefineState::start(sampler_cfg, instance.gt, pose));

  LoopOutcome out;
  out.trace.instance_id = instance.instance_id;
  SegmenterRequest req{instance.image_id, instance.instance_id, instance.gt.dims(), {}, std::nullopt};
  for (int step = 1;; ++step) {
    req.prompts.points = state.sampled;
    const SegmenterResponse resp = segmenter.segment(req);
    if (!(resp.mask.dims == instance.gt.dims())) {
      throw Error(ErrorCode::ProtocolError, "segmenter returned a mask of the wrong size");
    }
    state.pred = rle_decode(resp.mask);
    out.trace.ious.push_back(iou(state.pred, instance.gt));
    out.final_confidence = resp.confidence;
    req.prior_mask = resp.mask;
    if (step == sampler_cfg.total_points) break;
    try {
      advance(sampler_cfg, state);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NothingToSample) throw;
      break;
    }
  }
  out.points = state.sampled;
  out.final_mask = state.pred;
  return out;
}

IterationTrace run_refine_loop(const SamplerConfig& sampler_cfg, const OracleConfig& oracle_cfg,
                               const BinaryMask& gt, const Pose& pose) {
  SimInstance inst{pose.image_id, pose.instance_id, gt, pose};
  OracleSegmenter oracle(oracle_cfg);
  oracle.add(inst.instance_id, gt);
  return run_refine_loop(sampler_cfg, oracle, inst).trace;
}

std::vector<InstanceRun> run_batch(const SamplerConfig& sampler_cfg,
                                   std::span<const SimInstance> instances,
                                   const SegmenterFactory& factory, int workers, int retries) {
  std::vector<InstanceRun> results(instances.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    std::unique_ptr<Segmenter> seg;
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      for (int attempt = 0;; ++attempt) {
        try {
          if (!seg) seg = factory();
          results[i].outcome = run_refine_loop(sampler_cfg, *seg, instances[i]);
          results[i].error.clear();
          results[i].error_code.reset();
          break;
        } catch (const Error& e) {
          results[i].error = e.what();
          results[i].error_code = e.code();
          const bool transport =
              e.code() == ErrorCode::Timeout || e.code() == ErrorCode::PeerClosed;
          if (transport) seg.reset();
          if (!transport || attempt >= retries) {
            std::cerr << "instance " << instances[i].instance_id << " aborted: " << e.what()
                      << "\n";
            break;
          }
        } catch (const std::exception& e) {
          results[i].error = e.what();
          std::cerr << "instance " << instances[i].instance_id << " aborted: " << e.what() << "\n";
          break;
        }
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(instances.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return results;
}

std::vector<double> mean_trace(std::span<const IterationTrace> traces, int steps) {
  std::vector<double> mean(static_cast<std::size_t>(steps), 0.0);
  if (traces.empty()) return mean;
  for (const auto& t : traces) {
    for (int s = 0; s < steps; ++s) {
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(s), t.ious.size() - 1);
      mean[static_cast<std::size_t>(s)] += t.ious.empty() ? 0.0 : t.ious[k];
    }
  }
  for (auto& v : mean) v /= static_cast<double>(traces.size());
  return mean;
}

}  // namespace poseprompt
