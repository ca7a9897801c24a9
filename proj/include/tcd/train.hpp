#pragma once

#include <cstdint>
#include <vector>

#include "tcd/adam.hpp"
#include "tcd/data.hpp"
#include "tcd/diffusion.hpp"
#include "tcd/inverse_dynamics.hpp"

namespace tcd {

struct TrainLogEntry {
  int step = 0;
  double loss = 0.0;
  double wall_ms = 0.0;
};

struct TrainOptions {
  int steps = 3000;
  int batch = 32;
  double lr = 2e-4;
  int L = 20;
  int t_hc = 5;
  bool discard_padded = false;
  AblationFlags flags;
  bool raw_rtg = false;  // condition on raw instead of normalized return-to-go
  // Fraction of windows trained in history-inpainting mode (clean first
  // T_HC slots, masked out of the loss) so sampling-time inpainting is
  // in-distribution. The rest train as plain full-window denoising.
  double inpaint_p = 0.5;
  int log_every = 100;
};

// Scalar condition matrix (b, 3) for a sampled batch: normalized decision
// reward, normalized return-to-go at the window start, start timestep over
// t_max; classifier-free dropout zeroes whole rows with probability p.
Tensor train_condition_matrix(const SegmentBatch& batch, const DatasetStats& stats,
                              AblationFlags flags, double dropout_p, Rng& rng,
                              bool raw_rtg = false);

ParamSet train_denoiser(const DenoiserConfig& cfg, const Dataset& dataset,
                        const NoiseSchedule& sched, const GuidanceConfig& gcfg,
                        const TrainOptions& opts, std::uint64_t seed,
                        std::vector<TrainLogEntry>* log = nullptr);

// All aligned (s_t, s_{t+1}, a_t) transitions: normalized state pairs and
// raw actions. Throws when the dataset has no consecutive pair.
void collect_pairs(const Dataset& dataset, Tensor& pairs, Tensor& actions);

ParamSet train_inverse_dynamics(const InverseDynamicsConfig& cfg, const Dataset& dataset, int steps,
                                int batch, double lr, std::uint64_t seed,
                                std::vector<TrainLogEntry>* log = nullptr);

}  // namespace tcd
