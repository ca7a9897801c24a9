#pragma once

#include <vector>

#include "tcd/conditioning.hpp"
#include "tcd/diffusion.hpp"
#include "tcd/envs.hpp"
#include "tcd/inverse_dynamics.hpp"

namespace tcd {

struct EpisodeResult {
  double total_return = 0.0;
  int steps = 0;
  std::vector<double> rewards;
  double rtg_initial = 0.0;
  double rtg_final = 0.0;
  Tensor states;   // (steps+1, d_s) raw visited states
  Tensor actions;  // (steps, d_a) executed actions
  // Per-step generated windows (normalized space), kept when requested.
  std::vector<Tensor> generated;
};

struct EvalConfig {
  int L = 20;
  int t_hc = 5;
  double max_return_offset = 0.0;
  AblationFlags flags;
  bool raw_rtg = false;
  bool keep_generated = false;
  int start_class = 0;
};

// Closed-loop evaluation: replan a full window each env step, decode the
// action from (true s_t, generated state at window index T_HC), step the
// env and decrement the remaining return-to-go by the observed reward.
EpisodeResult evaluate_episode(const DenoiserConfig& dcfg, const ParamSet& theta,
                               const InverseDynamicsConfig& icfg, const ParamSet& phi, Env& env,
                               const DatasetStats& stats, const std::vector<double>& profile,
                               const NoiseSchedule& sched, const GuidanceConfig& gcfg,
                               const EvalConfig& ecfg, Rng& rng);

// Runs n episodes with per-episode rng substreams, in parallel worker
// threads against the frozen parameters.
std::vector<EpisodeResult> evaluate_episodes(const DenoiserConfig& dcfg, const ParamSet& theta,
                                             const InverseDynamicsConfig& icfg, const ParamSet& phi,
                                             const EnvSpec& spec, const DatasetStats& stats,
                                             const std::vector<double>& profile,
                                             const NoiseSchedule& sched, const GuidanceConfig& gcfg,
                                             const EvalConfig& ecfg, int episodes,
                                             std::uint64_t seed);

// Linear map of the method values onto [0, 10]; errors when all values are
// equal or fewer than two are given.
std::vector<double> normalized_score(const std::vector<double>& values);

}  // namespace tcd
