#pragma once

#include <optional>
#include <vector>

#include "tcd/rng.hpp"
#include "tcd/tensor.hpp"

namespace tcd {

struct Trajectory;
struct Dataset;

// Frozen statistics of the training dataset, computed once by fit_stats.
struct DatasetStats {
  int d_s = 0;
  std::vector<double> state_min, state_max;  // per dimension
  double T_min = 0.0, T_max = 0.0;           // episode return range
  double r_min = 0.0, r_max = 0.0;           // single-step reward range
  int t_max = 0;                             // environment time limit
};

// Which condition components participate. (1,1,1) is the full method,
// (0,0,1) drops history+immediate, (1,0,1) drops immediate only,
// (0,1,1) drops history only.
struct AblationFlags {
  bool use_historical = true;
  bool use_immediate = true;
  bool use_prospective = true;
};

// The composed guidance record: three scalars embedded by the denoiser
// plus the history window applied through inpainting.
struct TemporalCondition {
  double immediate_reward = 0.0;  // normalized first-action reward
  double rtg = 0.0;               // normalized return-to-go
  double timestep = 0.0;          // t / t_max
  Tensor history;                 // (T_HC, d_s) normalized, left zero-padded
  std::optional<Tensor> goal_state;  // (d_s) normalized
  bool use_historical = true;
  bool use_immediate = true;
  bool use_prospective = true;

  // [immediate, rtg, timestep] with disabled components zeroed; the all-zero
  // vector doubles as the classifier-free null condition.
  Tensor scalar_vector() const;
};

// Undiscounted suffix sum of rewards from timestep t.
double compute_rtg(const Trajectory& traj, int t);

// (raw - T_min)/(T_max - T_min); errors when T_max == T_min.
double normalize_rtg(double raw, const DatasetStats& stats);

// Degenerate-safe variant used by the pipeline: when every episode return
// is identical (T_max == T_min, the case in all three toy envs) it falls
// back to raw / max(1, |T_max|) so return-to-go still carries signal.
double rtg_condition_value(double raw, const DatasetStats& stats);

// (r - r_min)/(r_max - r_min) with the same degenerate-range fallback.
double reward_condition_value(double raw, const DatasetStats& stats);

// Mean reward sequence of the Y highest-return trajectories (ties broken by
// ascending trajectory index), truncated to the shortest selected length,
// entries normalized by the dataset reward range.
std::vector<double> top_y_reward_profile(const Dataset& dataset, int Y);

// Left-pads m recent states (rows ending at s_t) with zero states up to t_hc rows.
Tensor pad_history(const Tensor& recent, int t_hc);

// Overwrites rows 0..T_HC-1 of seq with the zero-padded recent states.
// `recent` holds min(t+1, T_HC) rows ending at s_t. Rows >= T_HC untouched.
Tensor inpaint_history(const Tensor& seq, const Tensor& recent, int t, int t_hc);

// Overwrites the final row of seq with the goal state.
Tensor inpaint_goal(const Tensor& seq, const Tensor& goal);

// With probability p replaces the scalar condition vector by zeros;
// the history window is never dropped.
TemporalCondition drop_condition(const TemporalCondition& cond, double p, Rng& rng);

// Builds the evaluation-time condition for env timestep t. The caller fills
// in the history window afterwards.
TemporalCondition build_eval_condition(const std::vector<double>& profile, double rtg_remaining,
                                       int t, const DatasetStats& stats, AblationFlags flags);

}  // namespace tcd
