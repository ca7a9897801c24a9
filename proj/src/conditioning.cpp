#include "tcd/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tcd/data.hpp"

namespace tcd {

Tensor TemporalCondition::scalar_vector() const {
  Tensor v({3});
  v.at(0) = use_immediate ? immediate_reward : 0.0;
  v.at(1) = use_prospective ? rtg : 0.0;
  v.at(2) = use_prospective ? timestep : 0.0;
  return v;
}

double compute_rtg(const Trajectory& traj, int t) {
  if (t < 0 || t >= traj.length()) throw std::out_of_range("compute_rtg: timestep out of range");
  double s = 0.0;
  for (std::size_t i = static_cast<std::size_t>(t); i < traj.rewards.size(); ++i) s += traj.rewards[i];
  return s;
}

double normalize_rtg(double raw, const DatasetStats& stats) {
  if (stats.T_max == stats.T_min)
    throw std::runtime_error("normalize_rtg: degenerate dataset (T_max == T_min)");
  return (raw - stats.T_min) / (stats.T_max - stats.T_min);
}

double rtg_condition_value(double raw, const DatasetStats& stats) {
  if (stats.T_max > stats.T_min) return normalize_rtg(raw, stats);
  return raw / std::max(1.0, std::abs(stats.T_max));
}

double reward_condition_value(double raw, const DatasetStats& stats) {
  if (stats.r_max > stats.r_min) return (raw - stats.r_min) / (stats.r_max - stats.r_min);
  return raw / std::max(1.0, std::abs(stats.r_max));
}

std::vector<double> top_y_reward_profile(const Dataset& dataset, int Y) {
  const int n = static_cast<int>(dataset.trajectories.size());
  if (n == 0) throw std::runtime_error("top_y_reward_profile: empty dataset");
  if (Y < 1 || Y > n) throw std::invalid_argument("top_y_reward_profile: Y out of range");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dataset.trajectories[static_cast<std::size_t>(a)].episode_return >
           dataset.trajectories[static_cast<std::size_t>(b)].episode_return;
  });

  int min_len = dataset.trajectories[static_cast<std::size_t>(order[0])].length();
  for (int i = 1; i < Y; ++i)
    min_len = std::min(min_len, dataset.trajectories[static_cast<std::size_t>(order[i])].length());

  std::vector<double> profile(static_cast<std::size_t>(min_len), 0.0);
  for (int i = 0; i < Y; ++i) {
    const Trajectory& tr = dataset.trajectories[static_cast<std::size_t>(order[i])];
    for (int t = 0; t < min_len; ++t) profile[static_cast<std::size_t>(t)] += tr.rewards[static_cast<std::size_t>(t)];
  }
  for (double& v : profile) v = reward_condition_value(v / Y, dataset.stats);
  return profile;
}

Tensor pad_history(const Tensor& recent, int t_hc) {
  if (recent.ndim() != 2) throw std::invalid_argument("pad_history: recent states must be (m, d_s)");
  const int m = recent.dim(0), d = recent.dim(1);
  if (m > t_hc) throw std::invalid_argument("pad_history: more states than the history window");
  Tensor out({t_hc, d});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) out.at(t_hc - m + i, j) = recent.at(i, j);
  return out;
}

Tensor inpaint_history(const Tensor& seq, const Tensor& recent, int t, int t_hc) {
  if (seq.ndim() != 2) throw std::invalid_argument("inpaint_history: sequence must be (L, d_s)");
  const int L = seq.dim(0);
  if (t_hc >= L) throw std::invalid_argument("inpaint_history: T_HC must be smaller than L");
  const int expect = std::min(t + 1, t_hc);
  if (recent.ndim() != 2 || recent.dim(0) != expect || recent.dim(1) != seq.dim(1))
    throw std::invalid_argument("inpaint_history: expected " + std::to_string(expect) + " recent states");
  const Tensor window = pad_history(recent, t_hc);
  Tensor out = seq;
  for (int i = 0; i < t_hc; ++i)
    for (int j = 0; j < seq.dim(1); ++j) out.at(i, j) = window.at(i, j);
  return out;
}

Tensor inpaint_goal(const Tensor& seq, const Tensor& goal) {
  if (seq.ndim() != 2) throw std::invalid_argument("inpaint_goal: sequence must be (L, d_s)");
  if (static_cast<int>(goal.numel()) != seq.dim(1))
    throw std::invalid_argument("inpaint_goal: goal dimension mismatch");
  Tensor out = seq;
  for (int j = 0; j < seq.dim(1); ++j) out.at(seq.dim(0) - 1, j) = goal.at(j);
  return out;
}

TemporalCondition drop_condition(const TemporalCondition& cond, double p, Rng& rng) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("drop_condition: p must be in [0,1]");
  TemporalCondition out = cond;
  if (p > 0.0 && rng.uniform() < p) {
    out.immediate_reward = 0.0;
    out.rtg = 0.0;
    out.timestep = 0.0;
  }
  return out;
}

TemporalCondition build_eval_condition(const std::vector<double>& profile, double rtg_remaining,
                                       int t, const DatasetStats& stats, AblationFlags flags) {
  TemporalCondition c;
  c.use_historical = flags.use_historical;
  c.use_immediate = flags.use_immediate;
  c.use_prospective = flags.use_prospective;
  if (!profile.empty()) {
    const std::size_t idx = static_cast<std::size_t>(
        std::min<int>(t, static_cast<int>(profile.size()) - 1));
    c.immediate_reward = profile[idx];
  }
  c.rtg = rtg_condition_value(std::max(rtg_remaining, 0.0), stats);
  c.timestep = stats.t_max > 0 ? static_cast<double>(t) / stats.t_max : 0.0;
  if (!flags.use_immediate) c.immediate_reward = 0.0;
  if (!flags.use_prospective) {
    c.rtg = 0.0;
    c.timestep = 0.0;
  }
  return c;
}

}  // namespace tcd
