#include "tcd/agent.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>
#include <thread>

#include "tcd/data.hpp"

namespace tcd {

EpisodeResult evaluate_episode(const DenoiserConfig& dcfg, const ParamSet& theta,
                               const InverseDynamicsConfig& icfg, const ParamSet& phi, Env& env,
                               const DatasetStats& stats, const std::vector<double>& profile,
                               const NoiseSchedule& sched, const GuidanceConfig& gcfg,
                               const EvalConfig& ecfg, Rng& rng) {
  if (ecfg.t_hc >= ecfg.L) throw std::invalid_argument("evaluate_episode: T_HC must be smaller than L");

  EpisodeResult res;
  res.rtg_initial = stats.T_max + ecfg.max_return_offset;
  double rtg_remaining = res.rtg_initial;

  std::vector<double> s = env.reset(rng, ecfg.start_class);
  std::deque<std::vector<double>> recent;  // normalized, newest at the back
  std::vector<double> s_norm(static_cast<std::size_t>(stats.d_s));
  std::vector<double> visited(s.begin(), s.end());
  std::vector<double> taken;

  for (int t = 0; t < stats.t_max; ++t) {
    normalize_state_row(s.data(), s_norm.data(), stats);
    recent.push_back(s_norm);
    if (static_cast<int>(recent.size()) > ecfg.t_hc) recent.pop_front();

    TemporalCondition cond = build_eval_condition(profile, rtg_remaining, t, stats, ecfg.flags);
    if (ecfg.raw_rtg && ecfg.flags.use_prospective) cond.rtg = std::max(rtg_remaining, 0.0);
    Tensor hist({static_cast<int>(recent.size()), stats.d_s});
    for (std::size_t i = 0; i < recent.size(); ++i)
      for (int j = 0; j < stats.d_s; ++j) hist.at(static_cast<int>(i), j) = recent[i][static_cast<std::size_t>(j)];
    cond.history = pad_history(hist, ecfg.t_hc);

    const Tensor window = sample_sequence(dcfg, theta, cond, ecfg.L, sched, gcfg, rng);
    if (ecfg.keep_generated) res.generated.push_back(window);

    // First generated slot: indices 0..T_HC-1 hold the inpainted history.
    std::vector<double> s_next_norm(static_cast<std::size_t>(stats.d_s));
    for (int j = 0; j < stats.d_s; ++j) s_next_norm[static_cast<std::size_t>(j)] = window.at(ecfg.t_hc, j);
    const std::vector<double> action = infer_action(icfg, phi, s_norm, s_next_norm);
    for (double a : action)
      if (!std::isfinite(a))
        throw std::runtime_error("evaluate_episode: non-finite action at step " + std::to_string(t));

    const Env::StepOut out = env.step(action);
    res.rewards.push_back(out.reward);
    res.total_return += out.reward;
    rtg_remaining -= out.reward;
    res.steps += 1;
    s = out.state;
    visited.insert(visited.end(), s.begin(), s.end());
    taken.insert(taken.end(), action.begin(), action.end());
    if (out.done) break;
  }
  res.rtg_final = rtg_remaining;
  res.states = Tensor({res.steps + 1, stats.d_s}, std::move(visited));
  res.actions = Tensor({res.steps, static_cast<int>(taken.size()) / std::max(1, res.steps)}, std::move(taken));
  return res;
}

std::vector<EpisodeResult> evaluate_episodes(const DenoiserConfig& dcfg, const ParamSet& theta,
                                             const InverseDynamicsConfig& icfg, const ParamSet& phi,
                                             const EnvSpec& spec, const DatasetStats& stats,
                                             const std::vector<double>& profile,
                                             const NoiseSchedule& sched, const GuidanceConfig& gcfg,
                                             const EvalConfig& ecfg, int episodes,
                                             std::uint64_t seed) {
  std::vector<EpisodeResult> results(static_cast<std::size_t>(episodes));
  const unsigned hw = std::thread::hardware_concurrency();
  const int workers = std::max(1, std::min<int>(episodes, hw ? static_cast<int>(hw) : 1));

  auto run_range = [&](int from, int to) {
    for (int e = from; e < to; ++e) {
      Env env(spec);
      Rng rng(substream(seed, static_cast<std::uint64_t>(e)));
      results[static_cast<std::size_t>(e)] =
          evaluate_episode(dcfg, theta, icfg, phi, env, stats, profile, sched, gcfg, ecfg, rng);
    }
  };

  if (workers == 1) {
    run_range(0, episodes);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (episodes + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int from = w * chunk, to = std::min(episodes, from + chunk);
      if (from >= to) break;
      pool.emplace_back(run_range, from, to);
    }
    for (auto& th : pool) th.join();
  }
  return results;
}

std::vector<double> normalized_score(const std::vector<double>& values) {
  if (values.size() < 2) throw std::invalid_argument("normalized_score: need at least two values");
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) throw std::runtime_error("normalized_score: all values equal");
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(10.0 * (v - lo) / (hi - lo));
  return out;
}

}  // namespace tcd
