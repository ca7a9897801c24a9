#include "tcd/train.hpp"

#include <chrono>
#include <stdexcept>

namespace tcd {

namespace {

double ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Tensor train_condition_matrix(const SegmentBatch& batch, const DatasetStats& stats,
                              AblationFlags flags, double dropout_p, Rng& rng, bool raw_rtg) {
  const int b = batch.states.dim(0);
  Tensor cond({b, 3});
  for (int i = 0; i < b; ++i) {
    TemporalCondition c;
    c.use_historical = flags.use_historical;
    c.use_immediate = flags.use_immediate;
    c.use_prospective = flags.use_prospective;
    c.immediate_reward = reward_condition_value(batch.first_reward_raw[static_cast<std::size_t>(i)], stats);
    c.rtg = raw_rtg ? batch.rtg_raw[static_cast<std::size_t>(i)]
                    : rtg_condition_value(batch.rtg_raw[static_cast<std::size_t>(i)], stats);
    c.timestep = stats.t_max > 0
                     ? static_cast<double>(batch.start_timestep[static_cast<std::size_t>(i)]) / stats.t_max
                     : 0.0;
    c = drop_condition(c, dropout_p, rng);
    const Tensor sv = c.scalar_vector();
    for (int j = 0; j < 3; ++j) cond.at(i, j) = sv.at(j);
  }
  return cond;
}

ParamSet train_denoiser(const DenoiserConfig& cfg, const Dataset& dataset,
                        const NoiseSchedule& sched, const GuidanceConfig& gcfg,
                        const TrainOptions& opts, std::uint64_t seed,
                        std::vector<TrainLogEntry>* log) {
  const std::vector<WindowDesc> windows = segment(dataset, opts.L, opts.t_hc, opts.discard_padded);
  if (windows.empty()) throw std::runtime_error("train_denoiser: no training windows");

  Rng init_rng(substream(seed, 1));
  Rng rng(substream(seed, 2));
  ParamSet theta = init_denoiser(cfg, init_rng);
  AdamState adam = AdamState::init(theta, {.lr = opts.lr});

  const auto t0 = std::chrono::steady_clock::now();
  for (int step = 1; step <= opts.steps; ++step) {
    const SegmentBatch batch = sample_batch(dataset, windows, opts.L, opts.batch, rng);
    const Tensor cond = train_condition_matrix(batch, dataset.stats, opts.flags,
                                               gcfg.condition_dropout_p, rng, opts.raw_rtg);
    std::vector<char> inpaint(static_cast<std::size_t>(opts.batch), 0);
    if (opts.inpaint_p > 0.0 && opts.flags.use_historical)
      for (char& f : inpaint) f = rng.uniform() < opts.inpaint_p ? 1 : 0;
    std::vector<int> k_batch(static_cast<std::size_t>(opts.batch));
    for (int& k : k_batch) k = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(sched.K)));
    Tensor eps(batch.states.shape);
    for (double& v : eps.data) v = rng.normal();

    const LossResult res =
        training_loss(cfg, theta, batch.states, cond, k_batch, eps, sched, opts.t_hc, inpaint);
    adam_step(theta, res.grads, adam);

    if (log && (step == 1 || step % opts.log_every == 0 || step == opts.steps))
      log->push_back({step, res.loss, ms_since(t0)});
  }
  return theta;
}

void collect_pairs(const Dataset& dataset, Tensor& pairs, Tensor& actions) {
  int n = 0;
  for (const Trajectory& tr : dataset.trajectories) n += std::max(0, tr.length() - 1);
  if (n == 0) throw std::runtime_error("inverse dynamics: dataset has no consecutive state pair");
  pairs = Tensor({n, 2 * dataset.d_s});
  actions = Tensor({n, dataset.d_a});
  std::vector<double> row(static_cast<std::size_t>(dataset.d_s));
  int r = 0;
  for (const Trajectory& tr : dataset.trajectories) {
    for (int t = 0; t + 1 < tr.length(); ++t) {
      normalize_state_row(tr.states.data.data() + static_cast<std::size_t>(t) * dataset.d_s,
                          row.data(), dataset.stats);
      for (int j = 0; j < dataset.d_s; ++j) pairs.at(r, j) = row[static_cast<std::size_t>(j)];
      normalize_state_row(tr.states.data.data() + static_cast<std::size_t>(t + 1) * dataset.d_s,
                          row.data(), dataset.stats);
      for (int j = 0; j < dataset.d_s; ++j) pairs.at(r, dataset.d_s + j) = row[static_cast<std::size_t>(j)];
      for (int j = 0; j < dataset.d_a; ++j) actions.at(r, j) = tr.actions.at(t, j);
      ++r;
    }
  }
}

ParamSet train_inverse_dynamics(const InverseDynamicsConfig& cfg, const Dataset& dataset, int steps,
                                int batch, double lr, std::uint64_t seed,
                                std::vector<TrainLogEntry>* log) {
  Tensor pairs, actions;
  collect_pairs(dataset, pairs, actions);
  const int n = pairs.dim(0);

  Rng init_rng(substream(seed, 3));
  Rng rng(substream(seed, 4));
  ParamSet phi = init_inverse_dynamics(cfg, init_rng);
  AdamState adam = AdamState::init(phi, {.lr = lr});

  const auto t0 = std::chrono::steady_clock::now();
  for (int step = 1; step <= steps; ++step) {
    Tensor bx({batch, 2 * cfg.d_s});
    Tensor by({batch, cfg.d_a});
    for (int i = 0; i < batch; ++i) {
      const int r = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
      for (int j = 0; j < 2 * cfg.d_s; ++j) bx.at(i, j) = pairs.at(r, j);
      for (int j = 0; j < cfg.d_a; ++j) by.at(i, j) = actions.at(r, j);
    }

    Tape tape(true);
    const std::vector<int> ids = bind_params(tape, phi, true);
    const int x = tape.leaf(bx);
    const int pred = inverse_dynamics_forward(tape, cfg, ids, x);
    const int loss = tape.mean_sq_diff(pred, tape.leaf(by));
    const double lv = tape.scalar_value(loss);
    if (!std::isfinite(lv)) throw std::runtime_error("inverse dynamics: non-finite loss");
    tape.backward(loss);
    ParamSet grads;
    grads.names = phi.names;
    for (int id : ids) grads.tensors.push_back(tape.grad(id));
    adam_step(phi, grads, adam);

    if (log && (step == 1 || step % 100 == 0 || step == steps))
      log->push_back({step, lv, ms_since(t0)});
  }
  return phi;
}

}  // namespace tcd
