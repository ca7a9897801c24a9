#include "tcd/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace tcd {

namespace {

void check_step(int k, const NoiseSchedule& sched) {
  if (k < 1 || k > sched.K)
    throw std::out_of_range("diffusion step " + std::to_string(k) + " outside [1, " +
                            std::to_string(sched.K) + "]");
}

// Writes each condition's history window (and goal) into its row of x.
// Clean values at every reverse step; training simulates exactly this
// input distribution for inpainted rows.
void apply_inpainting(Tensor& x, const std::vector<TemporalCondition>& conds) {
  const int L = x.dim(1), d = x.dim(2);
  for (std::size_t i = 0; i < conds.size(); ++i) {
    const TemporalCondition& c = conds[i];
    if (c.use_historical && c.history.numel() > 0) {
      const int t_hc = c.history.dim(0);
      if (t_hc >= L) throw std::invalid_argument("inpainting: T_HC must be smaller than L");
      if (c.history.dim(1) != d) throw std::invalid_argument("inpainting: history dimension mismatch");
      for (int l = 0; l < t_hc; ++l)
        for (int j = 0; j < d; ++j) x.at(static_cast<int>(i), l, j) = c.history.at(l, j);
    }
    if (c.goal_state.has_value()) {
      const Tensor& g = *c.goal_state;
      if (static_cast<int>(g.numel()) != d) throw std::invalid_argument("inpainting: goal dimension mismatch");
      for (int j = 0; j < d; ++j) x.at(static_cast<int>(i), L - 1, j) = g.at(j);
    }
  }
}

}  // namespace

Tensor forward_noise(const Tensor& tau0, int k, const Tensor& eps, const NoiseSchedule& sched) {
  check_step(k, sched);
  if (!tau0.same_shape(eps)) throw std::invalid_argument("forward_noise: noise shape mismatch");
  const double abar = sched.alpha_bar[static_cast<std::size_t>(k)];
  const double a = std::sqrt(abar), b = std::sqrt(1.0 - abar);
  Tensor out(tau0.shape);
  for (std::size_t i = 0; i < tau0.numel(); ++i) out.data[i] = a * tau0.data[i] + b * eps.data[i];
  return out;
}

Tensor forward_noise_batch(const Tensor& tau0, const std::vector<int>& k_batch, const Tensor& eps,
                           const NoiseSchedule& sched) {
  if (!tau0.same_shape(eps)) throw std::invalid_argument("forward_noise: noise shape mismatch");
  const int B = tau0.dim(0);
  if (static_cast<int>(k_batch.size()) != B)
    throw std::invalid_argument("forward_noise: one step per batch row required");
  const std::size_t row = tau0.numel() / static_cast<std::size_t>(B);
  Tensor out(tau0.shape);
  for (int bi = 0; bi < B; ++bi) {
    const int k = k_batch[static_cast<std::size_t>(bi)];
    check_step(k, sched);
    const double abar = sched.alpha_bar[static_cast<std::size_t>(k)];
    const double a = std::sqrt(abar), b = std::sqrt(1.0 - abar);
    const std::size_t off = static_cast<std::size_t>(bi) * row;
    for (std::size_t i = 0; i < row; ++i)
      out.data[off + i] = a * tau0.data[off + i] + b * eps.data[off + i];
  }
  return out;
}

namespace {

// Shared body of training_loss / training_loss_value.
double loss_graph(Tape& tape, const DenoiserConfig& cfg, const ParamSet& theta,
                  const Tensor& tau0_batch, const Tensor& cond_batch,
                  const std::vector<int>& k_batch, const Tensor& eps_batch,
                  const NoiseSchedule& sched, int t_hc, const std::vector<char>& inpaint_rows,
                  std::vector<int>* param_ids, int* loss_node) {
  Tensor tau_k = forward_noise_batch(tau0_batch, k_batch, eps_batch, sched);
  const int B = tau0_batch.dim(0), L = tau0_batch.dim(1), d = tau0_batch.dim(2);
  const bool any_inpaint = !inpaint_rows.empty();
  if (any_inpaint && static_cast<int>(inpaint_rows.size()) != B)
    throw std::invalid_argument("training_loss: one inpaint flag per batch row required");
  Tensor mask;
  if (any_inpaint) {
    if (t_hc < 1 || t_hc >= L) throw std::invalid_argument("training_loss: bad t_hc for inpainting");
    mask = Tensor::full({B, L, d}, 1.0);
    for (int bi = 0; bi < B; ++bi) {
      if (!inpaint_rows[static_cast<std::size_t>(bi)]) continue;
      for (int l = 0; l < t_hc; ++l)
        for (int j = 0; j < d; ++j) {
          tau_k.at(bi, l, j) = tau0_batch.at(bi, l, j);
          mask.at(bi, l, j) = 0.0;
        }
    }
  }

  const std::vector<int> ids = bind_params(tape, theta, param_ids != nullptr);
  const int x = tape.leaf(tau_k);
  const int pred = denoiser_forward(tape, cfg, theta, ids, x, k_batch, cond_batch);
  const int target = tape.leaf(eps_batch);
  const int loss = any_inpaint ? tape.mean_sq_diff_masked(pred, target, std::move(mask))
                               : tape.mean_sq_diff(pred, target);
  if (param_ids) *param_ids = ids;
  if (loss_node) *loss_node = loss;
  const double lv = tape.scalar_value(loss);
  if (!std::isfinite(lv)) throw std::runtime_error("training_loss: non-finite loss");
  return lv;
}

}  // namespace

LossResult training_loss(const DenoiserConfig& cfg, const ParamSet& theta, const Tensor& tau0_batch,
                         const Tensor& cond_batch, const std::vector<int>& k_batch,
                         const Tensor& eps_batch, const NoiseSchedule& sched, int t_hc,
                         const std::vector<char>& inpaint_rows) {
  Tape tape(true);
  std::vector<int> ids;
  int loss_node = -1;
  LossResult res;
  res.loss = loss_graph(tape, cfg, theta, tau0_batch, cond_batch, k_batch, eps_batch, sched, t_hc,
                        inpaint_rows, &ids, &loss_node);
  tape.backward(loss_node);
  res.grads.names = theta.names;
  for (std::size_t i = 0; i < ids.size(); ++i) res.grads.tensors.push_back(tape.grad(ids[i]));
  return res;
}

double training_loss_value(const DenoiserConfig& cfg, const ParamSet& theta, const Tensor& tau0_batch,
                           const Tensor& cond_batch, const std::vector<int>& k_batch,
                           const Tensor& eps_batch, const NoiseSchedule& sched, int t_hc,
                           const std::vector<char>& inpaint_rows) {
  Tape tape(false);
  return loss_graph(tape, cfg, theta, tau0_batch, cond_batch, k_batch, eps_batch, sched, t_hc,
                    inpaint_rows, nullptr, nullptr);
}

Tensor guided_noise_batch(const DenoiserConfig& cfg, const ParamSet& theta, const Tensor& x, int k,
                          const Tensor& cond_scalars, double omega) {
  if (x.ndim() != 3) throw std::invalid_argument("guided_noise: iterate must be (B,L,d_s)");
  const int B = x.dim(0), L = x.dim(1), d = x.dim(2);
  if (cond_scalars.ndim() != 2 || cond_scalars.dim(0) != B || cond_scalars.dim(1) != cfg.cond_dim)
    throw std::invalid_argument("guided_noise: condition matrix shape mismatch");

  // One stacked forward: conditional rows first, unconditional (zero) rows after.
  Tensor x2({2 * B, L, d});
  for (std::size_t i = 0; i < x.numel(); ++i) {
    x2.data[i] = x.data[i];
    x2.data[x.numel() + i] = x.data[i];
  }
  Tensor c2({2 * B, cfg.cond_dim});
  for (std::size_t i = 0; i < cond_scalars.numel(); ++i) c2.data[i] = cond_scalars.data[i];
  const std::vector<int> k2(static_cast<std::size_t>(2 * B), k);

  const Tensor both = denoiser_eval(cfg, theta, x2, k2, c2);
  Tensor out({B, L, d});
  const std::size_t n = x.numel();
  if (omega == 1.0) {
    for (std::size_t i = 0; i < n; ++i) out.data[i] = both.data[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double ec = both.data[i], en = both.data[n + i];
      out.data[i] = en + omega * (ec - en);
    }
  }
  return out;
}

Tensor guided_noise(const DenoiserConfig& cfg, const ParamSet& theta, const Tensor& x,
                    const TemporalCondition& cond, int k, double omega) {
  const bool batched = x.ndim() == 3;
  Tensor xb = batched ? x : Tensor({1, x.dim(0), x.dim(1)}, x.data);
  if (xb.dim(0) != 1) throw std::invalid_argument("guided_noise: single-window form expects one row");
  Tensor c({1, 3});
  const Tensor sv = cond.scalar_vector();
  for (int j = 0; j < 3; ++j) c.at(0, j) = sv.at(j);
  Tensor out = guided_noise_batch(cfg, theta, xb, k, c, omega);
  return batched ? out : Tensor({x.dim(0), x.dim(1)}, out.data);
}

Tensor denoise_step(const Tensor& tau_k, const Tensor& eps_bar, int k, const NoiseSchedule& sched,
                    const Tensor& z, const GuidanceConfig& cfg) {
  check_step(k, sched);
  if (!tau_k.same_shape(eps_bar)) throw std::invalid_argument("denoise_step: noise shape mismatch");
  if (!tau_k.same_shape(z)) throw std::invalid_argument("denoise_step: z shape mismatch");
  const double abar = sched.alpha_bar[static_cast<std::size_t>(k)];
  const double abar_prev = sched.alpha_bar[static_cast<std::size_t>(k) - 1];
  const double alpha = sched.alpha[static_cast<std::size_t>(k)];
  const double beta = sched.beta[static_cast<std::size_t>(k)];
  const double pvar = sched.posterior_var[static_cast<std::size_t>(k)];

  const double inv_sqrt_abar = 1.0 / std::sqrt(abar);
  const double sqrt_one_minus = std::sqrt(1.0 - abar);
  const double coef_x0 = std::sqrt(abar_prev) * beta / (1.0 - abar);
  const double coef_tk = std::sqrt(alpha) * (1.0 - abar_prev) / (1.0 - abar);
  const double noise_scale = cfg.variance_scaled_noise ? pvar : std::sqrt(pvar);

  Tensor out(tau_k.shape);
  for (std::size_t i = 0; i < tau_k.numel(); ++i) {
    double x0 = (tau_k.data[i] - sqrt_one_minus * eps_bar.data[i]) * inv_sqrt_abar;
    if (cfg.clip_x0) x0 = std::min(1.0, std::max(-1.0, x0));
    out.data[i] = coef_x0 * x0 + coef_tk * tau_k.data[i] + noise_scale * z.data[i];
  }
  return out;
}

Tensor sample_sequences_with(const NoiseFn& noise_fn, const std::vector<TemporalCondition>& conds,
                             int L, int d_s, const NoiseSchedule& sched, const GuidanceConfig& cfg,
                             Rng& rng) {
  const int B = static_cast<int>(conds.size());
  if (B == 0) throw std::invalid_argument("sample_sequences: no conditions given");
  Tensor x({B, L, d_s});
  for (double& v : x.data) v = rng.normal();

  Tensor z({B, L, d_s});
  for (int k = sched.K; k >= 1; --k) {
    apply_inpainting(x, conds);
    const Tensor eps_bar = noise_fn(x, k);
    if (k > 1) {
      for (double& v : z.data) v = rng.normal();
    } else {
      z.fill(0.0);
    }
    x = denoise_step(x, eps_bar, k, sched, z, cfg);
  }
  apply_inpainting(x, conds);
  check_finite(x, "sampled sequence");
  return x;
}

Tensor sample_sequences(const DenoiserConfig& cfg, const ParamSet& theta,
                        const std::vector<TemporalCondition>& conds, int L,
                        const NoiseSchedule& sched, const GuidanceConfig& gcfg, Rng& rng) {
  const int B = static_cast<int>(conds.size());
  Tensor scalars({B, cfg.cond_dim});
  for (int i = 0; i < B; ++i) {
    const Tensor sv = conds[static_cast<std::size_t>(i)].scalar_vector();
    for (int j = 0; j < cfg.cond_dim; ++j) scalars.at(i, j) = sv.at(j);
  }
  const NoiseFn fn = [&](const Tensor& x, int k) {
    return guided_noise_batch(cfg, theta, x, k, scalars, gcfg.omega);
  };
  return sample_sequences_with(fn, conds, L, cfg.d_s, sched, gcfg, rng);
}

Tensor sample_sequence(const DenoiserConfig& cfg, const ParamSet& theta,
                       const TemporalCondition& cond, int L, const NoiseSchedule& sched,
                       const GuidanceConfig& gcfg, Rng& rng) {
  const Tensor out = sample_sequences(cfg, theta, {cond}, L, sched, gcfg, rng);
  return Tensor({L, cfg.d_s}, out.data);
}

}  // namespace tcd
