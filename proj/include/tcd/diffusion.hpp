#pragma once

#include <functional>
#include <vector>

#include "tcd/conditioning.hpp"
#include "tcd/denoiser.hpp"
#include "tcd/rng.hpp"
#include "tcd/schedule.hpp"
#include "tcd/tape.hpp"

namespace tcd {

struct GuidanceConfig {
  double omega = 1.2;
  double condition_dropout_p = 0.25;
  bool clip_x0 = true;
  // Noise scaled by the posterior variance instead of its square root
  // (the literal reading of the sampling equation); off by default.
  bool variance_scaled_noise = false;
};

// sqrt(abar_k) * tau0 + sqrt(1 - abar_k) * eps. Shapes must match; same k
// for every element.
Tensor forward_noise(const Tensor& tau0, int k, const Tensor& eps, const NoiseSchedule& sched);

// Per-row diffusion steps for a (B, ...) batch.
Tensor forward_noise_batch(const Tensor& tau0, const std::vector<int>& k_batch, const Tensor& eps,
                           const NoiseSchedule& sched);

struct LossResult {
  double loss = 0.0;
  ParamSet grads;
};

// Noise-prediction MSE over the batch plus gradients w.r.t. theta.
// cond_batch is the (B, 3) scalar condition matrix (dropout already applied).
// Rows flagged in inpaint_rows simulate history conditioning: the first
// t_hc positions of the noisy input are replaced by the clean window values
// and masked out of the loss, matching what the sampler produces when it
// inpaints a history window.
LossResult training_loss(const DenoiserConfig& cfg, const ParamSet& theta, const Tensor& tau0_batch,
                         const Tensor& cond_batch, const std::vector<int>& k_batch,
                         const Tensor& eps_batch, const NoiseSchedule& sched, int t_hc = 0,
                         const std::vector<char>& inpaint_rows = {});

// Loss only, no gradients (used by finite-difference checks).
double training_loss_value(const DenoiserConfig& cfg, const ParamSet& theta, const Tensor& tau0_batch,
                           const Tensor& cond_batch, const std::vector<int>& k_batch,
                           const Tensor& eps_batch, const NoiseSchedule& sched, int t_hc = 0,
                           const std::vector<char>& inpaint_rows = {});

// Classifier-free composition eps_null + omega * (eps_cond - eps_null),
// with the conditional and unconditional passes stacked into one forward.
// x is a (B, L, d_s) batch sharing the diffusion step k.
Tensor guided_noise_batch(const DenoiserConfig& cfg, const ParamSet& theta, const Tensor& x, int k,
                          const Tensor& cond_scalars, double omega);

// Single-window convenience wrapper: x is (L, d_s) or (1, L, d_s).
Tensor guided_noise(const DenoiserConfig& cfg, const ParamSet& theta, const Tensor& x,
                    const TemporalCondition& cond, int k, double omega);

// One reverse step of the sampler: posterior mean of the clipped x0
// estimate plus sqrt(posterior_var) * z. z must be zero at k == 1.
Tensor denoise_step(const Tensor& tau_k, const Tensor& eps_bar, int k, const NoiseSchedule& sched,
                    const Tensor& z, const GuidanceConfig& cfg);

// Batch noise predictor: (B, L, d_s) iterate and shared step k -> eps_bar.
using NoiseFn = std::function<Tensor(const Tensor& x, int k)>;

// Full K..1 sampling loop with per-step inpainting of each row's history
// (and goal, when set), seeded from standard normal noise. Returns
// (B, L, d_s); inpainting is applied once more to the final output.
Tensor sample_sequences_with(const NoiseFn& noise_fn, const std::vector<TemporalCondition>& conds,
                             int L, int d_s, const NoiseSchedule& sched, const GuidanceConfig& cfg,
                             Rng& rng);

Tensor sample_sequences(const DenoiserConfig& cfg, const ParamSet& theta,
                        const std::vector<TemporalCondition>& conds, int L,
                        const NoiseSchedule& sched, const GuidanceConfig& gcfg, Rng& rng);

// (L, d_s) single-condition form.
Tensor sample_sequence(const DenoiserConfig& cfg, const ParamSet& theta,
                       const TemporalCondition& cond, int L, const NoiseSchedule& sched,
                       const GuidanceConfig& gcfg, Rng& rng);

}  // namespace tcd
