#pragma once

#include <string>
#include <vector>

namespace tcd {

enum class ScheduleKind { Cosine, Linear };

// Precomputed diffusion schedule. Arrays are 1-based: index k holds the
// step-k value (entry 0 of alpha/beta/posterior_var is unused padding,
// alpha_bar[0] = 1 by definition).
struct NoiseSchedule {
  int K = 0;
  std::vector<double> alpha;          // size K+1
  std::vector<double> beta;           // size K+1, beta_k = 1 - alpha_k
  std::vector<double> alpha_bar;      // size K+1, cumulative product, [0] = 1
  std::vector<double> posterior_var;  // size K+1, (1-abar_{k-1})/(1-abar_k) * beta_k
};

// kind = Cosine: squared-cosine alpha_bar profile.
// kind = Linear: betas linear in k, rescaled by 1000/K from the [1e-4, 2e-2]
// thousand-step baseline, clipped to (0, 0.999].
NoiseSchedule make_schedule(int K, ScheduleKind kind);

// Schedule from explicit per-step alphas (tests and hand-set examples).
NoiseSchedule schedule_from_alphas(const std::vector<double>& alphas);

ScheduleKind schedule_kind_from_string(const std::string& s);
std::string to_string(ScheduleKind k);

}  // namespace tcd
