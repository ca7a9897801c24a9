#pragma once

#include "tcd/tape.hpp"

namespace tcd {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Per-parameter first/second moment accumulators plus the step counter.
struct AdamState {
  AdamConfig cfg;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  long long step = 0;

  static AdamState init(const ParamSet& params, AdamConfig cfg = {});
};

// Standard bias-corrected Adam update, in place. Throws on shape mismatch
// or a non-finite gradient (names the offending parameter block).
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state);

}  // namespace tcd
