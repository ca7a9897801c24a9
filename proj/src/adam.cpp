#include "tcd/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace tcd {

AdamState AdamState::init(const ParamSet& params, AdamConfig cfg) {
  if (cfg.lr <= 0 || cfg.beta1 <= 0 || cfg.beta2 <= 0 || cfg.eps <= 0)
    throw std::invalid_argument("adam: hyperparameters must be positive");
  AdamState s;
  s.cfg = cfg;
  for (const Tensor& t : params.tensors) {
    s.m.push_back(Tensor::zeros(t.shape));
    s.v.push_back(Tensor::zeros(t.shape));
  }
  return s;
}

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: parameter/gradient block count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params.tensors[i].same_shape(grads.tensors[i]))
      throw std::invalid_argument("adam_step: shape mismatch in block " + params.names[i]);
    if (!grads.tensors[i].all_finite())
      throw std::runtime_error("adam_step: non-finite gradient in block " + params.names[i]);
  }

  state.step += 1;
  const double b1 = state.cfg.beta1, b2 = state.cfg.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t bi = 0; bi < params.size(); ++bi) {
    Tensor& p = params.tensors[bi];
    const Tensor& g = grads.tensors[bi];
    Tensor& m = state.m[bi];
    Tensor& v = state.v[bi];
    for (std::size_t i = 0; i < p.numel(); ++i) {
      m.data[i] = b1 * m.data[i] + (1.0 - b1) * g.data[i];
      v.data[i] = b2 * v.data[i] + (1.0 - b2) * g.data[i] * g.data[i];
      const double mhat = m.data[i] / corr1;
      const double vhat = v.data[i] / corr2;
      p.data[i] -= state.cfg.lr * mhat / (std::sqrt(vhat) + state.cfg.eps);
    }
  }
}

}  // namespace tcd
