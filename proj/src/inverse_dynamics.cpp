#include "tcd/inverse_dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace tcd {

namespace {

Tensor init_weight(std::vector<int> shape, int fan_in, Rng& rng) {
  Tensor w(std::move(shape));
  const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : w.data) v = scale * rng.normal();
  return w;
}

}  // namespace

ParamSet init_inverse_dynamics(const InverseDynamicsConfig& cfg, Rng& rng) {
  ParamSet p;
  const int in = 2 * cfg.d_s;
  p.add("l1.w", init_weight({in, cfg.hidden}, in, rng));
  p.add("l1.b", Tensor::zeros({cfg.hidden}));
  p.add("l2.w", init_weight({cfg.hidden, cfg.hidden}, cfg.hidden, rng));
  p.add("l2.b", Tensor::zeros({cfg.hidden}));
  p.add("l3.w", init_weight({cfg.hidden, cfg.d_a}, cfg.hidden, rng));
  p.add("l3.b", Tensor::zeros({cfg.d_a}));
  return p;
}

int inverse_dynamics_forward(Tape& tape, const InverseDynamicsConfig& cfg,
                             const std::vector<int>& param_nodes, int x) {
  if (param_nodes.size() != 6) throw std::invalid_argument("inverse dynamics: expected 6 parameter blocks");
  const Tensor& xv = tape.value(x);
  if (xv.dim(xv.ndim() - 1) != 2 * cfg.d_s)
    throw std::invalid_argument("inverse dynamics: input width must be 2*d_s");
  int h = tape.silu(tape.linear(x, param_nodes[0], param_nodes[1]));
  h = tape.silu(tape.linear(h, param_nodes[2], param_nodes[3]));
  return tape.linear(h, param_nodes[4], param_nodes[5]);
}

Tensor inverse_dynamics_eval(const InverseDynamicsConfig& cfg, const ParamSet& phi, const Tensor& pairs) {
  Tape tape(false);
  const std::vector<int> ids = bind_params(tape, phi, false);
  const int x = tape.leaf(pairs);
  return tape.value(inverse_dynamics_forward(tape, cfg, ids, x));
}

std::vector<double> infer_action(const InverseDynamicsConfig& cfg, const ParamSet& phi,
                                 const std::vector<double>& s_t_norm,
                                 const std::vector<double>& s_next_norm) {
  if (static_cast<int>(s_t_norm.size()) != cfg.d_s || static_cast<int>(s_next_norm.size()) != cfg.d_s)
    throw std::invalid_argument("infer_action: state dimension mismatch");
  Tensor in({1, 2 * cfg.d_s});
  for (int j = 0; j < cfg.d_s; ++j) {
    in.at(0, j) = s_t_norm[static_cast<std::size_t>(j)];
    in.at(0, cfg.d_s + j) = s_next_norm[static_cast<std::size_t>(j)];
  }
  const Tensor out = inverse_dynamics_eval(cfg, phi, in);
  return out.data;
}

}  // namespace tcd
