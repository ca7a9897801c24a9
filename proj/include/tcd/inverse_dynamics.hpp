#pragma once

#include "tcd/rng.hpp"
#include "tcd/tape.hpp"

namespace tcd {

// Two-hidden-layer MLP mapping a concatenated normalized state pair
// (s_t, s_{t+1}) to the raw action of the transition.
struct InverseDynamicsConfig {
  int d_s = 2;
  int d_a = 2;
  int hidden = 64;
};

ParamSet init_inverse_dynamics(const InverseDynamicsConfig& cfg, Rng& rng);

// x: (N, 2*d_s) -> (N, d_a) node id.
int inverse_dynamics_forward(Tape& tape, const InverseDynamicsConfig& cfg,
                             const std::vector<int>& param_nodes, int x);

// Batch evaluation without gradients.
Tensor inverse_dynamics_eval(const InverseDynamicsConfig& cfg, const ParamSet& phi, const Tensor& pairs);

// Pure single-pair inference; both states in normalized space.
std::vector<double> infer_action(const InverseDynamicsConfig& cfg, const ParamSet& phi,
                                 const std::vector<double>& s_t_norm,
                                 const std::vector<double>& s_next_norm);

}  // namespace tcd
