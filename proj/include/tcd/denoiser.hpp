#pragma once

#include "tcd/rng.hpp"
#include "tcd/tape.hpp"

namespace tcd {

// Temporal U-net over (B, L, d_s) state windows: 1-d convolutions along
// time with stride-2 downsampling, nearest-neighbour upsampling and skip
// concatenation. The diffusion step enters through a sinusoidal embedding,
// the 3-scalar condition vector through its own embedding added on top;
// the zero vector plays the unconditional role.
struct DenoiserConfig {
  int d_s = 2;
  int levels = 3;
  int base_width = 32;
  int kernel = 5;
  int embed_dim = 32;
  int cond_dim = 3;

  // Channel plan: base width at the top level, doubled below.
  int width(int level) const { return level == 0 ? base_width : 2 * base_width; }
};

ParamSet init_denoiser(const DenoiserConfig& cfg, Rng& rng);

// Sequence length must be divisible by 2^(levels-1).
void check_denoiser_input(const DenoiserConfig& cfg, int L);

// Builds the forward graph on the tape and returns the output node id,
// shaped like x_noisy (B, L, d_s). k_steps holds one diffusion step per
// batch row; cond is the (B, cond_dim) scalar condition matrix.
int denoiser_forward(Tape& tape, const DenoiserConfig& cfg, const ParamSet& params,
                     const std::vector<int>& param_nodes, int x_noisy,
                     const std::vector<int>& k_steps, const Tensor& cond);

// Plain eval entry point: no gradients, returns the predicted noise.
Tensor denoiser_eval(const DenoiserConfig& cfg, const ParamSet& params, const Tensor& x_noisy,
                     const std::vector<int>& k_steps, const Tensor& cond);

Tensor sinusoidal_embedding(const std::vector<int>& k_steps, int dim);

}  // namespace tcd
