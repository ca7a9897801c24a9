#pragma once

#include <string>

#include "tcd/conditioning.hpp"
#include "tcd/denoiser.hpp"
#include "tcd/diffusion.hpp"
#include "tcd/inverse_dynamics.hpp"
#include "tcd/schedule.hpp"

namespace tcd {

// Self-describing binary checkpoint. Byte layout (little-endian):
//   magic   8 bytes "TCDCKPT1"
//   version u32 (currently 1)
//   denoiser hyperparameters: d_s, levels, base_width, kernel, embed_dim,
//     cond_dim (u32 each)
//   inverse dynamics hyperparameters: d_s, d_a, hidden (u32 each)
//   schedule definition: kind u8 (0 cosine, 1 linear), K u32
//   guidance: omega f64, condition_dropout_p f64, clip_x0 u8,
//     variance_scaled_noise u8
//   window layout: L u32, T_HC u32
//   dataset statistics: d_s u32, state_min f64[d_s], state_max f64[d_s],
//     T_min f64, T_max f64, r_min f64, r_max f64, t_max u32
//   two parameter sets (denoiser then inverse dynamics), each:
//     count u32, then per block: name (u32 length + bytes),
//     ndim u32, dims u32[ndim], values f64[numel]
//   crc32 u32 over everything above
struct Checkpoint {
  DenoiserConfig dcfg;
  InverseDynamicsConfig icfg;
  ScheduleKind sched_kind = ScheduleKind::Cosine;
  int K = 200;
  GuidanceConfig gcfg;
  int L = 20;
  int t_hc = 5;
  DatasetStats stats;
  ParamSet theta;
  ParamSet phi;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tcd
