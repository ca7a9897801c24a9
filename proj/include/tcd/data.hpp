#pragma once

#include <string>
#include <vector>

#include "tcd/conditioning.hpp"
#include "tcd/rng.hpp"
#include "tcd/tensor.hpp"

namespace tcd {

// One episode. Rewards are undiscounted; episode_return == sum(rewards).
struct Trajectory {
  int id = 0;
  Tensor states;   // (len, d_s)
  Tensor actions;  // (len, d_a)
  std::vector<double> rewards;
  double episode_return = 0.0;

  int length() const { return states.ndim() ? states.dim(0) : 0; }
};

struct Dataset {
  int d_s = 0, d_a = 0;
  int t_max = 0;
  std::vector<Trajectory> trajectories;
  DatasetStats stats;
};

// Descriptor of one training window (stride-1 segmentation).
struct WindowDesc {
  int traj = 0;           // index into dataset.trajectories
  int start = 0;          // window start timestep
  double rtg_raw = 0.0;   // suffix reward sum at `start`
  double first_reward_raw = 0.0;  // reward at the decision index start+T_HC-1 (0 inside padding)
  int valid_len = 0;      // real rows before terminal-state padding
};

// Batch of normalized state windows plus per-window condition scalars.
struct SegmentBatch {
  Tensor states;  // (b, L, d_s), normalized to [-1, 1]
  std::vector<double> rtg_raw;
  std::vector<double> first_reward_raw;
  std::vector<int> start_timestep;
  std::vector<int> source;  // trajectory ids
};

DatasetStats fit_stats(const Dataset& dataset);

// Per-dimension affine map of [state_min, state_max] onto [-1, 1];
// degenerate dimensions map to 0. Works on any (..., d_s) tensor.
Tensor normalize_states(const Tensor& states, const DatasetStats& stats);
Tensor denormalize_states(const Tensor& states, const DatasetStats& stats);
void normalize_state_row(const double* raw, double* out, const DatasetStats& stats);
void denormalize_state_row(const double* norm, double* out, const DatasetStats& stats);

// Stride-1 sliding windows inside each episode. Tail windows are
// right-padded by repeating the final state with zero reward; set
// discard_padded to keep only fully in-episode windows.
std::vector<WindowDesc> segment(const Dataset& dataset, int L, int t_hc, bool discard_padded = false);

// Raw (unnormalized) state window for a descriptor, padding applied.
Tensor window_states(const Dataset& dataset, const WindowDesc& desc, int L);

// Uniform sampling with replacement over window descriptors.
SegmentBatch sample_batch(const Dataset& dataset, const std::vector<WindowDesc>& windows, int L,
                          int b, Rng& rng);

// Binary dataset file: magic, version, header (dims, counts, stats),
// contiguous little-endian float arrays, CRC-32 trailer.
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

// One CSV per trajectory: t, s_0..s_{d_s-1}, a_0..a_{d_a-1}, r.
void export_trajectory_csv(const Dataset& dataset, const Trajectory& traj, const std::string& path);

}  // namespace tcd
