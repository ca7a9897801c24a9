#include "tcd/data.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "tcd/binio.hpp"

namespace tcd {

namespace {
constexpr char kMagic[9] = "TCDDATA1";
constexpr std::uint32_t kVersion = 1;
}  // namespace

DatasetStats fit_stats(const Dataset& dataset) {
  if (dataset.trajectories.empty()) throw std::runtime_error("fit_stats: empty dataset");
  const double inf = std::numeric_limits<double>::infinity();
  DatasetStats s;
  s.d_s = dataset.d_s;
  s.state_min.assign(static_cast<std::size_t>(dataset.d_s), inf);
  s.state_max.assign(static_cast<std::size_t>(dataset.d_s), -inf);
  s.r_min = inf;
  s.r_max = -inf;
  s.T_min = inf;
  s.T_max = -inf;
  int max_len = 0;
  for (const Trajectory& tr : dataset.trajectories) {
    max_len = std::max(max_len, tr.length());
    for (int t = 0; t < tr.length(); ++t)
      for (int j = 0; j < dataset.d_s; ++j) {
        const double v = tr.states.at(t, j);
        s.state_min[static_cast<std::size_t>(j)] = std::min(s.state_min[static_cast<std::size_t>(j)], v);
        s.state_max[static_cast<std::size_t>(j)] = std::max(s.state_max[static_cast<std::size_t>(j)], v);
      }
    for (double r : tr.rewards) {
      s.r_min = std::min(s.r_min, r);
      s.r_max = std::max(s.r_max, r);
    }
    s.T_min = std::min(s.T_min, tr.episode_return);
    s.T_max = std::max(s.T_max, tr.episode_return);
  }
  if (max_len == 0) throw std::runtime_error("fit_stats: dataset holds no states");
  s.t_max = dataset.t_max > 0 ? dataset.t_max : max_len;
  return s;
}

void normalize_state_row(const double* raw, double* out, const DatasetStats& stats) {
  for (int j = 0; j < stats.d_s; ++j) {
    const double lo = stats.state_min[static_cast<std::size_t>(j)];
    const double hi = stats.state_max[static_cast<std::size_t>(j)];
    out[j] = hi > lo ? 2.0 * (raw[j] - lo) / (hi - lo) - 1.0 : 0.0;
  }
}

void denormalize_state_row(const double* norm, double* out, const DatasetStats& stats) {
  for (int j = 0; j < stats.d_s; ++j) {
    const double lo = stats.state_min[static_cast<std::size_t>(j)];
    const double hi = stats.state_max[static_cast<std::size_t>(j)];
    out[j] = hi > lo ? (norm[j] + 1.0) * 0.5 * (hi - lo) + lo : lo;
  }
}

Tensor normalize_states(const Tensor& states, const DatasetStats& stats) {
  if (states.ndim() < 1 || states.dim(states.ndim() - 1) != stats.d_s)
    throw std::invalid_argument("normalize_states: last dimension must be d_s");
  Tensor out(states.shape);
  const std::size_t rows = states.numel() / static_cast<std::size_t>(stats.d_s);
  for (std::size_t r = 0; r < rows; ++r)
    normalize_state_row(states.data.data() + r * stats.d_s, out.data.data() + r * stats.d_s, stats);
  return out;
}

Tensor denormalize_states(const Tensor& states, const DatasetStats& stats) {
  if (states.ndim() < 1 || states.dim(states.ndim() - 1) != stats.d_s)
    throw std::invalid_argument("denormalize_states: last dimension must be d_s");
  Tensor out(states.shape);
  const std::size_t rows = states.numel() / static_cast<std::size_t>(stats.d_s);
  for (std::size_t r = 0; r < rows; ++r)
    denormalize_state_row(states.data.data() + r * stats.d_s, out.data.data() + r * stats.d_s, stats);
  return out;
}

std::vector<WindowDesc> segment(const Dataset& dataset, int L, int t_hc, bool discard_padded) {
  if (L < 2) throw std::invalid_argument("segment: window length must be >= 2");
  std::vector<WindowDesc> out;
  for (std::size_t ti = 0; ti < dataset.trajectories.size(); ++ti) {
    const Trajectory& tr = dataset.trajectories[ti];
    const int len = tr.length();
    const int last_start = discard_padded ? len - L : len - 1;
    for (int start = 0; start <= last_start; ++start) {
      WindowDesc d;
      d.traj = static_cast<int>(ti);
      d.start = start;
      d.rtg_raw = compute_rtg(tr, start);
      const int decision = start + t_hc - 1;
      d.first_reward_raw = decision < len ? tr.rewards[static_cast<std::size_t>(decision)] : 0.0;
      d.valid_len = std::min(L, len - start);
      out.push_back(d);
    }
  }
  return out;
}

Tensor window_states(const Dataset& dataset, const WindowDesc& desc, int L) {
  const Trajectory& tr = dataset.trajectories[static_cast<std::size_t>(desc.traj)];
  Tensor w({L, dataset.d_s});
  const int len = tr.length();
  for (int i = 0; i < L; ++i) {
    const int src = std::min(desc.start + i, len - 1);
    for (int j = 0; j < dataset.d_s; ++j) w.at(i, j) = tr.states.at(src, j);
  }
  return w;
}

SegmentBatch sample_batch(const Dataset& dataset, const std::vector<WindowDesc>& windows, int L,
                          int b, Rng& rng) {
  if (windows.empty()) throw std::runtime_error("sample_batch: no windows to sample");
  SegmentBatch batch;
  batch.states = Tensor({b, L, dataset.d_s});
  batch.rtg_raw.resize(static_cast<std::size_t>(b));
  batch.first_reward_raw.resize(static_cast<std::size_t>(b));
  batch.start_timestep.resize(static_cast<std::size_t>(b));
  batch.source.resize(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) {
    const WindowDesc& d = windows[rng.uniform_int(windows.size())];
    const Tensor raw = window_states(dataset, d, L);
    const Tensor norm = normalize_states(raw, dataset.stats);
    for (int l = 0; l < L; ++l)
      for (int j = 0; j < dataset.d_s; ++j) batch.states.at(i, l, j) = norm.at(l, j);
    batch.rtg_raw[static_cast<std::size_t>(i)] = d.rtg_raw;
    batch.first_reward_raw[static_cast<std::size_t>(i)] = d.first_reward_raw;
    batch.start_timestep[static_cast<std::size_t>(i)] = d.start;
    batch.source[static_cast<std::size_t>(i)] = dataset.trajectories[static_cast<std::size_t>(d.traj)].id;
  }
  return batch;
}

namespace {

void write_stats(BinWriter& w, const DatasetStats& s) {
  w.u32(static_cast<std::uint32_t>(s.d_s));
  w.f64_array(s.state_min);
  w.f64_array(s.state_max);
  w.f64(s.T_min);
  w.f64(s.T_max);
  w.f64(s.r_min);
  w.f64(s.r_max);
  w.u32(static_cast<std::uint32_t>(s.t_max));
}

DatasetStats read_stats(BinReader& r) {
  DatasetStats s;
  s.d_s = static_cast<int>(r.u32());
  s.state_min = r.f64_array(static_cast<std::size_t>(s.d_s));
  s.state_max = r.f64_array(static_cast<std::size_t>(s.d_s));
  s.T_min = r.f64();
  s.T_max = r.f64();
  s.r_min = r.f64();
  s.r_max = r.f64();
  s.t_max = static_cast<int>(r.u32());
  return s;
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::string& path) {
  BinWriter w;
  w.magic(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(dataset.d_s));
  w.u32(static_cast<std::uint32_t>(dataset.d_a));
  w.u32(static_cast<std::uint32_t>(dataset.t_max));
  w.u32(static_cast<std::uint32_t>(dataset.trajectories.size()));
  write_stats(w, dataset.stats);
  for (const Trajectory& tr : dataset.trajectories) {
    w.u32(static_cast<std::uint32_t>(tr.id));
    w.u32(static_cast<std::uint32_t>(tr.length()));
    w.f64_array(tr.states.data);
    w.f64_array(tr.actions.data);
    w.f64_array(tr.rewards);
    w.f64(tr.episode_return);
  }
  w.save(path);
}

Dataset load_dataset(const std::string& path) {
  BinReader r = BinReader::from_file(path);
  r.expect_magic(kMagic, "dataset");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw std::runtime_error("dataset version mismatch: got " + std::to_string(version) +
                             ", expected " + std::to_string(kVersion));
  r.check_crc("dataset");
  Dataset d;
  d.d_s = static_cast<int>(r.u32());
  d.d_a = static_cast<int>(r.u32());
  d.t_max = static_cast<int>(r.u32());
  const std::uint32_t n = r.u32();
  if (n == 0) throw std::runtime_error("dataset file holds no trajectories");
  d.stats = read_stats(r);
  d.trajectories.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Trajectory tr;
    tr.id = static_cast<int>(r.u32());
    const int len = static_cast<int>(r.u32());
    tr.states = Tensor({len, d.d_s}, r.f64_array(static_cast<std::size_t>(len) * d.d_s));
    tr.actions = Tensor({len, d.d_a}, r.f64_array(static_cast<std::size_t>(len) * d.d_a));
    tr.rewards = r.f64_array(static_cast<std::size_t>(len));
    tr.episode_return = r.f64();
    d.trajectories.push_back(std::move(tr));
  }
  return d;
}

void export_trajectory_csv(const Dataset& dataset, const Trajectory& traj, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "t";
  for (int j = 0; j < dataset.d_s; ++j) os << ",s_" << j;
  for (int j = 0; j < dataset.d_a; ++j) os << ",a_" << j;
  os << ",r\n";
  char buf[64];
  for (int t = 0; t < traj.length(); ++t) {
    os << t;
    for (int j = 0; j < dataset.d_s; ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", traj.states.at(t, j));
      os << buf;
    }
    for (int j = 0; j < dataset.d_a; ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", traj.actions.at(t, j));
      os << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g\n", traj.rewards[static_cast<std::size_t>(t)]);
    os << buf;
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace tcd
