#include "tcd/envs.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcd {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> unit(double degrees) {
  const double r = degrees * kPi / 180.0;
  return {std::cos(r), std::sin(r)};
}

// Template path: h approach steps ending exactly at the junction, then h
// branch steps away from it, plus one extrapolated row used by env_step.
Tensor build_template(const std::vector<double>& junction, double in_deg, double out_deg, int h,
                      double step) {
  const std::vector<double> u = unit(in_deg);
  const std::vector<double> v = unit(out_deg);
  Tensor t({2 * h + 1, 2});
  for (int j = 0; j < h; ++j)
    for (int c = 0; c < 2; ++c) t.at(j, c) = junction[static_cast<std::size_t>(c)] - (h - 1 - j) * step * u[static_cast<std::size_t>(c)];
  for (int j = h; j <= 2 * h; ++j)
    for (int c = 0; c < 2; ++c) t.at(j, c) = junction[static_cast<std::size_t>(c)] + (j - h + 1) * step * v[static_cast<std::size_t>(c)];
  return t;
}

// Straight ray from the origin (both prospective families share row 0).
Tensor build_ray(double deg, int h, double step) {
  const std::vector<double> v = unit(deg);
  Tensor t({2 * h + 1, 2});
  for (int j = 0; j <= 2 * h; ++j)
    for (int c = 0; c < 2; ++c) t.at(j, c) = j * step * v[static_cast<std::size_t>(c)];
  return t;
}

Dataset generate(const EnvSpec& spec, int n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.d_s = spec.d_s;
  d.d_a = spec.d_a;
  d.t_max = spec.t_max();
  const int len = spec.episode_len();
  d.trajectories.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int cls = i % spec.num_classes();
    const Tensor& tmpl = spec.templates[static_cast<std::size_t>(cls)];
    Trajectory tr;
    tr.id = i;
    tr.states = Tensor({len, 2});
    tr.actions = Tensor({len, 2});
    tr.rewards = spec.reward_rules[static_cast<std::size_t>(cls)];
    for (int t = 0; t < len; ++t)
      for (int c = 0; c < 2; ++c)
        tr.states.at(t, c) = tmpl.at(t, c) + spec.sigma * rng.normal_clamped(3.0);
    for (int t = 0; t + 1 < len; ++t)
      for (int c = 0; c < 2; ++c) tr.actions.at(t, c) = tr.states.at(t + 1, c) - tr.states.at(t, c);
    for (int c = 0; c < 2; ++c) tr.actions.at(len - 1, c) = tmpl.at(len, c) - tmpl.at(len - 1, c);
    for (double r : tr.rewards) tr.episode_return += r;
    d.trajectories.push_back(std::move(tr));
  }
  d.stats = fit_stats(d);
  return d;
}

}  // namespace

EnvKind env_kind_from_string(const std::string& s) {
  if (s == "historical") return EnvKind::Historical;
  if (s == "immediate") return EnvKind::Immediate;
  if (s == "prospective") return EnvKind::Prospective;
  throw std::invalid_argument("unknown env kind: " + s);
}

std::string to_string(EnvKind k) {
  switch (k) {
    case EnvKind::Historical: return "historical";
    case EnvKind::Immediate: return "immediate";
    default: return "prospective";
  }
}

EnvSpec EnvSpec::make(EnvKind kind, int h, double sigma) {
  if (h < 1) throw std::invalid_argument("env: h must be positive");
  if (sigma < 0) throw std::invalid_argument("env: sigma must be non-negative");
  EnvSpec s;
  s.kind = kind;
  s.h = h;
  s.sigma = sigma;
  const int len = 2 * h;
  switch (kind) {
    case EnvKind::Historical: {
      if (h < 5) throw std::invalid_argument("historical env: h must be >= 5");
      // Three approach rays into the junction; the 135-degree history is the
      // only one that unlocks the middle branch.
      s.class_names = {"approach90", "approach135", "approach180"};
      const double in_deg[3] = {90.0, 135.0, 180.0};
      const double out_deg[3] = {45.0, 90.0, 135.0};
      for (int c = 0; c < 3; ++c) {
        s.templates.push_back(build_template(s.junction, in_deg[c], out_deg[c], h, s.step_size));
        s.reward_rules.emplace_back(static_cast<std::size_t>(len), 1.0);
      }
      break;
    }
    case EnvKind::Immediate: {
      if (h < 5) throw std::invalid_argument("immediate env: h must be >= 5");
      // Shared history; branches differ in the junction-action reward, with
      // the low class compensated over its last five steps so returns match.
      s.class_names = {"high", "low"};
      s.templates.push_back(build_template(s.junction, 90.0, 45.0, h, s.step_size));
      s.templates.push_back(build_template(s.junction, 90.0, 135.0, h, s.step_size));
      std::vector<double> high(static_cast<std::size_t>(len), 0.0);
      std::vector<double> low(static_cast<std::size_t>(len), 0.0);
      for (int t = 0; t < h - 1; ++t) high[static_cast<std::size_t>(t)] = low[static_cast<std::size_t>(t)] = 1.0;
      high[static_cast<std::size_t>(h - 1)] = 10.0;
      low[static_cast<std::size_t>(h - 1)] = 0.0;
      for (int t = len - 5; t < len; ++t) low[static_cast<std::size_t>(t)] = 2.0;
      s.reward_rules = {high, low};
      break;
    }
    case EnvKind::Prospective: {
      // Two spatially separated rays from the origin; complementary reward
      // masks keep both family returns equal to h.
      s.class_names = {"up", "down"};
      s.templates.push_back(build_ray(45.0, h, s.step_size));
      s.templates.push_back(build_ray(-45.0, h, s.step_size));
      std::vector<double> up(static_cast<std::size_t>(len), 0.0);
      std::vector<double> down(static_cast<std::size_t>(len), 0.0);
      for (int t = h; t < len; ++t) up[static_cast<std::size_t>(t)] = 1.0;
      for (int t = 0; t < h; ++t) down[static_cast<std::size_t>(t)] = 1.0;
      s.reward_rules = {up, down};
      break;
    }
  }
  return s;
}

std::pair<int, int> nearest_template(const EnvSpec& spec, const double* s) {
  int best_c = 0, best_m = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int c = 0; c < spec.num_classes(); ++c) {
    const Tensor& t = spec.templates[static_cast<std::size_t>(c)];
    for (int m = 0; m < t.dim(0); ++m) {
      const double dx = s[0] - t.at(m, 0), dy = s[1] - t.at(m, 1);
      const double d2 = dx * dx + dy * dy;
      if (d2 < best) {
        best = d2;
        best_c = c;
        best_m = m;
      }
    }
  }
  return {best_c, best_m};
}

std::pair<std::vector<double>, double> env_step(const EnvSpec& spec, const std::vector<double>& s,
                                                const std::vector<double>& a) {
  if (s.size() != 2 || a.size() != 2) throw std::invalid_argument("env_step: states and actions are 2-d");
  const std::vector<double> next{s[0] + a[0], s[1] + a[1]};
  const auto [cls, m] = nearest_template(spec, next.data());
  const double r = m >= 1 ? spec.reward_rules[static_cast<std::size_t>(cls)][static_cast<std::size_t>(m - 1)] : 0.0;
  return {next, r};
}

std::vector<double> branch_distances(const EnvSpec& spec, const Tensor& window, int start_time) {
  if (window.ndim() != 2 || window.dim(1) != spec.d_s)
    throw std::invalid_argument("classify_branch: window must be (m, d_s)");
  if (window.dim(0) < 2) throw std::invalid_argument("classify_branch: window length must be >= 2");
  const int m = window.dim(0);
  const int last = spec.episode_len() - 1;
  std::vector<double> dists(static_cast<std::size_t>(spec.num_classes()), 0.0);
  for (int c = 0; c < spec.num_classes(); ++c) {
    const Tensor& t = spec.templates[static_cast<std::size_t>(c)];
    double err = 0.0;
    for (int j = 0; j < m; ++j) {
      const int idx = std::min(std::max(start_time + j, 0), last);
      const double dx = window.at(j, 0) - t.at(idx, 0);
      const double dy = window.at(j, 1) - t.at(idx, 1);
      err += dx * dx + dy * dy;
    }
    dists[static_cast<std::size_t>(c)] = err / m;
  }
  return dists;
}

BranchLabel classify_branch(const EnvSpec& spec, const Tensor& window, int start_time) {
  const std::vector<double> dists = branch_distances(spec, window, start_time);
  int best_c = 0;
  for (int c = 1; c < spec.num_classes(); ++c)
    if (dists[static_cast<std::size_t>(c)] < dists[static_cast<std::size_t>(best_c)]) best_c = c;
  return {best_c, spec.class_names[static_cast<std::size_t>(best_c)]};
}

Dataset generate_historical_dataset(int n, int h, double sigma, std::uint64_t seed) {
  if (n <= 0 || n % 3 != 0) throw std::invalid_argument("historical dataset: n must be a positive multiple of 3");
  return generate(EnvSpec::make(EnvKind::Historical, h, sigma), n, seed);
}

Dataset generate_immediate_dataset(int n, int h, double sigma, std::uint64_t seed) {
  if (n <= 0 || n % 2 != 0) throw std::invalid_argument("immediate dataset: n must be a positive even number");
  return generate(EnvSpec::make(EnvKind::Immediate, h, sigma), n, seed);
}

Dataset generate_prospective_dataset(int n, int h, double sigma, std::uint64_t seed) {
  if (n <= 0 || n % 2 != 0) throw std::invalid_argument("prospective dataset: n must be a positive even number");
  return generate(EnvSpec::make(EnvKind::Prospective, h, sigma), n, seed);
}

Dataset generate_dataset(EnvKind kind, int n, int h, double sigma, std::uint64_t seed) {
  switch (kind) {
    case EnvKind::Historical: return generate_historical_dataset(n, h, sigma, seed);
    case EnvKind::Immediate: return generate_immediate_dataset(n, h, sigma, seed);
    default: return generate_prospective_dataset(n, h, sigma, seed);
  }
}

std::vector<double> Env::reset(Rng& rng, int start_class) {
  if (start_class < 0 || start_class >= spec_.num_classes())
    throw std::invalid_argument("env reset: class index out of range");
  const Tensor& t = spec_.templates[static_cast<std::size_t>(start_class)];
  s_ = {t.at(0, 0) + spec_.sigma * rng.normal_clamped(3.0),
        t.at(0, 1) + spec_.sigma * rng.normal_clamped(3.0)};
  t_ = 0;
  active_ = true;
  return s_;
}

Env::StepOut Env::step(const std::vector<double>& action) {
  if (!active_) throw std::logic_error("env step before reset or after done");
  auto [next, r] = env_step(spec_, s_, action);
  s_ = std::move(next);
  t_ += 1;
  StepOut out{s_, r, t_ >= spec_.t_max()};
  if (out.done) active_ = false;
  return out;
}

}  // namespace tcd
