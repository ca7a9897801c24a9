#include "tcd/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tcd {

namespace {

constexpr double kPi = 3.14159265358979323846;

NoiseSchedule from_betas(int K, const std::vector<double>& betas_raw) {
  NoiseSchedule s;
  s.K = K;
  s.alpha.assign(static_cast<std::size_t>(K) + 1, 1.0);
  s.beta.assign(static_cast<std::size_t>(K) + 1, 0.0);
  s.alpha_bar.assign(static_cast<std::size_t>(K) + 1, 1.0);
  s.posterior_var.assign(static_cast<std::size_t>(K) + 1, 0.0);
  for (int k = 1; k <= K; ++k) {
    double b = betas_raw[static_cast<std::size_t>(k) - 1];
    if (b < 1e-12) b = 1e-12;
    if (b > 0.999) b = 0.999;
    const double a = 1.0 - b;
    s.alpha[k] = a;
    s.beta[k] = 1.0 - a;  // re-derived so alpha_k + beta_k == 1 exactly
    s.alpha_bar[k] = s.alpha_bar[k - 1] * a;
    s.posterior_var[k] = (1.0 - s.alpha_bar[k - 1]) / (1.0 - s.alpha_bar[k]) * s.beta[k];
  }
  return s;
}

}  // namespace

NoiseSchedule make_schedule(int K, ScheduleKind kind) {
  if (K < 1) throw std::invalid_argument("make_schedule: K must be >= 1");
  std::vector<double> betas(static_cast<std::size_t>(K));
  if (kind == ScheduleKind::Cosine) {
    const double s = 0.008;
    auto f = [&](double k) {
      const double x = (k / K + s) / (1.0 + s) * (kPi / 2.0);
      const double c = std::cos(x);
      return c * c;
    };
    const double f0 = f(0.0);
    double prev = 1.0;
    for (int k = 1; k <= K; ++k) {
      const double abar = f(static_cast<double>(k)) / f0;
      betas[static_cast<std::size_t>(k) - 1] = 1.0 - abar / prev;
      prev = abar;
    }
  } else {
    const double scale = 1000.0 / K;
    const double lo = 1e-4 * scale, hi = 2e-2 * scale;
    for (int k = 1; k <= K; ++k) {
      const double t = K > 1 ? static_cast<double>(k - 1) / (K - 1) : 0.0;
      betas[static_cast<std::size_t>(k) - 1] = lo + (hi - lo) * t;
    }
  }
  NoiseSchedule sched = from_betas(K, betas);
  if (sched.alpha_bar[static_cast<std::size_t>(K)] >= 0.01)
    throw std::runtime_error("make_schedule: alpha_bar at K is not close to zero");
  return sched;
}

NoiseSchedule schedule_from_alphas(const std::vector<double>& alphas) {
  if (alphas.empty()) throw std::invalid_argument("schedule_from_alphas: empty");
  std::vector<double> betas;
  betas.reserve(alphas.size());
  for (double a : alphas) {
    if (a <= 0.0 || a > 1.0) throw std::invalid_argument("schedule_from_alphas: alpha out of (0,1]");
    betas.push_back(1.0 - a);
  }
  return from_betas(static_cast<int>(alphas.size()), betas);
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
  if (s == "cosine") return ScheduleKind::Cosine;
  if (s == "linear") return ScheduleKind::Linear;
  throw std::invalid_argument("unknown schedule kind: " + s);
}

std::string to_string(ScheduleKind k) { return k == ScheduleKind::Cosine ? "cosine" : "linear"; }

}  // namespace tcd
