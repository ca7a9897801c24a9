#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tcd/data.hpp"
#include "tcd/rng.hpp"
#include "tcd/tensor.hpp"

namespace tcd {

enum class EnvKind { Historical, Immediate, Prospective };

EnvKind env_kind_from_string(const std::string& s);
std::string to_string(EnvKind k);

// Planar branching environment. Each class follows a fixed template path of
// 2h unit steps; episodes are the templates plus Gaussian state jitter with
// actions equal to consecutive state deltas. Histories of all classes meet
// at the junction (historical/immediate kinds); rewards are chosen so the
// class structure is only visible through the intended temporal condition.
struct EnvSpec {
  EnvKind kind = EnvKind::Historical;
  int h = 10;
  double sigma = 0.01;
  double step_size = 0.05;
  int d_s = 2, d_a = 2;
  std::vector<double> junction{0.0, 0.0};
  std::vector<std::string> class_names;
  std::vector<Tensor> templates;                 // per class: (2h+1, 2), last row extrapolated
  std::vector<std::vector<double>> reward_rules;  // per class: 2h per-step rewards

  static EnvSpec make(EnvKind kind, int h, double sigma);
  int num_classes() const { return static_cast<int>(templates.size()); }
  int episode_len() const { return 2 * h; }
  int t_max() const { return 2 * h; }
};

struct BranchLabel {
  int index = 0;
  std::string name;
};

// Nearest template point to s over (class, timestep); ties resolve to the
// lowest class index, then the lowest timestep.
std::pair<int, int> nearest_template(const EnvSpec& spec, const double* s);

// s' = s + a; the reward is the class rule at the template point nearest to
// s' (arriving at template index m pays the step reward into m).
std::pair<std::vector<double>, double> env_step(const EnvSpec& spec, const std::vector<double>& s,
                                                const std::vector<double>& a);

// Mean squared distance of the window to each class template, aligned at
// absolute timestep start_time. Raw (unnormalized) state space.
std::vector<double> branch_distances(const EnvSpec& spec, const Tensor& window, int start_time);

// Oracle classifier: argmin of branch_distances; ties resolve to the
// lowest class index.
BranchLabel classify_branch(const EnvSpec& spec, const Tensor& window, int start_time);

Dataset generate_historical_dataset(int n, int h, double sigma, std::uint64_t seed);
Dataset generate_immediate_dataset(int n, int h, double sigma, std::uint64_t seed);
Dataset generate_prospective_dataset(int n, int h, double sigma, std::uint64_t seed);
Dataset generate_dataset(EnvKind kind, int n, int h, double sigma, std::uint64_t seed);

// Stateful rollout wrapper around env_step with the episode time limit.
class Env {
 public:
  explicit Env(EnvSpec spec) : spec_(std::move(spec)) {}

  // Start state of the given class template plus jitter.
  std::vector<double> reset(Rng& rng, int start_class = 0);

  struct StepOut {
    std::vector<double> state;
    double reward = 0.0;
    bool done = false;
  };
  StepOut step(const std::vector<double>& action);

  int t() const { return t_; }
  const EnvSpec& spec() const { return spec_; }

 private:
  EnvSpec spec_;
  std::vector<double> s_;
  int t_ = 0;
  bool active_ = false;
};

}  // namespace tcd
