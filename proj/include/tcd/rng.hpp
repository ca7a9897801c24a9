#pragma once

#include <cstdint>
#include <random>

namespace tcd {

// Deterministic random stream. Uniforms come straight from mt19937_64
// (engine output is pinned by the standard); normals use Box-Muller on
// those uniforms, so sequences are reproducible bit-for-bit for a given
// seed on a given libm.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n);
  // Standard normal.
  double normal();
  // Standard normal clamped to [-c, c].
  double normal_clamped(double c);

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Mixes a seed with a stream tag so independent components get
// decorrelated substreams from one master seed.
std::uint64_t substream(std::uint64_t seed, std::uint64_t tag);

}  // namespace tcd
