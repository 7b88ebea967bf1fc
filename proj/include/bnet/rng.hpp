#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace bnet {

// SplitMix64 finalizer. Used wherever a seed has to be mixed into a child
// stream (per-rep seeds, per-node seeds) so streams never overlap.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Child seed for replication/node `index` under a master seed.
inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ mix64(index + 1));
}

// Inverse standard-normal CDF (Acklam's rational approximation plus one
// Halley refinement; accurate to ~1e-15 over (0,1)).
double norm_inv_cdf(double p);

// Standard-normal CDF.
double norm_cdf(double x);

// Seeded random stream. All samplers consume a fixed number of uniforms per
// draw where possible so columns stay reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() { return norm_inv_cdf(uniform_open()); }

  // Gamma(shape, rate) via Marsaglia-Tsang; shape < 1 uses the boost
  // transform.
  double gamma(double shape, double rate);

  // Index draw from a probability simplex by CDF inversion.
  int categorical(std::span<const double> probs);

  std::uint64_t next_u64() { return engine_(); }

 private:
  // Uniform on the open interval (0, 1); safe for inverse-CDF transforms.
  double uniform_open() {
    double u = uniform();
    return u > 0.0 ? u : 0x1.0p-53;
  }

  std::mt19937_64 engine_;
};

}  // namespace bnet
