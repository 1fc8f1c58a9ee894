#pragma once

// Portable deterministic randomness: mt19937_64 bits turned into doubles and
// Gaussians by hand, so streams agree across standard libraries.

#include <cstdint>
#include <random>
#include <string_view>

#include "decoh/tensor.hpp"

namespace decoh {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Standard normal via Box-Muller.
  double normal();
  /// Standard complex Gaussian: real and imaginary parts each N(0, 1/2).
  cplx complex_normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Per-trajectory seed from the master seed and a label; independent of the
/// order in which trajectories are run.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

Vector random_complex_gaussian(std::size_t n, Rng& rng);

}  // namespace decoh
