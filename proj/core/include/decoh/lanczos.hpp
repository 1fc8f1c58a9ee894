#pragma once

#include <cstdint>
#include <vector>

#include "decoh/tensor.hpp"

namespace decoh {

struct LanczosOptions {
  double tol = 1e-10;       // residual ||H v - E v||
  int krylov_dim = 60;      // basis size per restart
  int max_restarts = 50;
  std::uint64_t seed = 12345;
};

struct LanczosResult {
  double energy = 0.0;
  Vector vector;
  double residual = 0.0;
  int iterations = 0;  // total matrix-vector products
  /// Lowest Ritz value after each Lanczos iteration (non-increasing).
  std::vector<double> ritz_history;
};

/// Lowest eigenpair of a Hermitian operator by restarted Lanczos with full
/// reorthogonalization. The start vector is drawn from `seed`. Throws
/// std::runtime_error when the residual does not reach `tol`.
LanczosResult lowest_eigenpair(const CompiledOperator& h, const LanczosOptions& opts = {});

}  // namespace decoh
