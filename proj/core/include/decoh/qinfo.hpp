#pragma once

// Density-matrix kernels: partial trace, von Neumann entropy, Uhlmann
// fidelity and Bures distance, Haar-random states.
//
// Two routes are provided. The dense route works on explicit density
// matrices. The factor route works on matrices M with rho = M M^dagger,
// which is what a pure state traced over its trailing factors gives
// directly; it never forms rho and is the one used on large spaces.

#include <cstdint>
#include <vector>

#include "decoh/tensor.hpp"

namespace decoh {

inline constexpr double kEigenClip = 1e-14;

struct DensityMatrix {
  CompositeSpace space;             // the full space the state lived on
  std::vector<std::size_t> kept;    // ascending factor indices
  Matrix matrix;

  std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
  /// Throws std::domain_error when the matrix is not Hermitian, not of unit
  /// trace, or has an eigenvalue below -tol.
  void validate(double tol = 1e-10) const;
};

/// Tr over every factor not in `keep`. Kept factors appear in ascending
/// order. Throws std::invalid_argument for an empty keep set, a keep set
/// covering every factor, or an out-of-range index.
DensityMatrix partial_trace(const StateVector& psi, std::vector<std::size_t> keep);

/// psi arranged as a dim_keep x dim_traced matrix, so Tr_traced |psi><psi| = M M^dagger.
Matrix reduced_factor(const StateVector& psi, std::vector<std::size_t> keep);

/// Fast path for a leading block [0, n_leading) kept: a reshaped view, no
/// index permutation.
Matrix leading_factor(const Vector& psi, std::size_t dim_leading);

/// Hermitian square root with negative eigenvalues clipped to zero.
Matrix psd_sqrt(const Matrix& rho);

double von_neumann_entropy(const Matrix& rho);
double von_neumann_entropy(const DensityMatrix& rho);
/// Entropy of M M^dagger from the singular values of M.
double entropy_from_factor(const Matrix& m);

double fidelity(const Matrix& rho1, const Matrix& rho2);
double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2);
/// Fid(A A^dagger, B B^dagger) = (sum of singular values of A^dagger B)^2.
double fidelity_from_factors(const Matrix& a, const Matrix& b);

/// sqrt(1 - sqrt(Fid)), clamped to [0, 1].
double bures_from_fidelity(double fid);
double bures_distance(const Matrix& rho1, const Matrix& rho2);
double bures_distance(const DensityMatrix& rho1, const DensityMatrix& rho2);
double bures_from_factors(const Matrix& a, const Matrix& b);

/// Independent standard complex Gaussian amplitudes, normalized.
StateVector haar_random_state(const CompositeSpace& space, std::uint64_t seed);
DensityMatrix random_density_matrix(const CompositeSpace& space, std::vector<std::size_t> keep,
                                    std::uint64_t seed);

/// Haar-random unitary of size d (QR of a Ginibre matrix with phases fixed).
Matrix haar_unitary(std::size_t d, std::uint64_t seed);

}  // namespace decoh
