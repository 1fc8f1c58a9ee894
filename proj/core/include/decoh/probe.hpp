#pragma once

// Apparatus and environment particles on a 1D lattice, their couplings to
// the Schwinger chain and to each other, and the full tripartite Hamiltonian
//
//   H = (H_S (x) 1_A + H_SA) (x) 1_E + 1_S (x) (H_A (x) 1_E + 1_A (x) H_E + H_AE).

#include <vector>

#include "decoh/schwinger.hpp"
#include "decoh/tensor.hpp"

namespace decoh {

enum class Boundary { HardWall, Periodic };
enum class Particle { Apparatus, Environment };

struct ParticleParams {
  int n_points = 16;  // N_A = N_E
  double spacing = 1.0;  // b
  double mass_apparatus = 10.0;
  double mass_environment = 0.5;
  Boundary boundary = Boundary::HardWall;

  void validate() const;
  /// False when m_A < 10 m_E (allowed, but the apparatus is meant to be heavy).
  bool apparatus_is_heavy() const { return mass_apparatus >= 10.0 * mass_environment; }
  double mass(Particle p) const {
    return p == Particle::Apparatus ? mass_apparatus : mass_environment;
  }
  /// Lattice positions x_j = j b, j = 0..N-1.
  RealVector positions() const;
};

struct CouplingParams {
  double g_sa = 1.0;
  double g_ae = 2.0;
  double sigma = 1.0;

  void validate() const;
};

/// p = -i (psi_{j+1} - psi_{j-1}) / (2b).
Matrix momentum_matrix(const ParticleParams& params);
/// -(psi_{j+1} - 2 psi_j + psi_{j-1}) / (2 m b^2).
Matrix kinetic_matrix(const ParticleParams& params, Particle which);
Matrix position_matrix(const ParticleParams& params);

/// S sites, apparatus, environment.
CompositeSpace full_space(int n_sites, const ParticleParams& params);

/// Copies an operator defined on a Schwinger-only space into the leading
/// factors of `target`.
OperatorExpr embed_leading(const OperatorExpr& op, const CompositeSpace& target);

OperatorExpr momentum_op(const CompositeSpace& space, const ParticleParams& params, Particle which);
OperatorExpr kinetic_op(const CompositeSpace& space, const ParticleParams& params, Particle which);
OperatorExpr position_op(const CompositeSpace& space, const ParticleParams& params, Particle which);

/// g_SA (C_top - <Omega|C_top|Omega>) (x) p_A; `calibrated_ctop` lives on the
/// Schwinger space.
OperatorExpr build_h_sa(const CompositeSpace& space, const OperatorExpr& calibrated_ctop,
                        const ParticleParams& params, const CouplingParams& couplings);

/// Gaussian potential g_AE V(x_A - x_E), one diagonal block on the joint (A, E)
/// factor pair.
OperatorExpr build_h_ae(const CompositeSpace& space, const ParticleParams& params,
                        const CouplingParams& couplings);

/// The pieces of H kept separately for diagnostics.
struct FullHamiltonian {
  CompositeSpace space;
  OperatorExpr h_s;   // embedded
  OperatorExpr h_sa;
  OperatorExpr h_a;
  OperatorExpr h_e;
  OperatorExpr h_ae;
  OperatorExpr total;
};

FullHamiltonian build_full_hamiltonian(const SchwingerOperators& schwinger,
                                       const OperatorExpr& calibrated_ctop,
                                       const ParticleParams& params,
                                       const CouplingParams& couplings);

/// Single-factor state exp(-(x - x0)^2 / (4 w^2) + i k0 x), normalized. Its
/// position variance is w^2 in the continuum.
StateVector gaussian_packet(const ParticleParams& params, Particle which, double center,
                            double width, double momentum = 0.0);

/// Probability mass of a packet within 3w of a hard wall (zero for periodic).
double boundary_weight(const ParticleParams& params, const StateVector& packet, double width);

/// Flat environment state, all amplitudes N^{-1/2}.
StateVector uniform_state(const ParticleParams& params, Particle which = Particle::Environment);

}  // namespace decoh
