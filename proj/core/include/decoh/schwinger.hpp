#pragma once

// Lattice massive Schwinger model as a spin chain: Kogut-Susskind staggered
// fermions, Jordan-Wigner mapped, open boundaries, gauge field eliminated by
// Gauss's law. Site n = 1..N_S, site 1 is odd. sigma_z|0> = +|0>.
//
//   H_S = 1/(2a) sum_n (s+_n s-_{n+1} + h.c.)
//       + m/2 sum_n (-1)^n (1 + Z_n)
//       + g^2 a / 2 sum_{n<N_S} L_n^2,
//   L_n = eps0 + sum_{k<=n} Q_k,   Q_k = (Z_k + (-1)^k) / 2.

#include <cstdint>
#include <vector>

#include "decoh/tensor.hpp"

namespace decoh {

struct SchwingerParams {
  int n_sites = 8;
  double spacing = 1.0;           // a
  double mass = 0.5;              // m
  double coupling = 1.0;          // g
  double background_field = 0.0;  // eps0

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Which sites the apparatus watches.
enum class CTopMode { AllButBottomTwo, TopTwo };

/// Which local density C_top averages.
///   Particle: n_k = (1 + (-1)^k Z_k)/2, one per electron or positron.
///   Fermion:  nu_k = (1 + Z_k)/2, the raw occupation.
enum class DensityKind { Particle, Fermion };

struct SchwingerOperators {
  SchwingerParams params;
  CompositeSpace space;  // N_S qubits
  OperatorExpr hamiltonian;
  std::vector<OperatorExpr> charge_density;    // Q_n, index n-1
  std::vector<OperatorExpr> fermion_density;   // nu_n
  std::vector<OperatorExpr> particle_density;  // n_n
  OperatorExpr total_charge;

  int n_sites() const { return params.n_sites; }
};

CompositeSpace schwinger_space(int n_sites);

SchwingerOperators build_schwinger(const SchwingerParams& params);

struct GroundState {
  StateVector state;
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Lanczos ground state. The global phase is fixed so the largest-magnitude
/// amplitude is real and positive.
GroundState ground_state(const SchwingerOperators& ops, double tol = 1e-10,
                         std::uint64_t seed = 12345);

/// Staggered product state Z_n = -(-1)^n, the strong-coupling vacuum.
StateVector staggered_state(const SchwingerOperators& ops);

/// Electron-positron pair on sites 1 and 2 on top of the dressed vacuum:
///   |C> = normalize((1 - |Omega><Omega|) s-_1 s+_2 |Omega>).
/// Throws std::runtime_error when the raw pair state has norm < 1e-6, when
/// the net charge is not zero, or when site 1 is not charged.
StateVector charge_pair_state(const SchwingerOperators& ops, const StateVector& omega);

std::vector<int> c_top_sites(int n_sites, CTopMode mode);

struct CTop {
  OperatorExpr op;          // calibrated: average density minus vacuum value
  OperatorExpr raw;         // average density
  double vacuum_value = 0.0;
  std::vector<int> sites;
  CTopMode mode = CTopMode::AllButBottomTwo;
  DensityKind density = DensityKind::Particle;
};

/// Measured operator C_top - <Omega|C_top|Omega> 1.
CTop c_top_operator(const SchwingerOperators& ops, const StateVector& omega, CTopMode mode,
                    DensityKind density = DensityKind::Particle);

}  // namespace decoh
