#pragma once

// Drivers for the measurement experiments: branch trajectories for the
// vacuum |Omega>, the pair state |C> and their superposition, pointer-state
// entropies against Haar-random controls, Bures distances to the decohered
// mixture, local per-site maps and the apparatus-size sweep.

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "decoh/probe.hpp"
#include "decoh/propagator.hpp"
#include "decoh/schwinger.hpp"
#include "decoh/tensor.hpp"

namespace decoh {

/// Defaults are the tuned desk-scale setup: a weakly bound pair, a slow
/// environment and an apparatus starting near the bottom of its tube.
struct ExperimentConfig {
  SchwingerParams schwinger{.coupling = 0.3};
  ParticleParams particles{.mass_apparatus = 160.0, .mass_environment = 16.0};
  CouplingParams couplings{.g_ae = 6.0, .sigma = 2.0};
  EvolutionParams evolution{.dt = 1.0, .t_max = 100.0};
  CTopMode ctop_mode = CTopMode::AllButBottomTwo;
  DensityKind ctop_density = DensityKind::Particle;
  /// Apparatus packet; NaN means N_A b / 4 and N_A b / 12.
  double packet_center = 1.5;
  double packet_width = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 20240611;
  int n_random = 5;
  std::vector<int> sweep;  // N_A = N_E values
  /// Time at which the sweep reads d_B; NaN means the time of minimum d_B.
  double probe_time = std::numeric_limits<double>::quiet_NaN();
  double ground_state_tol = 1e-10;

  void validate() const;
  double center() const;
  double width() const;
};

/// Everything that depends on the config but not on the initial state.
struct Setup {
  ExperimentConfig config;
  SchwingerOperators schwinger;
  GroundState omega;
  StateVector pair;  // |C>
  CTop ctop;
  FullHamiltonian hamiltonian;
  CompiledOperator compiled;
  CompiledOperator total_charge;  // on the full space
  CompiledOperator ctop_full;     // calibrated C_top on the full space
  StateVector apparatus0;
  StateVector environment0;
  double packet_boundary_weight = 0.0;

  std::size_t dim_s() const { return schwinger.space.total_dim(); }
  std::size_t dim_a() const { return static_cast<std::size_t>(config.particles.n_points); }
  std::size_t dim_e() const { return static_cast<std::size_t>(config.particles.n_points); }
  std::size_t dim_sa() const { return dim_s() * dim_a(); }
};

Setup prepare(const ExperimentConfig& config);

/// s (x) apparatus0 (x) environment0.
Vector initial_from_system(const Setup& setup, const Vector& s);
/// sa (x) environment0.
Vector initial_from_system_apparatus(const Setup& setup, const Vector& sa);

/// Number of worker threads, from DECOH_NUM_THREADS (default: hardware
/// concurrency, at least 1).
int worker_threads();

/// Evolves all `states` under the setup's Hamiltonian on the common time
/// grid of `params`, calling `visit(t, states)` at t = 0 and at every
/// recorded step. Trajectories advance in parallel; each one is computed
/// identically regardless of the thread count.
void evolve_lockstep(const Setup& setup, std::vector<Vector> states, const EvolutionParams& params,
                     const std::function<void(double, const std::vector<Vector>&)>& visit);

/// Per-site charge, apparatus and environment distributions for the Omega,
/// pair and superposition branches. Series: Q_<branch>_<site>,
/// PA_<branch>_<j>, PE_<branch>_<j>, xA_<branch>, xE_<branch>.
TrajectoryRecord run_charge_density_evolution(const Setup& setup);

struct StudyOptions {
  bool distances = true;
  bool entropies = true;
};

/// The branch study. Series written when `distances`:
///   dB_rho_rhoD, dB_rho_random, dB_random_random, dB_rho_rho0, dB_tilde,
///   ctop_omega, ctop_pair, ctop_super
/// and when `entropies`:
///   S_omega, S_pair, S_random_<k> (k = 1..n_random), S_random_min.
/// Always: norm_/energy_/charge_ series for the omega and pair branches.
TrajectoryRecord run_study(const Setup& setup, const StudyOptions& options);

TrajectoryRecord run_pointer_sieve(const Setup& setup);
TrajectoryRecord run_decoherence_distance(const Setup& setup);

struct LocalMap {
  std::vector<double> times;
  int n_sites = 0;
  // [time][site - 1]
  std::vector<std::vector<double>> coupled;
  std::vector<std::vector<double>> uncoupled;
  std::vector<double> ctop_pair;  // coupled run
};

/// d_B(rho_x, rho_x,D) per site for g_SA as configured and for g_SA = 0.
/// Requires ctop_mode == TopTwo.
LocalMap run_local_decoherence_map(const ExperimentConfig& config);

struct SweepPoint {
  int n_points = 0;
  double min_distance = 0.0;
  double min_distance_time = 0.0;
  double probe_distance = 0.0;
  double entropy_gap = 0.0;  // late-window mean of S_random_min - max(S_omega, S_pair)
};

std::vector<SweepPoint> run_size_sweep(const ExperimentConfig& config);

// Summaries over recorded series.

/// Max over t of |x(t) - x(0)|, optionally relative to max(|x(0)|, 1).
double max_drift(const std::vector<double>& x, bool relative = false);

/// First time at which `signal` reaches `fraction` of its maximum.
double onset_time(const std::vector<double>& times, const std::vector<double>& signal,
                  double fraction = 0.1);

/// Mean of x over records with t >= start_fraction * t_final.
double late_mean(const std::vector<double>& times, const std::vector<double>& x,
                 double start_fraction = 0.5);

}  // namespace decoh
