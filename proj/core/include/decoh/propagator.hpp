#pragma once

// Time evolution e^{-iHt} psi by Lanczos-Krylov steps, plus a dense
// eigendecomposition propagator for small spaces used as an oracle.

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "decoh/tensor.hpp"

namespace decoh {

struct EvolutionParams {
  double dt = 0.1;
  double t_max = 40.0;
  int krylov_dim = 30;
  double tol = 1e-12;
  int record_every = 1;

  void validate() const;
  int num_steps() const;
};

struct StepStats {
  int substeps = 0;
  int matvecs = 0;
  double error_estimate = 0.0;
  double norm_drift = 0.0;
};

/// Reusable stepping engine for one compiled Hamiltonian.
class KrylovPropagator {
 public:
  KrylovPropagator(const CompiledOperator& h, int krylov_dim, double tol);

  /// e^{-i H dt} psi. Splits dt internally when the truncation estimate is
  /// above tol. Throws std::runtime_error when the norm drifts by more than
  /// 1e-8.
  Vector step(const Vector& psi, double dt, StepStats* stats = nullptr) const;

 private:
  const CompiledOperator* h_;
  int m_;
  double tol_;
};

StateVector evolve_step(const OperatorExpr& h, const StateVector& psi, double dt,
                        const EvolutionParams& params);

struct Observable {
  std::string label;
  std::function<double(const StateVector&)> eval;
};

/// <psi|O|psi> as an Observable.
Observable expectation_observable(std::string label, const OperatorExpr& op);

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<std::pair<std::string, std::vector<double>>> series;
  std::vector<std::pair<double, StateVector>> snapshots;

  std::vector<double>& column(const std::string& label);
  const std::vector<double>& column(const std::string& label) const;
  bool has(const std::string& label) const;
  /// Appends one row; labels are created on first use.
  void push(double t, const std::vector<std::pair<std::string, double>>& values);
  /// Throws when any series length differs from times.
  void check_consistent() const;
};

/// Steps from 0 to t_max recording every `record_every` steps, always
/// including t = 0 and the final time. Adds "norm" and "energy" series.
/// Snapshots are stored at the listed times (matched to the nearest record).
TrajectoryRecord evolve_trajectory(const OperatorExpr& h, const StateVector& psi0,
                                   const EvolutionParams& params,
                                   const std::vector<Observable>& observables,
                                   const std::vector<double>& snapshot_times = {});

/// Dense eigendecomposition propagator, total_dim <= 4096.
class ExactPropagator {
 public:
  explicit ExactPropagator(const OperatorExpr& h, std::size_t max_dim = 4096);
  Vector evolve(const Vector& psi, double t) const;
  const RealVector& eigenvalues() const { return evals_; }

 private:
  RealVector evals_;
  Matrix evecs_;
};

StateVector exact_evolve(const OperatorExpr& h, const StateVector& psi, double t);

}  // namespace decoh
