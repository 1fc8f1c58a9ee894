#include "decoh/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace decoh {

void EvolutionParams::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("evolution.dt: must be > 0");
  if (!(t_max >= 0.0)) throw std::invalid_argument("evolution.t_max: must be >= 0");
  if (krylov_dim < 4) throw std::invalid_argument("evolution.krylov_dim: must be >= 4");
  if (!(tol > 0.0)) throw std::invalid_argument("evolution.tol: must be > 0");
  if (record_every < 1) throw std::invalid_argument("evolution.record_every: must be >= 1");
}

int EvolutionParams::num_steps() const {
  return static_cast<int>(std::llround(t_max / dt));
}

KrylovPropagator::KrylovPropagator(const CompiledOperator& h, int krylov_dim, double tol)
    : h_(&h), m_(krylov_dim), tol_(tol) {
  if (krylov_dim < 4) throw std::invalid_argument("KrylovPropagator: krylov_dim must be >= 4");
  if (!(tol > 0.0)) throw std::invalid_argument("KrylovPropagator: tol must be > 0");
}

Vector KrylovPropagator::step(const Vector& psi, double dt, StepStats* stats) const {
  const double norm_in = psi.norm();
  if (norm_in == 0.0) return psi;
  const auto n = psi.size();
  const int m_cap = static_cast<int>(std::min<Eigen::Index>(m_, n));

  StepStats local;
  Vector v = psi;
  double remaining = dt;
  thread_local Matrix basis;
  thread_local Vector w, proj;
  if (basis.rows() != n || basis.cols() < m_cap) basis.resize(n, m_cap);

  while (remaining > 0.0) {
    const double beta0 = v.norm();
    basis.col(0) = v / beta0;
    std::vector<double> alpha, beta;
    bool breakdown = false;
    double beta_last = 0.0;
    for (int j = 0; j < m_cap; ++j) {
      h_->apply(basis.col(j), w);
      ++local.matvecs;
      alpha.push_back(basis.col(j).dot(w).real());
      w -= alpha.back() * basis.col(j);
      if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
      // one classical Gram-Schmidt pass against the whole basis
      const auto q = basis.leftCols(j + 1);
      proj.noalias() = q.adjoint() * w;
      w.noalias() -= q * proj;
      const double b = w.norm();
      const double scale = std::abs(alpha.back()) + (j > 0 ? beta[j - 1] : 0.0) + 1.0;
      if (b < 1e-13 * scale) {
        breakdown = true;
        break;
      }
      if (j + 1 == m_cap) {
        beta_last = b;
        break;
      }
      beta.push_back(b);
      basis.col(j + 1) = w / b;
    }
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      t(k, k) = alpha[k];
      if (k + 1 < m) t(k, k + 1) = t(k + 1, k) = beta[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::MatrixXd& q = es.eigenvectors();
    const Eigen::VectorXd& lam = es.eigenvalues();

    double tau = remaining;
    Vector y(m);
    for (int tries = 0;; ++tries) {
      Vector phase(m);
      for (int k = 0; k < m; ++k) phase[k] = std::exp(-kI * tau * lam[k]) * q(0, k);
      y = q.cast<cplx>() * phase;
      const double err = breakdown ? 0.0 : beta0 * beta_last * std::abs(y[m - 1]);
      if (err <= tol_ || tries > 60) {
        local.error_estimate = std::max(local.error_estimate, err);
        break;
      }
      tau *= 0.5;
    }
    v.noalias() = basis.leftCols(m) * (beta0 * y);
    ++local.substeps;
    remaining -= tau;
    if (remaining < 1e-15 * dt) remaining = 0.0;
  }

  const double drift = std::abs(v.norm() - norm_in);
  local.norm_drift = drift;
  if (drift > 1e-8)
    throw std::runtime_error("Krylov step: norm drift " + std::to_string(drift) +
                             " (increase krylov_dim or reduce dt)");
  v *= norm_in / v.norm();
  if (stats) *stats = local;
  return v;
}

StateVector evolve_step(const OperatorExpr& h, const StateVector& psi, double dt,
                        const EvolutionParams& params) {
  if (!(h.space() == psi.space())) throw std::invalid_argument("evolve_step: space mismatch");
  CompiledOperator ch(h);
  KrylovPropagator prop(ch, params.krylov_dim, params.tol);
  return StateVector(psi.space(), prop.step(psi.amplitudes(), dt));
}

Observable expectation_observable(std::string label, const OperatorExpr& op) {
  auto compiled = std::make_shared<CompiledOperator>(op);
  return {std::move(label), [compiled](const StateVector& psi) { return expectation(*compiled, psi); }};
}

std::vector<double>& TrajectoryRecord::column(const std::string& label) {
  for (auto& [name, values] : series)
    if (name == label) return values;
  series.emplace_back(label, std::vector<double>{});
  return series.back().second;
}

const std::vector<double>& TrajectoryRecord::column(const std::string& label) const {
  for (const auto& [name, values] : series)
    if (name == label) return values;
  throw std::out_of_range("TrajectoryRecord: no series '" + label + "'");
}

bool TrajectoryRecord::has(const std::string& label) const {
  for (const auto& s : series)
    if (s.first == label) return true;
  return false;
}

void TrajectoryRecord::push(double t, const std::vector<std::pair<std::string, double>>& values) {
  times.push_back(t);
  for (const auto& [label, v] : values) {
    auto& col = column(label);
    col.resize(times.size() - 1, std::numeric_limits<double>::quiet_NaN());
    col.push_back(v);
  }
}

void TrajectoryRecord::check_consistent() const {
  for (const auto& [label, v] : series)
    if (v.size() != times.size())
      throw std::logic_error("TrajectoryRecord: series '" + label + "' has " +
                             std::to_string(v.size()) + " entries, expected " +
                             std::to_string(times.size()));
}

TrajectoryRecord evolve_trajectory(const OperatorExpr& h, const StateVector& psi0,
                                   const EvolutionParams& params,
                                   const std::vector<Observable>& observables,
                                   const std::vector<double>& snapshot_times) {
  params.validate();
  if (!(h.space() == psi0.space())) throw std::invalid_argument("evolve_trajectory: space mismatch");
  CompiledOperator ch(h);
  KrylovPropagator prop(ch, params.krylov_dim, params.tol);

  TrajectoryRecord rec;
  std::vector<bool> snapped(snapshot_times.size(), false);
  StateVector psi = psi0;
  const int steps = params.num_steps();

  auto record = [&](double t) {
    std::vector<std::pair<std::string, double>> row;
    row.emplace_back("norm", psi.norm());
    row.emplace_back("energy", expectation(ch, psi));
    for (const auto& o : observables) row.emplace_back(o.label, o.eval(psi));
    rec.push(t, row);
    for (std::size_t k = 0; k < snapshot_times.size(); ++k)
      if (!snapped[k] && std::abs(snapshot_times[k] - t) <= 0.5 * params.dt * params.record_every + 1e-12) {
        rec.snapshots.emplace_back(t, psi);
        snapped[k] = true;
      }
  };

  record(0.0);
  for (int s = 1; s <= steps; ++s) {
    psi = StateVector(psi.space(), prop.step(psi.amplitudes(), params.dt));
    if (s % params.record_every == 0 || s == steps) record(s * params.dt);
  }
  rec.check_consistent();
  return rec;
}

ExactPropagator::ExactPropagator(const OperatorExpr& h, std::size_t max_dim) {
  const Matrix dense = h.to_dense(max_dim);
  Eigen::SelfAdjointEigenSolver<Matrix> es(dense);
  if (es.info() != Eigen::Success) throw std::runtime_error("ExactPropagator: eigensolver failed");
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
}

Vector ExactPropagator::evolve(const Vector& psi, double t) const {
  Vector c = evecs_.adjoint() * psi;
  for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= std::exp(-kI * t * evals_[k]);
  return evecs_ * c;
}

StateVector exact_evolve(const OperatorExpr& h, const StateVector& psi, double t) {
  if (!(h.space() == psi.space())) throw std::invalid_argument("exact_evolve: space mismatch");
  ExactPropagator p(h);
  return StateVector(psi.space(), p.evolve(psi.amplitudes(), t));
}

}  // namespace decoh
