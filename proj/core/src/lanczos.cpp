#include "decoh/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "decoh/random.hpp"

namespace decoh {

LanczosResult lowest_eigenpair(const CompiledOperator& h, const LanczosOptions& opts) {
  const std::size_t n = h.space().total_dim();
  const int m_max = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(opts.krylov_dim), n));
  if (m_max < 1) throw std::invalid_argument("lowest_eigenpair: krylov_dim must be positive");

  Rng rng(opts.seed);
  Vector v = random_complex_gaussian(n, rng);
  v.normalize();

  LanczosResult res;
  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    std::vector<Vector> basis;
    std::vector<double> alpha, beta;
    basis.push_back(v);
    Vector w;
    int m = 0;
    for (int j = 0; j < m_max; ++j) {
      h.apply(basis[j], w);
      ++res.iterations;
      const double a = basis[j].dot(w).real();
      alpha.push_back(a);
      // full reorthogonalization, two passes
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) w -= q * q.dot(w);
      m = j + 1;

      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (int k = 0; k < m; ++k) {
        t(k, k) = alpha[k];
        if (k + 1 < m) t(k, k + 1) = t(k + 1, k) = beta[k];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      res.ritz_history.push_back(es.eigenvalues()[0]);

      const double b = w.norm();
      if (j + 1 == m_max || b < 1e-14) break;
      beta.push_back(b);
      basis.push_back(w / b);
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      t(k, k) = alpha[k];
      if (k + 1 < m) t(k, k + 1) = t(k + 1, k) = beta[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::VectorXd y = es.eigenvectors().col(0);
    Vector ritz = Vector::Zero(static_cast<Eigen::Index>(n));
    for (int k = 0; k < m; ++k) ritz += y[k] * basis[k];
    ritz.normalize();

    h.apply(ritz, w);
    ++res.iterations;
    const double e = ritz.dot(w).real();
    res.energy = e;
    res.vector = ritz;
    res.residual = (w - e * ritz).norm();
    if (res.residual < opts.tol) return res;
    v = ritz;
  }
  throw std::runtime_error("lowest_eigenpair: no convergence, residual " +
                           std::to_string(res.residual) + " after " +
                           std::to_string(res.iterations) + " products");
}

}  // namespace decoh
