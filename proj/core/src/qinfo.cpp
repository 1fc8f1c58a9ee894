#include "decoh/qinfo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "decoh/random.hpp"

namespace decoh {

void DensityMatrix::validate(double tol) const {
  if (matrix.rows() != matrix.cols()) throw std::domain_error("DensityMatrix: not square");
  const double herm = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol) throw std::domain_error("DensityMatrix: not Hermitian (" + std::to_string(herm) + ")");
  const double tr = matrix.trace().real();
  if (std::abs(tr - 1.0) > tol)
    throw std::domain_error("DensityMatrix: trace " + std::to_string(tr));
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol)
    throw std::domain_error("DensityMatrix: negative eigenvalue " +
                            std::to_string(es.eigenvalues().minCoeff()));
}

namespace {

void check_keep(const CompositeSpace& space, std::vector<std::size_t>& keep) {
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  if (keep.back() >= space.num_factors())
    throw std::invalid_argument("partial_trace: factor index " + std::to_string(keep.back()) +
                                " out of range");
  if (keep.size() == space.num_factors())
    throw std::invalid_argument("partial_trace: keep set covers every factor");
}

}  // namespace

Matrix reduced_factor(const StateVector& psi, std::vector<std::size_t> keep) {
  const auto& space = psi.space();
  check_keep(space, keep);
  const std::size_t nf = space.num_factors();
  std::vector<bool> is_kept(nf, false);
  for (auto k : keep) is_kept[k] = true;

  // Row-major strides inside the kept and traced sub-spaces.
  std::vector<std::size_t> kstride(nf, 0), tstride(nf, 0);
  std::size_t dk = 1, dt = 1;
  for (std::size_t f = nf; f-- > 0;) {
    if (is_kept[f]) {
      kstride[f] = dk;
      dk *= space.dim(f);
    } else {
      tstride[f] = dt;
      dt *= space.dim(f);
    }
  }

  Matrix m(dk, dt);
  std::vector<std::size_t> digit(nf, 0);
  std::size_t row = 0, col = 0;
  const Vector& a = psi.amplitudes();
  for (std::size_t flat = 0; flat < space.total_dim(); ++flat) {
    m(row, col) = a[flat];
    // odometer increment, last factor fastest
    for (std::size_t f = nf; f-- > 0;) {
      const std::size_t step = is_kept[f] ? kstride[f] : tstride[f];
      std::size_t& idx = is_kept[f] ? row : col;
      if (++digit[f] < space.dim(f)) {
        idx += step;
        break;
      }
      digit[f] = 0;
      idx -= step * (space.dim(f) - 1);
    }
  }
  return m;
}

DensityMatrix partial_trace(const StateVector& psi, std::vector<std::size_t> keep) {
  check_keep(psi.space(), keep);
  const Matrix m = reduced_factor(psi, keep);
  DensityMatrix out;
  out.space = psi.space();
  out.kept = std::move(keep);
  out.matrix = m * m.adjoint();
  return out;
}

Matrix leading_factor(const Vector& psi, std::size_t dim_leading) {
  const auto n = static_cast<std::size_t>(psi.size());
  if (dim_leading == 0 || n % dim_leading != 0)
    throw std::invalid_argument("leading_factor: dimension does not divide the state size");
  const auto rest = static_cast<Eigen::Index>(n / dim_leading);
  Eigen::Map<const Matrix> mt(psi.data(), rest, static_cast<Eigen::Index>(dim_leading));
  return mt.transpose();
}

Matrix psd_sqrt(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  RealVector s = es.eigenvalues();
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = s[i] > kEigenClip ? std::sqrt(s[i]) : 0.0;
  return es.eigenvectors() * s.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

double entropy_of_spectrum(const RealVector& lam) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam[i] > kEigenClip) s -= lam[i] * std::log(lam[i]);
  return s;
}

double fidelity_one_way(const Matrix& sq1, const Matrix& rho2) {
  Matrix x = sq1 * rho2 * sq1;
  x = 0.5 * (x + x.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(x, Eigen::EigenvaluesOnly);
  double tr = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > kEigenClip) tr += std::sqrt(es.eigenvalues()[i]);
  return tr * tr;
}

}  // namespace

double von_neumann_entropy(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  return entropy_of_spectrum(es.eigenvalues());
}

double von_neumann_entropy(const DensityMatrix& rho) { return von_neumann_entropy(rho.matrix); }

double entropy_from_factor(const Matrix& m) {
  // M^dagger M and M M^dagger share their nonzero spectrum; take the smaller.
  Matrix g = m.cols() <= m.rows() ? Matrix(m.adjoint() * m) : Matrix(m * m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (g + g.adjoint()), Eigen::EigenvaluesOnly);
  return entropy_of_spectrum(es.eigenvalues());
}

double fidelity(const Matrix& rho1, const Matrix& rho2) {
  if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols())
    throw std::invalid_argument("fidelity: dimension mismatch");
  const double f12 = fidelity_one_way(psd_sqrt(rho1), rho2);
  const double f21 = fidelity_one_way(psd_sqrt(rho2), rho1);
  double f = std::abs(f12 - f21) > 1e-9 ? 0.5 * (f12 + f21) : f12;
  return std::clamp(f, 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.kept != rho2.kept) throw std::invalid_argument("fidelity: kept factors differ");
  return fidelity(rho1.matrix, rho2.matrix);
}

double fidelity_from_factors(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("fidelity_from_factors: row mismatch");
  const Matrix c = a.adjoint() * b;
  Eigen::JacobiSVD<Matrix> svd(c);
  const double s = svd.singularValues().sum();
  return std::clamp(s * s, 0.0, 1.0);
}

double bures_from_fidelity(double fid) {
  const double f = std::clamp(fid, 0.0, 1.0);
  return std::sqrt(std::max(0.0, 1.0 - std::sqrt(f)));
}

double bures_distance(const Matrix& rho1, const Matrix& rho2) {
  return bures_from_fidelity(fidelity(rho1, rho2));
}

double bures_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  return bures_from_fidelity(fidelity(rho1, rho2));
}

double bures_from_factors(const Matrix& a, const Matrix& b) {
  return bures_from_fidelity(fidelity_from_factors(a, b));
}

StateVector haar_random_state(const CompositeSpace& space, std::uint64_t seed) {
  Rng rng(seed);
  return StateVector(space, random_complex_gaussian(space.total_dim(), rng)).normalized();
}

DensityMatrix random_density_matrix(const CompositeSpace& space, std::vector<std::size_t> keep,
                                    std::uint64_t seed) {
  return partial_trace(haar_random_state(space, seed), std::move(keep));
}

Matrix haar_unitary(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix z(d, d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) z(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::size_t j = 0; j < d; ++j) {
    const cplx rjj = r(j, j);
    if (std::abs(rjj) > 0.0) q.col(j) *= rjj / std::abs(rjj);
  }
  return q;
}

}  // namespace decoh
