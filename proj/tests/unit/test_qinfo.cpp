#include "doctest.h"
#include "oracles.hpp"

#include <cmath>

#include "decoh/qinfo.hpp"
#include "decoh/random.hpp"

using namespace decoh;

namespace {

CompositeSpace qubits(int n) {
  std::vector<HilbertFactor> f;
  for (int i = 1; i <= n; ++i) f.push_back(HilbertFactor::schwinger_site(i));
  return compose_space(f);
}

Matrix projector(const Vector& v) { return v * v.adjoint(); }

}  // namespace

TEST_SUITE("qinfo") {
  TEST_CASE("bell state marginals are maximally mixed") {
    const auto s = qubits(2);
    Vector v = Vector::Zero(4);
    v[0] = v[3] = 1.0 / std::sqrt(2.0);
    const StateVector bell(s, v);
    for (std::size_t k : {0u, 1u}) {
      const auto rho = partial_trace(bell, {k});
      CHECK((rho.matrix - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(std::abs(von_neumann_entropy(rho) - std::log(2.0)) < 1e-10);
      rho.validate();
    }
  }

  TEST_CASE("product state marginals are the factors") {
    const auto s = compose_space({HilbertFactor::schwinger_site(1), HilbertFactor::apparatus(3),
                                  HilbertFactor::environment(4)});
    Rng rng(4);
    std::vector<Vector> l;
    for (std::size_t f = 0; f < 3; ++f) l.push_back(random_complex_gaussian(s.dim(f), rng).normalized());
    const auto psi = product_state(s, l);
    CHECK((partial_trace(psi, {1}).matrix - projector(l[1])).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((partial_trace(psi, {0, 2}).matrix - oracle::kron({projector(l[0]), projector(l[2])}))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    CHECK(von_neumann_entropy(partial_trace(psi, {2})) < 1e-10);
  }

  TEST_CASE("partial trace agrees with dense contraction for arbitrary keep sets") {
    const auto s = compose_space({HilbertFactor::schwinger_site(1), HilbertFactor::schwinger_site(2),
                                  HilbertFactor::apparatus(3), HilbertFactor::environment(3)});
    const auto psi = haar_random_state(s, 99);
    for (const std::vector<std::size_t>& keep :
         {std::vector<std::size_t>{0}, {3}, {1, 3}, {0, 2}, {0, 1, 2}, {2, 3}}) {
      const auto rho = partial_trace(psi, keep);
      CHECK((rho.matrix - oracle::partial_trace(psi, keep)).cwiseAbs().maxCoeff() < 1e-12);
      rho.validate();
    }
    CHECK_THROWS_AS(partial_trace(psi, {}), std::invalid_argument);
    CHECK_THROWS_AS(partial_trace(psi, {0, 1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(partial_trace(psi, {7}), std::invalid_argument);
  }

  TEST_CASE("leading factor is the reshaped state") {
    const auto s = qubits(5);
    const auto psi = haar_random_state(s, 5);
    const Matrix m = leading_factor(psi.amplitudes(), 8);
    CHECK((m * m.adjoint() - partial_trace(psi, {0, 1, 2}).matrix).cwiseAbs().maxCoeff() < 1e-13);
    CHECK_THROWS(leading_factor(psi.amplitudes(), 5));
  }

  TEST_CASE("entropy closed forms") {
    for (int d : {2, 3, 7}) CHECK(std::abs(von_neumann_entropy(Matrix(Matrix::Identity(d, d) / d)) - std::log(d)) < 1e-10);
    const auto psi = haar_random_state(qubits(3), 6);
    CHECK(std::abs(von_neumann_entropy(projector(psi.amplitudes()))) < 1e-10);
    const Matrix m = leading_factor(haar_random_state(qubits(6), 7).amplitudes(), 4);
    CHECK(std::abs(entropy_from_factor(m) - von_neumann_entropy(Matrix(m * m.adjoint()))) < 1e-10);
  }

  TEST_CASE("bures closed forms") {
    const Matrix rho = random_density_matrix(qubits(4), {0, 1}, 8).matrix;
    CHECK(bures_distance(rho, rho) < 1e-6);
    Matrix a = Matrix::Zero(4, 4), b = Matrix::Zero(4, 4);
    a(0, 0) = 0.3;
    a(1, 1) = 0.7;
    b(2, 2) = 0.5;
    b(3, 3) = 0.5;
    CHECK(std::abs(bures_distance(a, b) - 1.0) < 1e-12);
    const auto u = haar_random_state(qubits(3), 10).amplitudes();
    const auto v = haar_random_state(qubits(3), 11).amplitudes();
    const double c = std::abs(u.dot(v));
    CHECK(std::abs(bures_distance(projector(u), projector(v)) - std::sqrt(1.0 - c)) < 1e-8);
    CHECK(std::abs(bures_from_factors(u, v) - std::sqrt(1.0 - c)) < 1e-8);
    // Pure state against the equal mixture of itself and an orthogonal state.
    Vector e0 = Vector::Zero(4), e1 = Vector::Zero(4);
    e0[0] = 1.0;
    e1[1] = 1.0;
    const Vector sup = (e0 + e1) / std::sqrt(2.0);
    CHECK(std::abs(bures_distance(projector(sup), 0.5 * (projector(e0) + projector(e1))) -
                   std::sqrt(1.0 - std::sqrt(0.5))) < 1e-10);
  }

  TEST_CASE("bures axioms") {
    const auto s = qubits(5);
    std::vector<Matrix> rs;
    for (std::uint64_t k = 0; k < 3; ++k) rs.push_back(random_density_matrix(s, {0, 2}, 20 + k).matrix);
    const double d01 = bures_distance(rs[0], rs[1]);
    CHECK(std::abs(d01 - bures_distance(rs[1], rs[0])) < 1e-10);
    CHECK(d01 > 0.0);
    CHECK(d01 <= 1.0);
    // The Bures metric sqrt(2) d_B satisfies the triangle inequality.
    CHECK(bures_distance(rs[0], rs[2]) <= d01 + bures_distance(rs[1], rs[2]) + 1e-12);
  }

  TEST_CASE("unitary invariance") {
    const auto s = qubits(5);
    const Matrix r1 = random_density_matrix(s, {0, 1, 2}, 30).matrix;
    const Matrix r2 = random_density_matrix(s, {0, 1, 2}, 31).matrix;
    const Matrix u = haar_unitary(8, 32);
    CHECK((u.adjoint() * u - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
    const Matrix t1 = u * r1 * u.adjoint(), t2 = u * r2 * u.adjoint();
    CHECK(std::abs(bures_distance(r1, r2) - bures_distance(t1, t2)) < 1e-8);
    CHECK(std::abs(von_neumann_entropy(r1) - von_neumann_entropy(t1)) < 1e-8);
  }

  TEST_CASE("factor route matches dense route") {
    const auto s = qubits(8);
    const Matrix a = leading_factor(haar_random_state(s, 40).amplitudes(), 16);
    const Matrix b = leading_factor(haar_random_state(s, 41).amplitudes(), 16);
    const Matrix ra = a * a.adjoint(), rb = b * b.adjoint();
    CHECK(std::abs(fidelity_from_factors(a, b) - fidelity(ra, rb)) < 1e-8);
    // A two-branch mixture as a wider factor.
    Matrix mix(16, a.cols() * 2);
    mix << a / std::sqrt(2.0), b / std::sqrt(2.0);
    CHECK(std::abs(fidelity_from_factors(a, mix) - fidelity(ra, 0.5 * (ra + rb))) < 1e-8);
  }

  TEST_CASE("density matrix validation") {
    DensityMatrix d;
    d.matrix = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(d.validate(), std::domain_error);
    d.matrix(0, 0) = 1.2;
    d.matrix(1, 1) = -0.2;
    CHECK_THROWS_AS(d.validate(), std::domain_error);
  }

  TEST_CASE("haar states are reproducible") {
    const auto s = qubits(4);
    CHECK(haar_random_state(s, 3).amplitudes() == haar_random_state(s, 3).amplitudes());
    CHECK(haar_random_state(s, 3).amplitudes() != haar_random_state(s, 4).amplitudes());
  }
}
