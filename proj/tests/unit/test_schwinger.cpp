#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <string>

#include "decoh/lanczos.hpp"
#include "decoh/schwinger.hpp"

using namespace decoh;

namespace {

double dense_ground_energy(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

}  // namespace

TEST_SUITE("schwinger") {
  TEST_CASE("hamiltonian matches element-wise construction") {
    for (int ns : {4, 6, 8}) {
      for (double eps0 : {0.0, 0.3}) {
        SchwingerParams p;
        p.n_sites = ns;
        p.spacing = 0.8;
        p.mass = 0.4;
        p.coupling = 1.3;
        p.background_field = eps0;
        const auto ops = build_schwinger(p);
        const Matrix ref = oracle::schwinger_hamiltonian(ns, 0.8, 0.4, 1.3, eps0);
        CHECK((ops.hamiltonian.to_dense() - ref).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }

  TEST_CASE("charge densities are diagonal with the staggered formula") {
    SchwingerParams p;
    p.n_sites = 6;
    const auto ops = build_schwinger(p);
    for (int n = 1; n <= 6; ++n) {
      const Matrix q = ops.charge_density[n - 1].to_dense();
      const Matrix pd = ops.particle_density[n - 1].to_dense();
      for (std::size_t s = 0; s < 64; ++s) {
        const double z = oracle::bit(s, n, 6) ? -1.0 : 1.0;
        const double par = n % 2 == 0 ? 1.0 : -1.0;
        CHECK(std::abs(q(s, s) - 0.5 * (z + par)) < 1e-15);
        CHECK(std::abs(pd(s, s) - 0.5 * (1.0 + par * z)) < 1e-15);
      }
    }
    const Matrix h = ops.hamiltonian.to_dense();
    const Matrix qt = ops.total_charge.to_dense();
    CHECK((h * qt - qt * h).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("ground state agrees with dense diagonalization") {
    SchwingerParams p;
    p.n_sites = 8;
    const auto ops = build_schwinger(p);
    const auto gs = ground_state(ops, 1e-10);
    const Matrix h = oracle::schwinger_hamiltonian(8, p.spacing, p.mass, p.coupling);
    CHECK(std::abs(gs.energy - dense_ground_energy(h)) < 1e-9);
    CHECK(gs.residual < 1e-10);
    const Vector& v = gs.state.amplitudes();
    CHECK((h * v - gs.energy * v).norm() < 1e-9);
    CHECK(std::abs(expectation(ops.total_charge, gs.state)) < 1e-9);
    Eigen::Index k;
    v.cwiseAbs().maxCoeff(&k);
    CHECK(std::abs(v[k].imag()) < 1e-14);
    CHECK(v[k].real() > 0.0);
  }

  TEST_CASE("lanczos ritz history is non-increasing") {
    SchwingerParams p;
    p.n_sites = 6;
    const auto ops = build_schwinger(p);
    const auto res = lowest_eigenpair(CompiledOperator(ops.hamiltonian), LanczosOptions{});
    for (std::size_t i = 1; i < res.ritz_history.size(); ++i)
      CHECK(res.ritz_history[i] <= res.ritz_history[i - 1] + 1e-12);
  }

  TEST_CASE("staggered state is neutral everywhere") {
    SchwingerParams p;
    const auto ops = build_schwinger(p);
    const auto st = staggered_state(ops);
    for (int n = 1; n <= 8; ++n) CHECK(std::abs(expectation(ops.charge_density[n - 1], st)) < 1e-15);
  }

  TEST_CASE("pair state") {
    SchwingerParams p;
    const auto ops = build_schwinger(p);
    const auto gs = ground_state(ops);
    const auto c = charge_pair_state(ops, gs.state);
    CHECK(std::abs(c.norm() - 1.0) < 1e-12);
    CHECK(std::abs(inner(gs.state, c)) < 1e-10);
    CHECK(std::abs(expectation(ops.total_charge, c)) < 1e-10);
    const double q1 = expectation(ops.charge_density[0], c) - expectation(ops.charge_density[0], gs.state);
    const double q2 = expectation(ops.charge_density[1], c) - expectation(ops.charge_density[1], gs.state);
    CHECK(q1 < -0.1);
    CHECK(q2 > 0.1);

    // Same construction from dense matrices.
    Matrix raise2 = oracle::kron({pauli::id(), pauli::plus(), pauli::id(), pauli::id(), pauli::id(),
                                  pauli::id(), pauli::id(), pauli::id()});
    Matrix lower1 = oracle::kron({pauli::minus(), pauli::id(), pauli::id(), pauli::id(), pauli::id(),
                                  pauli::id(), pauli::id(), pauli::id()});
    const Vector& om = gs.state.amplitudes();
    Vector raw = lower1 * raise2 * om;
    raw -= om * om.dot(raw);
    raw.normalize();
    CHECK(std::abs(std::abs(raw.dot(c.amplitudes())) - 1.0) < 1e-12);
  }

  TEST_CASE("c_top sites and calibration") {
    CHECK(c_top_sites(8, CTopMode::AllButBottomTwo) == std::vector<int>{3, 4, 5, 6, 7, 8});
    CHECK(c_top_sites(8, CTopMode::TopTwo) == std::vector<int>{7, 8});
    SchwingerParams p;
    const auto ops = build_schwinger(p);
    const auto gs = ground_state(ops);
    for (auto mode : {CTopMode::AllButBottomTwo, CTopMode::TopTwo})
      for (auto dens : {DensityKind::Particle, DensityKind::Fermion}) {
        const auto ct = c_top_operator(ops, gs.state, mode, dens);
        CHECK(std::abs(expectation(ct.op, gs.state)) < 1e-12);
        CHECK(std::abs(expectation(ct.raw, gs.state) - ct.vacuum_value) < 1e-12);
      }
    // Particle density on the staggered vacuum is zero.
    const auto ct = c_top_operator(ops, gs.state, CTopMode::TopTwo);
    CHECK(std::abs(expectation(ct.raw, staggered_state(ops))) < 1e-15);
  }

  TEST_CASE("validation names the field") {
    SchwingerParams p;
    p.n_sites = 5;
    try {
      p.validate();
      FAIL("expected throw");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).rfind("schwinger.n_sites", 0) == 0);
    }
    p.n_sites = 8;
    p.spacing = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
}
