#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "decoh/probe.hpp"
#include "decoh/random.hpp"
#include "decoh/schwinger.hpp"

using namespace decoh;

namespace {

ParticleParams small_particles(int n, Boundary b = Boundary::HardWall) {
  ParticleParams p;
  p.n_points = n;
  p.spacing = 0.5;
  p.mass_apparatus = 20.0;
  p.mass_environment = 0.7;
  p.boundary = b;
  return p;
}

}  // namespace

TEST_SUITE("probe") {
  TEST_CASE("momentum and kinetic stencils act on plane waves") {
    // Periodic lattice: e^{ikx} with k = 2 pi q / L is an exact eigenvector.
    const auto p = small_particles(12, Boundary::Periodic);
    const double len = 12 * p.spacing;
    const Matrix pm = momentum_matrix(p);
    const Matrix tk = kinetic_matrix(p, Particle::Environment);
    for (int q = 0; q < 12; ++q) {
      const double k = 2.0 * std::numbers::pi * q / len;
      Vector v(12);
      for (int j = 0; j < 12; ++j) v[j] = std::exp(kI * k * (j * p.spacing));
      const double pk = std::sin(k * p.spacing) / p.spacing;
      const double ek = (1.0 - std::cos(k * p.spacing)) / (p.mass_environment * p.spacing * p.spacing);
      CHECK((pm * v - pk * v).norm() < 1e-12);
      CHECK((tk * v - ek * v).norm() < 1e-12);
    }
    CHECK((pm - pm.adjoint()).norm() < 1e-15);
  }

  TEST_CASE("hard wall stencils drop the wrap-around entries") {
    const auto p = small_particles(5);
    const Matrix pm = momentum_matrix(p);
    CHECK(std::abs(pm(0, 4)) == 0.0);
    CHECK(std::abs(pm(0, 1) - cplx(0.0, -1.0)) < 1e-15);  // -i / (2b), b = 0.5
    CHECK(std::abs(pm(1, 0) - cplx(0.0, 1.0)) < 1e-15);
    const Matrix tk = kinetic_matrix(p, Particle::Apparatus);
    CHECK(std::abs(tk(0, 0) - 2.0 / (2.0 * 20.0 * 0.25)) < 1e-15);
    CHECK(std::abs(tk(4, 0)) == 0.0);
  }

  TEST_CASE("full hamiltonian equals explicit kronecker assembly") {
    SchwingerParams sp;
    sp.n_sites = 4;
    const auto ops = build_schwinger(sp);
    const auto omega = ground_state(ops).state;
    const auto ct = c_top_operator(ops, omega, CTopMode::TopTwo);
    const auto pp = small_particles(4);
    CouplingParams cp;
    cp.g_sa = 0.8;
    cp.g_ae = 1.7;
    cp.sigma = 0.9;
    const auto fh = build_full_hamiltonian(ops, ct.op, pp, cp);
    CHECK(fh.space.total_dim() == 256);

    const Matrix hs = ops.hamiltonian.to_dense();
    const Matrix c = ct.op.to_dense();
    const Matrix i4 = Matrix::Identity(4, 4), is = Matrix::Identity(16, 16);
    Matrix vae = Matrix::Zero(16, 16);
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        const double dx = (j - k) * pp.spacing;
        vae(j * 4 + k, j * 4 + k) =
            cp.g_ae * std::exp(-dx * dx / (2 * cp.sigma * cp.sigma)) / (std::sqrt(2 * std::numbers::pi) * cp.sigma);
      }
    Matrix ref = oracle::kron({hs, i4, i4});
    ref += cp.g_sa * oracle::kron({c, momentum_matrix(pp), i4});
    ref += oracle::kron({is, kinetic_matrix(pp, Particle::Apparatus), i4});
    ref += oracle::kron({is, i4, kinetic_matrix(pp, Particle::Environment)});
    ref += oracle::kron({is, vae});
    CHECK((fh.total.to_dense() - ref).cwiseAbs().maxCoeff() < 1e-12);

    Rng rng(1);
    const Vector v = random_complex_gaussian(256, rng);
    CHECK((CompiledOperator(fh.total).apply(v) - ref * v).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("periodic interaction uses the minimum image") {
    const auto p = small_particles(8, Boundary::Periodic);
    CouplingParams cp;
    cp.g_ae = 1.0;
    cp.sigma = 0.6;
    const auto space = full_space(4, p);
    const Matrix d = build_h_ae(space, p, cp).to_dense(1 << 12);
    // x_A = 0, x_E = 7 b is one site away through the boundary.
    const std::size_t near = 0 * 8 + 7, next = 0 * 8 + 1;
    CHECK(std::abs(d(near, near) - d(next, next)) < 1e-15);
  }

  TEST_CASE("hermiticity on random vectors") {
    SchwingerParams sp;
    sp.n_sites = 4;
    const auto ops = build_schwinger(sp);
    const auto ct = c_top_operator(ops, ground_state(ops).state, CTopMode::AllButBottomTwo);
    const auto fh = build_full_hamiltonian(ops, ct.op, small_particles(5), CouplingParams{});
    Rng rng(12);
    for (const OperatorExpr* op : {&fh.h_s, &fh.h_sa, &fh.h_a, &fh.h_e, &fh.h_ae, &fh.total}) {
      const CompiledOperator c(*op);
      const Vector u = random_complex_gaussian(fh.space.total_dim(), rng);
      const Vector v = random_complex_gaussian(fh.space.total_dim(), rng);
      CHECK(std::abs(u.dot(c.apply(v)) - c.apply(u).dot(v)) < 1e-10 * u.norm() * v.norm());
    }
  }

  TEST_CASE("periodic interaction commutes with a joint shift") {
    const auto p = small_particles(7, Boundary::Periodic);
    CouplingParams cp;
    cp.sigma = 1.1;
    const auto space = full_space(4, p);
    const CompiledOperator h(build_h_ae(space, p, cp));
    const int n = 7;
    auto shift = [&](const Vector& v) {
      Vector out(v.size());
      for (Eigen::Index s = 0; s < 16; ++s)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) out[(s * n + (j + 1) % n) * n + (k + 1) % n] = v[(s * n + j) * n + k];
      return out;
    };
    Rng rng(13);
    const Vector v = random_complex_gaussian(space.total_dim(), rng);
    CHECK((shift(h.apply(v)) - h.apply(shift(v))).norm() < 1e-10);
  }

  TEST_CASE("decoupled energies add") {
    SchwingerParams sp;
    sp.n_sites = 4;
    const auto ops = build_schwinger(sp);
    const auto gs = ground_state(ops);
    const auto ct = c_top_operator(ops, gs.state, CTopMode::AllButBottomTwo);
    const auto pp = small_particles(6);
    CouplingParams cp;
    cp.g_sa = 0.0;
    cp.g_ae = 0.0;
    const auto fh = build_full_hamiltonian(ops, ct.op, pp, cp);
    const auto a = gaussian_packet(pp, Particle::Apparatus, 1.2, 0.6, 0.4);
    const auto e = gaussian_packet(pp, Particle::Environment, 1.7, 0.5, -0.3);
    StateVector psi = product_state(fh.space, {Vector::Ones(2), Vector::Ones(2), Vector::Ones(2),
                                               Vector::Ones(2), a.amplitudes(), e.amplitudes()});
    for (Eigen::Index i = 0; i < 16; ++i)
      psi.amplitudes().segment(i * 36, 36) *= gs.state.amplitudes()[i];
    const double ea = expectation(OperatorExpr::local(a.space(), 0, kinetic_matrix(pp, Particle::Apparatus)), a);
    const double ee = expectation(OperatorExpr::local(e.space(), 0, kinetic_matrix(pp, Particle::Environment)), e);
    CHECK(std::abs(expectation(fh.total, psi) - (gs.energy + ea + ee)) < 1e-10);
  }

  TEST_CASE("uniform environment has no momentum on a ring") {
    const auto p = small_particles(10, Boundary::Periodic);
    const auto u = uniform_state(p);
    CHECK(std::abs(expectation(OperatorExpr::local(u.space(), 0, momentum_matrix(p)), u)) < 1e-12);
    for (int j = 0; j < 10; ++j) CHECK(std::abs(u.amplitudes()[j] - 1.0 / std::sqrt(10.0)) < 1e-15);
  }

  TEST_CASE("gaussian packet moments") {
    ParticleParams p;
    p.n_points = 64;
    p.spacing = 0.25;
    const double x0 = 8.0, w = 1.5;
    const auto g = gaussian_packet(p, Particle::Apparatus, x0, w);
    CHECK(std::abs(g.norm() - 1.0) < 1e-14);
    double m1 = 0, m2 = 0;
    for (int j = 0; j < 64; ++j) {
      const double pr = std::norm(g.amplitudes()[j]);
      m1 += pr * j * p.spacing;
      m2 += pr * (j * p.spacing) * (j * p.spacing);
    }
    CHECK(std::abs(m1 - x0) < 1e-6);
    CHECK(std::abs(std::sqrt(m2 - m1 * m1) - w) < 1e-3);
    CHECK(boundary_weight(p, g, w) < 1e-6);
    const auto edge = gaussian_packet(p, Particle::Apparatus, 0.0, w);
    CHECK(boundary_weight(p, edge, w) > 0.01);
  }

  TEST_CASE("uniform state") {
    const auto p = small_particles(9);
    const auto u = uniform_state(p);
    CHECK(std::abs(u.norm() - 1.0) < 1e-15);
    CHECK(u.space().factor(0).kind == FactorKind::Environment);
  }

  TEST_CASE("validation names the field") {
    CouplingParams cp;
    cp.sigma = -1.0;
    try {
      cp.validate();
      FAIL("expected throw");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).rfind("couplings.sigma", 0) == 0);
    }
    ParticleParams pp;
    pp.n_points = 2;
    CHECK_THROWS_WITH_AS(pp.validate(), doctest::Contains("particles.n_points"), std::invalid_argument);
    pp.n_points = 16;
    pp.mass_apparatus = 1.0;
    CHECK_FALSE(pp.apparatus_is_heavy());
  }
}
