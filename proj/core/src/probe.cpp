#include "decoh/probe.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace decoh {

void ParticleParams::validate() const {
  if (n_points < 3) throw std::invalid_argument("particles.n_points: must be >= 3");
  if (!(spacing > 0.0)) throw std::invalid_argument("particles.spacing: must be > 0");
  if (!(mass_apparatus > 0.0)) throw std::invalid_argument("particles.mass_apparatus: must be > 0");
  if (!(mass_environment > 0.0))
    throw std::invalid_argument("particles.mass_environment: must be > 0");
}

RealVector ParticleParams::positions() const {
  RealVector x(n_points);
  for (int j = 0; j < n_points; ++j) x[j] = j * spacing;
  return x;
}

void CouplingParams::validate() const {
  if (!(g_sa >= 0.0)) throw std::invalid_argument("couplings.g_sa: must be >= 0");
  if (!(g_ae >= 0.0)) throw std::invalid_argument("couplings.g_ae: must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("couplings.sigma: must be > 0");
}

namespace {

// Neighbour index or -1 across a hard wall.
int neighbour(int j, int d, const ParticleParams& p) {
  int k = j + d;
  if (p.boundary == Boundary::Periodic) return (k + p.n_points) % p.n_points;
  return (k < 0 || k >= p.n_points) ? -1 : k;
}

std::size_t particle_factor(const CompositeSpace& space, Particle which) {
  return space.index_of(which == Particle::Apparatus ? FactorKind::Apparatus
                                                     : FactorKind::Environment);
}

}  // namespace

Matrix momentum_matrix(const ParticleParams& params) {
  params.validate();
  const int n = params.n_points;
  Matrix p = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int d : {-1, 1}) {
      const int k = neighbour(j, d, params);
      if (k >= 0) p(j, k) += -kI * static_cast<double>(d) / (2.0 * params.spacing);
    }
  }
  return p;
}

Matrix kinetic_matrix(const ParticleParams& params, Particle which) {
  params.validate();
  const int n = params.n_points;
  const double c = 1.0 / (2.0 * params.mass(which) * params.spacing * params.spacing);
  Matrix t = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    t(j, j) = 2.0 * c;
    for (int d : {-1, 1}) {
      const int k = neighbour(j, d, params);
      if (k >= 0) t(j, k) += -c;
    }
  }
  return t;
}

Matrix position_matrix(const ParticleParams& params) {
  return params.positions().cast<cplx>().asDiagonal();
}

CompositeSpace full_space(int n_sites, const ParticleParams& params) {
  params.validate();
  std::vector<HilbertFactor> f;
  for (int n = 1; n <= n_sites; ++n) f.push_back(HilbertFactor::schwinger_site(n));
  f.push_back(HilbertFactor::apparatus(static_cast<std::size_t>(params.n_points)));
  f.push_back(HilbertFactor::environment(static_cast<std::size_t>(params.n_points)));
  return CompositeSpace(std::move(f));
}

OperatorExpr embed_leading(const OperatorExpr& op, const CompositeSpace& target) {
  const auto& src = op.space();
  if (src.num_factors() > target.num_factors())
    throw std::invalid_argument("embed_leading: source space is larger than target");
  for (std::size_t i = 0; i < src.num_factors(); ++i)
    if (!(src.factor(i) == target.factor(i)))
      throw std::invalid_argument("embed_leading: factor mismatch at " + std::to_string(i));
  OperatorExpr out(target, op.hermitian());
  for (const auto& t : op.terms()) out.add_term(t.coeff, t.ops);
  return out;
}

OperatorExpr momentum_op(const CompositeSpace& space, const ParticleParams& params, Particle which) {
  return OperatorExpr::local(space, particle_factor(space, which), momentum_matrix(params));
}

OperatorExpr kinetic_op(const CompositeSpace& space, const ParticleParams& params, Particle which) {
  return OperatorExpr::local(space, particle_factor(space, which), kinetic_matrix(params, which));
}

OperatorExpr position_op(const CompositeSpace& space, const ParticleParams& params, Particle which) {
  return OperatorExpr::local(space, particle_factor(space, which), position_matrix(params));
}

OperatorExpr build_h_sa(const CompositeSpace& space, const OperatorExpr& calibrated_ctop,
                        const ParticleParams& params, const CouplingParams& couplings) {
  couplings.validate();
  const OperatorExpr ctop = embed_leading(calibrated_ctop, space);
  OperatorExpr h = couplings.g_sa * (ctop * momentum_op(space, params, Particle::Apparatus));
  h.set_hermitian(true);
  return h;
}

OperatorExpr build_h_ae(const CompositeSpace& space, const ParticleParams& params,
                        const CouplingParams& couplings) {
  couplings.validate();
  const std::size_t fa = particle_factor(space, Particle::Apparatus);
  const std::size_t fe = particle_factor(space, Particle::Environment);
  if (fe != fa + 1) throw std::invalid_argument("build_h_ae: environment must follow apparatus");
  OperatorExpr h(space);
  if (couplings.g_ae == 0.0) return h;

  const int n = params.n_points;
  const RealVector x = params.positions();
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * couplings.sigma);
  Vector diag(n * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double dx = x[j] - x[k];
      if (params.boundary == Boundary::Periodic) {
        const double len = n * params.spacing;
        dx -= len * std::round(dx / len);
      }
      diag[j * n + k] = couplings.g_ae * norm * std::exp(-dx * dx / (2.0 * couplings.sigma * couplings.sigma));
    }
  h.add_term(1.0, {LocalOp{fa, 2, diag.asDiagonal()}});
  return h;
}

FullHamiltonian build_full_hamiltonian(const SchwingerOperators& schwinger,
                                       const OperatorExpr& calibrated_ctop,
                                       const ParticleParams& params,
                                       const CouplingParams& couplings) {
  params.validate();
  couplings.validate();
  FullHamiltonian fh;
  fh.space = full_space(schwinger.n_sites(), params);
  if (!(calibrated_ctop.space() == schwinger.space))
    throw std::invalid_argument("build_full_hamiltonian: C_top is not on the Schwinger space");
  fh.h_s = embed_leading(schwinger.hamiltonian, fh.space);
  fh.h_sa = build_h_sa(fh.space, calibrated_ctop, params, couplings);
  fh.h_a = kinetic_op(fh.space, params, Particle::Apparatus);
  fh.h_e = kinetic_op(fh.space, params, Particle::Environment);
  fh.h_ae = build_h_ae(fh.space, params, couplings);
  fh.total = fh.h_s;
  if (couplings.g_sa != 0.0) fh.total += fh.h_sa;
  fh.total += fh.h_a;
  fh.total += fh.h_e;
  fh.total += fh.h_ae;
  fh.total.set_hermitian(true);
  return fh;
}

StateVector gaussian_packet(const ParticleParams& params, Particle which, double center,
                            double width, double momentum) {
  params.validate();
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_packet: width must be > 0");
  const RealVector x = params.positions();
  Vector v(params.n_points);
  for (int j = 0; j < params.n_points; ++j) {
    const double dx = x[j] - center;
    v[j] = std::exp(-dx * dx / (4.0 * width * width)) * std::exp(kI * momentum * x[j]);
  }
  const HilbertFactor f = which == Particle::Apparatus
                              ? HilbertFactor::apparatus(static_cast<std::size_t>(params.n_points))
                              : HilbertFactor::environment(static_cast<std::size_t>(params.n_points));
  return StateVector(CompositeSpace({f}), v).normalized();
}

double boundary_weight(const ParticleParams& params, const StateVector& packet, double width) {
  if (params.boundary == Boundary::Periodic) return 0.0;
  // Mass of the untruncated Gaussian that would sit beyond the walls,
  // estimated by extending the lattice by 3w on each side.
  const RealVector x = params.positions();
  double mean = 0.0;
  for (int j = 0; j < params.n_points; ++j) mean += std::norm(packet.amplitudes()[j]) * x[j];
  const int pad = static_cast<int>(std::ceil(3.0 * width / params.spacing));
  double inside = 0.0, total = 0.0;
  for (int j = -pad; j < params.n_points + pad; ++j) {
    const double dx = j * params.spacing - mean;
    const double w = std::exp(-dx * dx / (2.0 * width * width));
    total += w;
    if (j >= 0 && j < params.n_points) inside += w;
  }
  return 1.0 - inside / total;
}

StateVector uniform_state(const ParticleParams& params, Particle which) {
  params.validate();
  const HilbertFactor f = which == Particle::Apparatus
                              ? HilbertFactor::apparatus(static_cast<std::size_t>(params.n_points))
                              : HilbertFactor::environment(static_cast<std::size_t>(params.n_points));
  Vector v = Vector::Constant(params.n_points, 1.0 / std::sqrt(static_cast<double>(params.n_points)));
  return StateVector(CompositeSpace({f}), v);
}

}  // namespace decoh
