#include "decoh/schwinger.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "decoh/lanczos.hpp"

namespace decoh {

namespace {

double parity(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }  // (-1)^n

std::size_t site_factor(int n) { return static_cast<std::size_t>(n - 1); }

}  // namespace

void SchwingerParams::validate() const {
  if (n_sites < 4 || n_sites % 2 != 0)
    throw std::invalid_argument("schwinger.n_sites: must be even and >= 4, got " +
                                std::to_string(n_sites));
  if (!(spacing > 0.0)) throw std::invalid_argument("schwinger.spacing: must be > 0");
  if (!(mass >= 0.0)) throw std::invalid_argument("schwinger.mass: must be >= 0");
  if (!(coupling >= 0.0)) throw std::invalid_argument("schwinger.coupling: must be >= 0");
  if (!std::isfinite(background_field))
    throw std::invalid_argument("schwinger.background_field: must be finite");
}

CompositeSpace schwinger_space(int n_sites) {
  std::vector<HilbertFactor> f;
  for (int n = 1; n <= n_sites; ++n) f.push_back(HilbertFactor::schwinger_site(n));
  return CompositeSpace(std::move(f));
}

SchwingerOperators build_schwinger(const SchwingerParams& params) {
  params.validate();
  const int ns = params.n_sites;
  const double a = params.spacing;
  const double m = params.mass;
  const double g = params.coupling;

  SchwingerOperators ops;
  ops.params = params;
  ops.space = schwinger_space(ns);
  const auto& sp = ops.space;
  const Matrix z = pauli::z();

  OperatorExpr h(sp);

  // hopping
  for (int n = 1; n < ns; ++n) {
    h.add_term(1.0 / (2.0 * a), {{site_factor(n), 1, pauli::plus()}, {site_factor(n + 1), 1, pauli::minus()}});
    h.add_term(1.0 / (2.0 * a), {{site_factor(n + 1), 1, pauli::plus()}, {site_factor(n), 1, pauli::minus()}});
  }

  // staggered mass
  for (int n = 1; n <= ns; ++n) {
    const double c = 0.5 * m * parity(n);
    h.add_term(c, {});
    h.add_local(c, site_factor(n), z);
  }

  // electric energy: L_n = c_n + 1/2 sum_{k<=n} Z_k with c_n = eps0 + 1/2 sum_{k<=n} (-1)^k,
  // L_n^2 = c_n^2 + n/4 + c_n sum_k Z_k + 1/2 sum_{k<l} Z_k Z_l.
  const double ge = 0.5 * g * g * a;
  if (ge != 0.0) {
    double c_n = params.background_field;
    for (int n = 1; n < ns; ++n) {
      c_n += 0.5 * parity(n);
      h.add_term(ge * (c_n * c_n + 0.25 * n), {});
      for (int k = 1; k <= n; ++k) {
        if (c_n != 0.0) h.add_local(ge * c_n, site_factor(k), z);
        for (int l = k + 1; l <= n; ++l)
          h.add_term(0.5 * ge, {{site_factor(k), 1, z}, {site_factor(l), 1, z}});
      }
    }
  }
  ops.hamiltonian = std::move(h);

  ops.total_charge = OperatorExpr(sp);
  for (int n = 1; n <= ns; ++n) {
    OperatorExpr q(sp);
    q.add_local(0.5, site_factor(n), z);
    q.add_term(0.5 * parity(n), {});
    ops.total_charge += q;
    ops.charge_density.push_back(std::move(q));

    OperatorExpr nu(sp);
    nu.add_term(0.5, {});
    nu.add_local(0.5, site_factor(n), z);
    ops.fermion_density.push_back(std::move(nu));

    OperatorExpr pn(sp);
    pn.add_term(0.5, {});
    pn.add_local(0.5 * parity(n), site_factor(n), z);
    ops.particle_density.push_back(std::move(pn));
  }
  return ops;
}

GroundState ground_state(const SchwingerOperators& ops, double tol, std::uint64_t seed) {
  CompiledOperator h(ops.hamiltonian);
  LanczosOptions opts;
  opts.tol = tol;
  opts.seed = seed;
  opts.krylov_dim = static_cast<int>(std::min<std::size_t>(80, ops.space.total_dim()));
  LanczosResult r = lowest_eigenpair(h, opts);

  Eigen::Index imax = 0;
  r.vector.cwiseAbs().maxCoeff(&imax);
  const cplx ph = r.vector[imax] / std::abs(r.vector[imax]);
  Vector v = r.vector / ph;
  return {StateVector(ops.space, v), r.energy, r.residual, r.iterations};
}

StateVector staggered_state(const SchwingerOperators& ops) {
  std::vector<Vector> locals;
  for (int n = 1; n <= ops.n_sites(); ++n) {
    Vector v = Vector::Zero(2);
    // Z_n = -(-1)^n: odd sites up (|0>), even sites down (|1>)
    v[n % 2 == 1 ? 0 : 1] = 1.0;
    locals.push_back(v);
  }
  return product_state(ops.space, locals);
}

StateVector charge_pair_state(const SchwingerOperators& ops, const StateVector& omega) {
  const auto& sp = ops.space;
  OperatorExpr pair(sp, false);
  pair.add_term(1.0, {{site_factor(1), 1, pauli::minus()}, {site_factor(2), 1, pauli::plus()}});
  Vector raw = CompiledOperator(pair).apply(omega.amplitudes());
  if (raw.norm() < 1e-6)
    throw std::runtime_error("charge_pair_state: pair operator annihilates the vacuum (norm " +
                             std::to_string(raw.norm()) + ")");
  raw -= omega.amplitudes() * omega.amplitudes().dot(raw);
  if (raw.norm() < 1e-6)
    throw std::runtime_error("charge_pair_state: pair state is parallel to the vacuum");
  StateVector c(sp, raw / raw.norm());

  const double net = expectation(ops.total_charge, c);
  if (std::abs(net) > 1e-8)
    throw std::runtime_error("charge_pair_state: net charge " + std::to_string(net));
  const double q1 = expectation(ops.charge_density[0], c);
  if (std::abs(q1) <= 0.8)
    throw std::runtime_error("charge_pair_state: site 1 charge " + std::to_string(q1) +
                             " is not localized");
  return c;
}

std::vector<int> c_top_sites(int n_sites, CTopMode mode) {
  std::vector<int> s;
  if (mode == CTopMode::AllButBottomTwo) {
    for (int n = 3; n <= n_sites; ++n) s.push_back(n);
  } else {
    for (int n = std::max(1, n_sites - 1); n <= n_sites; ++n) s.push_back(n);
  }
  return s;
}

CTop c_top_operator(const SchwingerOperators& ops, const StateVector& omega, CTopMode mode,
                    DensityKind density) {
  CTop out;
  out.mode = mode;
  out.density = density;
  out.sites = c_top_sites(ops.n_sites(), mode);
  if (out.sites.empty()) throw std::invalid_argument("c_top_operator: empty site set");

  const auto& dens = density == DensityKind::Particle ? ops.particle_density : ops.fermion_density;
  OperatorExpr raw(ops.space);
  const double w = 1.0 / static_cast<double>(out.sites.size());
  for (int n : out.sites) raw += w * dens[site_factor(n)];
  out.vacuum_value = expectation(raw, omega);
  out.raw = raw;
  out.op = raw + OperatorExpr::identity(ops.space, -out.vacuum_value);
  return out;
}

}  // namespace decoh
