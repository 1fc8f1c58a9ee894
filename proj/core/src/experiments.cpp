#include "decoh/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "decoh/qinfo.hpp"
#include "decoh/random.hpp"

namespace decoh {

void ExperimentConfig::validate() const {
  schwinger.validate();
  particles.validate();
  couplings.validate();
  evolution.validate();
  if (!std::isnan(packet_width) && !(packet_width > 0.0))
    throw std::invalid_argument("apparatus.packet_width: must be > 0");
  if (!std::isnan(packet_center) &&
      (packet_center < 0.0 || packet_center > (particles.n_points - 1) * particles.spacing))
    throw std::invalid_argument("apparatus.packet_center: must lie on the lattice");
  if (n_random < 3) throw std::invalid_argument("experiment.n_random: must be >= 3");
  for (int n : sweep)
    if (n < 3) throw std::invalid_argument("experiment.sweep: sizes must be >= 3");
  if (!std::isnan(probe_time) && probe_time < 0.0)
    throw std::invalid_argument("experiment.probe_time: must be >= 0");
  if (!(ground_state_tol > 0.0))
    throw std::invalid_argument("schwinger.ground_state_tol: must be > 0");
}

double ExperimentConfig::center() const {
  return std::isnan(packet_center) ? particles.n_points * particles.spacing / 4.0 : packet_center;
}

double ExperimentConfig::width() const {
  return std::isnan(packet_width) ? particles.n_points * particles.spacing / 12.0 : packet_width;
}

Setup prepare(const ExperimentConfig& config) {
  config.validate();
  Setup s;
  s.config = config;
  s.schwinger = build_schwinger(config.schwinger);
  s.omega = ground_state(s.schwinger, config.ground_state_tol, derive_seed(config.seed, "ground_state"));
  s.pair = charge_pair_state(s.schwinger, s.omega.state);
  s.ctop = c_top_operator(s.schwinger, s.omega.state, config.ctop_mode, config.ctop_density);
  s.hamiltonian = build_full_hamiltonian(s.schwinger, s.ctop.op, config.particles, config.couplings);
  s.compiled = CompiledOperator(s.hamiltonian.total);
  s.total_charge = CompiledOperator(embed_leading(s.schwinger.total_charge, s.hamiltonian.space));
  s.ctop_full = CompiledOperator(embed_leading(s.ctop.op, s.hamiltonian.space));
  s.apparatus0 = gaussian_packet(config.particles, Particle::Apparatus, config.center(), config.width());
  s.environment0 = uniform_state(config.particles, Particle::Environment);
  s.packet_boundary_weight = boundary_weight(config.particles, s.apparatus0, config.width());
  return s;
}

namespace {

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

double expect(const CompiledOperator& op, const Vector& psi) {
  thread_local Vector scratch;
  op.apply(psi, scratch);
  return psi.dot(scratch).real();
}

template <class F>
void parallel_for(std::size_t n, F&& body) {
  const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(worker_threads()), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < nt; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(err_mutex);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

CompositeSpace system_apparatus_space(const Setup& s) {
  std::vector<HilbertFactor> f = s.schwinger.space.factors();
  f.push_back(HilbertFactor::apparatus(s.dim_a()));
  return CompositeSpace(std::move(f));
}

// Schwinger basis index -> Q_n for every site, plus apparatus/environment marginals.
struct Marginals {
  std::vector<double> charge;  // per site
  std::vector<double> pa, pe;
  double xa = 0.0, xe = 0.0;
};

Marginals marginals(const Setup& s, const Vector& psi) {
  const std::size_t ds = s.dim_s(), da = s.dim_a(), de = s.dim_e();
  const int ns = s.schwinger.n_sites();
  std::vector<double> ps(ds, 0.0);
  Marginals m;
  m.pa.assign(da, 0.0);
  m.pe.assign(de, 0.0);
  std::size_t i = 0;
  for (std::size_t si = 0; si < ds; ++si)
    for (std::size_t a = 0; a < da; ++a)
      for (std::size_t e = 0; e < de; ++e, ++i) {
        const double p = std::norm(psi[static_cast<Eigen::Index>(i)]);
        ps[si] += p;
        m.pa[a] += p;
        m.pe[e] += p;
      }
  m.charge.assign(ns, 0.0);
  for (std::size_t si = 0; si < ds; ++si) {
    for (int n = 1; n <= ns; ++n) {
      const bool down = (si >> (ns - n)) & 1U;
      const double z = down ? -1.0 : 1.0;
      const double par = n % 2 == 0 ? 1.0 : -1.0;
      m.charge[n - 1] += ps[si] * 0.5 * (z + par);
    }
  }
  const RealVector x = s.config.particles.positions();
  for (std::size_t a = 0; a < da; ++a) m.xa += m.pa[a] * x[static_cast<Eigen::Index>(a)];
  for (std::size_t e = 0; e < de; ++e) m.xe += m.pe[e] * x[static_cast<Eigen::Index>(e)];
  return m;
}

Matrix hstack_half(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out * std::sqrt(0.5);
}

}  // namespace

Vector initial_from_system(const Setup& setup, const Vector& s) {
  return kron(kron(s, setup.apparatus0.amplitudes()), setup.environment0.amplitudes());
}

Vector initial_from_system_apparatus(const Setup& setup, const Vector& sa) {
  return kron(sa, setup.environment0.amplitudes());
}

int worker_threads() {
  if (const char* env = std::getenv("DECOH_NUM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
    throw std::invalid_argument("DECOH_NUM_THREADS: expected a positive integer, got '" +
                                std::string(env) + "'");
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

void evolve_lockstep(const Setup& setup, std::vector<Vector> states, const EvolutionParams& params,
                     const std::function<void(double, const std::vector<Vector>&)>& visit) {
  params.validate();
  for (const auto& v : states)
    if (static_cast<std::size_t>(v.size()) != setup.hamiltonian.space.total_dim())
      throw std::invalid_argument("evolve_lockstep: state dimension mismatch");
  KrylovPropagator prop(setup.compiled, params.krylov_dim, params.tol);
  visit(0.0, states);
  const int steps = params.num_steps();
  for (int k = 1; k <= steps; ++k) {
    parallel_for(states.size(), [&](std::size_t i) { states[i] = prop.step(states[i], params.dt); });
    if (k % params.record_every == 0 || k == steps) visit(k * params.dt, states);
  }
}

TrajectoryRecord run_charge_density_evolution(const Setup& setup) {
  TrajectoryRecord rec;
  const Vector omega0 = initial_from_system(setup, setup.omega.state.amplitudes());
  const Vector pair0 = initial_from_system(setup, setup.pair.amplitudes());
  const int ns = setup.schwinger.n_sites();
  evolve_lockstep(setup, {omega0, pair0}, setup.config.evolution,
                  [&](double t, const std::vector<Vector>& st) {
                    const Vector sup = (st[0] + st[1]) * std::sqrt(0.5);
                    std::vector<std::pair<std::string, double>> row;
                    const std::pair<const char*, const Vector*> branches[] = {
                        {"omega", &st[0]}, {"pair", &st[1]}, {"super", &sup}};
                    for (const auto& [name, psi] : branches) {
                      const Marginals m = marginals(setup, *psi);
                      const std::string b(name);
                      for (int n = 1; n <= ns; ++n)
                        row.emplace_back("Q_" + b + "_" + std::to_string(n), m.charge[n - 1]);
                      for (std::size_t j = 0; j < m.pa.size(); ++j)
                        row.emplace_back("PA_" + b + "_" + std::to_string(j), m.pa[j]);
                      for (std::size_t j = 0; j < m.pe.size(); ++j)
                        row.emplace_back("PE_" + b + "_" + std::to_string(j), m.pe[j]);
                      row.emplace_back("xA_" + b, m.xa);
                      row.emplace_back("xE_" + b, m.xe);
                    }
                    rec.push(t, row);
                  });
  rec.check_consistent();
  return rec;
}

TrajectoryRecord run_study(const Setup& setup, const StudyOptions& options) {
  const auto& cfg = setup.config;
  const std::size_t dsa = setup.dim_sa();
  const CompositeSpace sa_space = system_apparatus_space(setup);

  std::vector<std::string> names = {"omega", "pair"};
  std::vector<Vector> init = {initial_from_system(setup, setup.omega.state.amplitudes()),
                              initial_from_system(setup, setup.pair.amplitudes())};
  Matrix r1, r2, sup0;
  double d_rr = 0.0;
  if (options.distances) {
    // Random S (x) A pair for the tilde curve, second orthogonalized against the first.
    Vector c1 = haar_random_state(sa_space, derive_seed(cfg.seed, "tilde_1")).amplitudes();
    Vector c2 = haar_random_state(sa_space, derive_seed(cfg.seed, "tilde_2")).amplitudes();
    c2 -= c1 * c1.dot(c2);
    c2.normalize();
    names.push_back("tilde_1");
    init.push_back(initial_from_system_apparatus(setup, c1));
    names.push_back("tilde_2");
    init.push_back(initial_from_system_apparatus(setup, c2));

    r1 = leading_factor(
        haar_random_state(setup.hamiltonian.space, derive_seed(cfg.seed, "random_rho_1")).amplitudes(), dsa);
    r2 = leading_factor(
        haar_random_state(setup.hamiltonian.space, derive_seed(cfg.seed, "random_rho_2")).amplitudes(), dsa);
    d_rr = bures_from_factors(r1, r2);
    sup0 = leading_factor((init[0] + init[1]) * std::sqrt(0.5), dsa);
  }
  const std::size_t first_random = init.size();
  if (options.entropies) {
    for (int k = 1; k <= cfg.n_random; ++k) {
      const std::string label = "random_" + std::to_string(k);
      names.push_back(label);
      init.push_back(initial_from_system_apparatus(
          setup, haar_random_state(sa_space, derive_seed(cfg.seed, "sieve_" + label)).amplitudes()));
    }
  }

  TrajectoryRecord rec;
  evolve_lockstep(setup, init, cfg.evolution, [&](double t, const std::vector<Vector>& st) {
    std::vector<std::pair<std::string, double>> row;
    std::vector<Matrix> m(st.size());
    parallel_for(st.size(), [&](std::size_t i) { m[i] = leading_factor(st[i], dsa); });

    if (options.distances) {
      const Matrix msup = (m[0] + m[1]) * std::sqrt(0.5);
      const Matrix md = hstack_half(m[0], m[1]);
      const Matrix tsup = (m[2] + m[3]) * std::sqrt(0.5);
      const Matrix td = hstack_half(m[2], m[3]);
      row.emplace_back("dB_rho_rhoD", bures_from_factors(msup, md));
      row.emplace_back("dB_rho_random", bures_from_factors(msup, r1));
      row.emplace_back("dB_random_random", d_rr);
      row.emplace_back("dB_rho_rho0", bures_from_factors(msup, sup0));
      row.emplace_back("dB_tilde", bures_from_factors(tsup, td));
      const Vector sup = (st[0] + st[1]) * std::sqrt(0.5);
      row.emplace_back("ctop_omega", expect(setup.ctop_full, st[0]));
      row.emplace_back("ctop_pair", expect(setup.ctop_full, st[1]));
      row.emplace_back("ctop_super", expect(setup.ctop_full, sup));
    }
    if (options.entropies) {
      row.emplace_back("S_omega", entropy_from_factor(m[0]));
      row.emplace_back("S_pair", entropy_from_factor(m[1]));
      std::vector<double> s(st.size(), 0.0);
      parallel_for(st.size() - first_random,
                   [&](std::size_t k) { s[first_random + k] = entropy_from_factor(m[first_random + k]); });
      double smin = std::numeric_limits<double>::infinity();
      for (std::size_t i = first_random; i < st.size(); ++i) {
        row.emplace_back("S_" + names[i], s[i]);
        smin = std::min(smin, s[i]);
      }
      row.emplace_back("S_random_min", smin);
    }
    for (std::size_t i = 0; i < st.size(); ++i) {
      row.emplace_back("norm_" + names[i], st[i].norm());
      row.emplace_back("energy_" + names[i], expect(setup.compiled, st[i]));
      row.emplace_back("charge_" + names[i], expect(setup.total_charge, st[i]));
    }
    rec.push(t, row);
  });
  rec.check_consistent();
  return rec;
}

TrajectoryRecord run_pointer_sieve(const Setup& setup) {
  return run_study(setup, {.distances = false, .entropies = true});
}

TrajectoryRecord run_decoherence_distance(const Setup& setup) {
  return run_study(setup, {.distances = true, .entropies = false});
}

namespace {

// rho_x for every site x from the Schwinger reduced density matrix.
std::vector<Matrix> site_densities(const Matrix& rho_s, int ns) {
  std::vector<Matrix> out;
  const auto ds = static_cast<std::size_t>(rho_s.rows());
  for (int n = 1; n <= ns; ++n) {
    const std::size_t bit = std::size_t{1} << (ns - n);
    Matrix r = Matrix::Zero(2, 2);
    for (std::size_t s = 0; s < ds; ++s) {
      if (s & bit) continue;
      r(0, 0) += rho_s(s, s);
      r(0, 1) += rho_s(s, s | bit);
      r(1, 0) += rho_s(s | bit, s);
      r(1, 1) += rho_s(s | bit, s | bit);
    }
    out.push_back(r);
  }
  return out;
}

Matrix schwinger_rho(const Vector& psi, std::size_t ds) {
  const Matrix m = leading_factor(psi, ds);
  return m * m.adjoint();
}

}  // namespace

LocalMap run_local_decoherence_map(const ExperimentConfig& config) {
  if (config.ctop_mode != CTopMode::TopTwo)
    throw std::invalid_argument("local map: ctop_mode must be top_two");
  LocalMap map;
  map.n_sites = config.schwinger.n_sites;

  for (int pass = 0; pass < 2; ++pass) {
    ExperimentConfig cfg = config;
    if (pass == 1) cfg.couplings.g_sa = 0.0;
    const Setup setup = prepare(cfg);
    const std::size_t ds = setup.dim_s();
    auto& target = pass == 0 ? map.coupled : map.uncoupled;
    std::vector<double> times;
    evolve_lockstep(setup,
                    {initial_from_system(setup, setup.omega.state.amplitudes()),
                     initial_from_system(setup, setup.pair.amplitudes())},
                    cfg.evolution, [&](double t, const std::vector<Vector>& st) {
                      const Vector sup = (st[0] + st[1]) * std::sqrt(0.5);
                      const auto rx = site_densities(schwinger_rho(sup, ds), map.n_sites);
                      const auto ro = site_densities(schwinger_rho(st[0], ds), map.n_sites);
                      const auto rc = site_densities(schwinger_rho(st[1], ds), map.n_sites);
                      std::vector<double> row;
                      for (int x = 0; x < map.n_sites; ++x)
                        row.push_back(bures_distance(rx[x], Matrix(0.5 * (ro[x] + rc[x]))));
                      target.push_back(std::move(row));
                      times.push_back(t);
                      if (pass == 0) map.ctop_pair.push_back(expect(setup.ctop_full, st[1]));
                    });
    if (pass == 0) map.times = times;
    else if (times != map.times) throw std::logic_error("local map: time grids differ");
  }
  return map;
}

std::vector<SweepPoint> run_size_sweep(const ExperimentConfig& config) {
  if (config.sweep.empty()) throw std::invalid_argument("experiment.sweep: no sizes given");
  std::vector<SweepPoint> out;
  for (int n : config.sweep) {
    ExperimentConfig cfg = config;
    cfg.particles.n_points = n;
    const Setup setup = prepare(cfg);
    const TrajectoryRecord rec = run_study(setup, {});
    const auto& d = rec.column("dB_rho_rhoD");
    const auto it = std::min_element(d.begin(), d.end());
    SweepPoint p;
    p.n_points = n;
    p.min_distance = *it;
    p.min_distance_time = rec.times[static_cast<std::size_t>(it - d.begin())];
    const double probe = std::isnan(cfg.probe_time) ? p.min_distance_time : cfg.probe_time;
    std::size_t best = 0;
    for (std::size_t i = 0; i < rec.times.size(); ++i)
      if (std::abs(rec.times[i] - probe) < std::abs(rec.times[best] - probe)) best = i;
    p.probe_distance = d[best];
    const auto& so = rec.column("S_omega");
    const auto& sp = rec.column("S_pair");
    const auto& sr = rec.column("S_random_min");
    std::vector<double> gap(so.size());
    for (std::size_t i = 0; i < gap.size(); ++i) gap[i] = sr[i] - std::max(so[i], sp[i]);
    p.entropy_gap = late_mean(rec.times, gap);
    out.push_back(p);
  }
  return out;
}

double max_drift(const std::vector<double>& x, bool relative) {
  if (x.empty()) return 0.0;
  double d = 0.0;
  for (double v : x) d = std::max(d, std::abs(v - x.front()));
  return relative ? d / std::max(std::abs(x.front()), 1.0) : d;
}

double onset_time(const std::vector<double>& times, const std::vector<double>& signal,
                  double fraction) {
  if (times.size() != signal.size() || times.empty())
    throw std::invalid_argument("onset_time: size mismatch");
  double mx = 0.0;
  for (double v : signal) mx = std::max(mx, v);
  if (mx <= 0.0) return std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < signal.size(); ++i)
    if (signal[i] >= fraction * mx) return times[i];
  return std::numeric_limits<double>::infinity();
}

double late_mean(const std::vector<double>& times, const std::vector<double>& x,
                 double start_fraction) {
  if (times.size() != x.size() || times.empty()) throw std::invalid_argument("late_mean: size mismatch");
  const double start = start_fraction * times.back();
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (times[i] >= start) {
      sum += x[i];
      ++n;
    }
  return sum / n;
}

}  // namespace decoh
