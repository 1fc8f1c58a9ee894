#include "decoh/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "decoh/config.hpp"
#include "decoh/output.hpp"
#include "decoh/qinfo.hpp"
#include "decoh/random.hpp"

namespace decoh {

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"ground-state", "evolve",   "pointer-sieve", "decoherence",
                                             "local-map",    "sweep",    "oracle-check"};
  return s;
}

namespace {

constexpr double kConservationTol = 1e-8;

// Fails when any norm_/energy_/charge_ series drifts.
bool check_conservation(const TrajectoryRecord& rec, std::ostream& log) {
  bool ok = true;
  for (const auto& [label, v] : rec.series) {
    double drift = -1.0;
    if (label.rfind("norm_", 0) == 0 || label.rfind("charge_", 0) == 0) drift = max_drift(v);
    else if (label.rfind("energy_", 0) == 0) drift = max_drift(v, true);
    if (drift < 0.0) continue;
    if (drift >= kConservationTol) {
      log << "conservation: " << label << " drifts by " << format_double(drift) << "\n";
      ok = false;
    }
  }
  return ok;
}

std::vector<std::pair<std::string, std::string>> same_names(const std::vector<std::string>& labels) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& l : labels) out.emplace_back(l, l);
  return out;
}

void write_sweep(const std::filesystem::path& path, const std::vector<SweepPoint>& pts) {
  CsvWriter w(path, {"n_points", "min_dB", "min_dB_time", "probe_dB", "entropy_gap"});
  for (const auto& p : pts)
    w.row({static_cast<double>(p.n_points), p.min_distance, p.min_distance_time, p.probe_distance,
           p.entropy_gap});
  w.close();
}

void write_study(const std::filesystem::path& dir, const TrajectoryRecord& rec, const Setup& setup,
                 bool distances, bool entropies, std::vector<std::string>& files) {
  if (distances) {
    write_record_csv(dir / "distances.csv", rec,
                     same_names({"dB_rho_rhoD", "dB_rho_random", "dB_random_random", "dB_rho_rho0",
                                 "dB_tilde"}));
    files.push_back("distances.csv");
    write_record_csv(dir / "charge_top.csv", rec, same_names({"ctop_omega", "ctop_pair", "ctop_super"}));
    files.push_back("charge_top.csv");
  }
  if (entropies) {
    std::vector<std::string> cols = {"S_omega", "S_pair"};
    for (int k = 1; k <= setup.config.n_random; ++k) cols.push_back("S_random_" + std::to_string(k));
    cols.push_back("S_random_min");
    write_record_csv(dir / "entropy.csv", rec, same_names(cols));
    files.push_back("entropy.csv");
  }
  std::vector<std::string> diag;
  for (const auto& s : rec.series)
    if (s.first.rfind("norm_", 0) == 0 || s.first.rfind("energy_", 0) == 0 ||
        s.first.rfind("charge_", 0) == 0)
      diag.push_back(s.first);
  write_record_csv(dir / "conservation.csv", rec, same_names(diag));
  files.push_back("conservation.csv");
}

std::map<std::string, std::uint64_t> derived_seeds(const ExperimentConfig& c) {
  std::map<std::string, std::uint64_t> s;
  for (const char* l : {"ground_state", "tilde_1", "tilde_2", "random_rho_1", "random_rho_2"})
    s[l] = derive_seed(c.seed, l);
  for (int k = 1; k <= c.n_random; ++k) {
    const std::string l = "sieve_random_" + std::to_string(k);
    s[l] = derive_seed(c.seed, l);
  }
  return s;
}

}  // namespace

Matrix dense_partial_trace(const StateVector& psi, const std::vector<std::size_t>& keep) {
  const auto& sp = psi.space();
  std::vector<bool> kept(sp.num_factors(), false);
  for (auto k : keep) kept.at(k) = true;
  std::size_t dk = 1;
  for (auto k : keep) dk *= sp.dim(k);
  const Matrix full = psi.amplitudes() * psi.amplitudes().adjoint();
  Matrix rho = Matrix::Zero(dk, dk);
  auto kept_index = [&](const std::vector<std::size_t>& d) {
    std::size_t idx = 0;
    for (std::size_t f = 0; f < d.size(); ++f)
      if (kept[f]) idx = idx * sp.dim(f) + d[f];
    return idx;
  };
  for (std::size_t p = 0; p < sp.total_dim(); ++p) {
    const auto dp = sp.unflatten(p);
    for (std::size_t q = 0; q < sp.total_dim(); ++q) {
      const auto dq = sp.unflatten(q);
      bool same = true;
      for (std::size_t f = 0; f < dp.size() && same; ++f)
        if (!kept[f] && dp[f] != dq[f]) same = false;
      if (same) rho(kept_index(dp), kept_index(dq)) += full(p, q);
    }
  }
  return rho;
}

std::vector<OracleResult> run_oracle_checks(std::uint64_t seed) {
  std::vector<OracleResult> out;

  ExperimentConfig small;
  small.schwinger.n_sites = 4;
  small.particles.n_points = 4;
  small.seed = seed;
  small.packet_center = 1.5;
  small.packet_width = 1.0;
  {
    const Setup s = prepare(small);
    const Matrix dense = s.hamiltonian.total.to_dense(256);
    Rng rng(derive_seed(seed, "oracle_apply"));
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
      const Vector v = random_complex_gaussian(s.hamiltonian.space.total_dim(), rng);
      worst = std::max(worst, (s.compiled.apply(v) - dense * v).cwiseAbs().maxCoeff());
    }
    out.push_back({"apply_vs_dense_dim256", worst, 1e-12});

    const StateVector psi = haar_random_state(s.hamiltonian.space, derive_seed(seed, "oracle_trace"));
    const std::vector<std::size_t> keep = {0, 2, 4};
    const Matrix fast = partial_trace(psi, keep).matrix;
    out.push_back({"partial_trace_vs_dense_dim256", (fast - dense_partial_trace(psi, keep)).cwiseAbs().maxCoeff(),
                   1e-12});

    const StateVector phi = haar_random_state(s.hamiltonian.space, derive_seed(seed, "oracle_trace_2"));
    const std::size_t lead = s.dim_sa();
    const Matrix a = leading_factor(psi.amplitudes(), lead);
    const Matrix b = leading_factor(phi.amplitudes(), lead);
    const Matrix ra = a * a.adjoint();
    const Matrix rb = b * b.adjoint();
    out.push_back({"factor_fidelity_vs_dense",
                   std::abs(fidelity_from_factors(a, b) - fidelity(ra, rb)), 1e-8});
    out.push_back({"factor_entropy_vs_dense",
                   std::abs(entropy_from_factor(a) - von_neumann_entropy(ra)), 1e-10});
  }
  {
    SchwingerParams p;
    const SchwingerOperators ops = build_schwinger(p);
    const GroundState gs = ground_state(ops, 1e-10, derive_seed(seed, "ground_state"));
    Eigen::SelfAdjointEigenSolver<Matrix> es(ops.hamiltonian.to_dense(), Eigen::EigenvaluesOnly);
    out.push_back({"lanczos_vs_dense_energy_dim256", std::abs(gs.energy - es.eigenvalues()[0]), 1e-9});
  }
  {
    ExperimentConfig mid;
    mid.schwinger.n_sites = 6;
    mid.particles.n_points = 4;
    mid.packet_center = 1.5;
    mid.packet_width = 1.0;
    mid.seed = seed;
    const Setup s = prepare(mid);
    const Vector psi0 = initial_from_system(s, s.pair.amplitudes());
    ExactPropagator exact(s.hamiltonian.total, 4096);
    KrylovPropagator kry(s.compiled, 30, 1e-12);
    Vector psi = psi0;
    const int steps = 100;
    const double dt = 0.1;
    for (int k = 0; k < steps; ++k) psi = kry.step(psi, dt);
    const Vector ref = exact.evolve(psi0, steps * dt);
    out.push_back({"krylov_vs_dense_100_steps_dim" + std::to_string(psi0.size()), (psi - ref).norm(), 1e-8});
  }
  return out;
}

int run_subcommand(const std::string& sub, const ExperimentConfig& config,
                   const std::filesystem::path& out_dir, std::ostream& log) {
  if (std::find(subcommands().begin(), subcommands().end(), sub) == subcommands().end())
    throw std::invalid_argument("unknown subcommand '" + sub + "'");
  config.validate();
  std::filesystem::create_directories(out_dir);
  const auto t0 = std::chrono::steady_clock::now();

  RunManifest manifest;
  manifest.subcommand = sub;
  manifest.config_hash = config_hash(config);
  manifest.version = artifact_version();
  manifest.master_seed = config.seed;
  manifest.seeds = derived_seeds(config);
  manifest.started_utc = utc_timestamp();
  manifest.threads = worker_threads();
  auto& files = manifest.files;
  int status = 0;

  {
    std::ofstream cfg(out_dir / "config.txt", std::ios::binary);
    cfg << serialize_config(config);
    files.push_back("config.txt");
  }

  if (sub == "oracle-check") {
    const auto results = run_oracle_checks(config.seed);
    CsvWriter w(out_dir / "oracle.csv", {"check", "value", "tolerance", "pass"});
    for (const auto& r : results) {
      w.row(std::vector<std::string>{r.name, format_double(r.value), format_double(r.tolerance),
                                     r.pass() ? "1" : "0"});
      log << (r.pass() ? "PASS " : "FAIL ") << r.name << " " << format_double(r.value) << " < "
          << format_double(r.tolerance) << "\n";
      if (!r.pass()) status = 1;
    }
    w.close();
    files.push_back("oracle.csv");
  } else if (sub == "local-map") {
    const LocalMap map = run_local_decoherence_map(config);
    CsvWriter w(out_dir / "map.csv", {"t", "site", "dB", "dB_gsa0", "diff", "logdiff"});
    for (std::size_t i = 0; i < map.times.size(); ++i)
      for (int x = 0; x < map.n_sites; ++x) {
        const double d1 = map.coupled[i][x], d0 = map.uncoupled[i][x];
        const double diff = d1 - d0;
        w.row({map.times[i], static_cast<double>(x + 1), d1, d0, diff,
               std::log10(std::max(std::abs(diff), 1e-300))});
      }
    w.close();
    files.push_back("map.csv");
    CsvWriter c(out_dir / "map_charge_top.csv", {"t", "ctop_pair"});
    for (std::size_t i = 0; i < map.times.size(); ++i) c.row({map.times[i], map.ctop_pair[i]});
    c.close();
    files.push_back("map_charge_top.csv");
  } else if (sub == "sweep") {
    ExperimentConfig c = config;
    if (c.sweep.empty()) c.sweep = {8, 12, 16, 20};
    write_sweep(out_dir / "sweep.csv", run_size_sweep(c));
    files.push_back("sweep.csv");
  } else {
    const Setup setup = prepare(config);
    if (setup.packet_boundary_weight > 0.01)
      log << "warning: apparatus packet has " << format_double(setup.packet_boundary_weight)
          << " of its weight beyond the hard walls\n";
    if (!config.particles.apparatus_is_heavy())
      log << "warning: mass_apparatus < 10 mass_environment\n";

    if (sub == "ground-state") {
      const auto& ops = setup.schwinger;
      CsvWriter w(out_dir / "ground_state.csv",
                  {"site", "Q_omega", "Q_pair", "n_omega", "n_pair"});
      for (int n = 1; n <= ops.n_sites(); ++n)
        w.row({static_cast<double>(n), expectation(ops.charge_density[n - 1], setup.omega.state),
               expectation(ops.charge_density[n - 1], setup.pair),
               expectation(ops.particle_density[n - 1], setup.omega.state),
               expectation(ops.particle_density[n - 1], setup.pair)});
      w.close();
      CsvWriter s(out_dir / "ground_state_summary.csv",
                  {"energy", "residual", "overlap_omega_pair", "charge_pair", "ctop_vacuum"});
      s.row({setup.omega.energy, setup.omega.residual, std::abs(inner(setup.omega.state, setup.pair)),
             expectation(ops.total_charge, setup.pair), setup.ctop.vacuum_value});
      s.close();
      files.push_back("ground_state.csv");
      files.push_back("ground_state_summary.csv");
    } else if (sub == "evolve") {
      write_record_csv(out_dir / "evolution.csv", run_charge_density_evolution(setup));
      files.push_back("evolution.csv");
    } else {
      const bool distances = sub == "decoherence";
      const bool entropies = sub == "pointer-sieve";
      const TrajectoryRecord rec = run_study(setup, {.distances = distances, .entropies = entropies});
      write_study(out_dir, rec, setup, distances, entropies, files);
      if (!check_conservation(rec, log)) status = 1;
      if (!config.sweep.empty()) {
        write_sweep(out_dir / "sweep.csv", run_size_sweep(config));
        files.push_back("sweep.csv");
      }
    }
  }

  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(out_dir / "manifest.json", manifest);
  return status;
}

}  // namespace decoh
