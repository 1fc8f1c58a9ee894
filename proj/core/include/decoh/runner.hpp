#pragma once

// Subcommand dispatch shared by the command-line tool and the tests.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "decoh/experiments.hpp"

namespace decoh {

const std::vector<std::string>& subcommands();

/// Runs one subcommand, writing CSV files and manifest.json into `out_dir`
/// (created if missing). Returns 0 on success and 1 when a conservation
/// check or oracle comparison fails. Throws on invalid input.
int run_subcommand(const std::string& subcommand, const ExperimentConfig& config,
                   const std::filesystem::path& out_dir, std::ostream& log);

struct OracleResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass() const { return value < tolerance; }
};

/// Dense-matrix cross-checks of the fast kernels on spaces of dim <= 4096.
std::vector<OracleResult> run_oracle_checks(std::uint64_t seed);

/// Dense Tr over the complement of `keep` from the full outer product; only
/// for small spaces.
Matrix dense_partial_trace(const StateVector& psi, const std::vector<std::size_t>& keep);

}  // namespace decoh
