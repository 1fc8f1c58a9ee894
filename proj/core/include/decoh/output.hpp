#pragma once

// Locale-independent CSV and the JSON run manifest.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "decoh/propagator.hpp"

namespace decoh {

/// Shortest round-trip form up to 17 significant digits; "nan", "inf", "-inf".
std::string format_double(double v);

class CsvWriter {
 public:
  /// Throws std::runtime_error when the file cannot be opened.
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  /// Mixed row: strings are written verbatim.
  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::filesystem::path path_;
};

/// Writes `t` plus the listed series; `columns` pairs are (series label, CSV header).
void write_record_csv(const std::filesystem::path& path, const TrajectoryRecord& rec,
                      const std::vector<std::pair<std::string, std::string>>& columns);
/// Writes `t` plus every series in recording order.
void write_record_csv(const std::filesystem::path& path, const TrajectoryRecord& rec);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  std::vector<double> numbers(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

struct RunManifest {
  std::string subcommand;
  std::string config_hash;
  std::string version;
  std::uint64_t master_seed = 0;
  std::map<std::string, std::uint64_t> seeds;
  std::string started_utc;
  double wall_seconds = 0.0;
  std::vector<std::string> files;
  int threads = 1;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

std::string artifact_version();
std::string utc_timestamp();

}  // namespace decoh
