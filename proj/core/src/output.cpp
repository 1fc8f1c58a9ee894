#include "decoh/output.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#ifndef DECOH_VERSION
#define DECOH_VERSION "0.0.0"
#endif

namespace decoh {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()), path_(path) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  row(header);
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> f;
  f.reserve(values.size());
  for (double v : values) f.push_back(format_double(v));
  row(f);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_)
    throw std::logic_error(path_.string() + ": row has " + std::to_string(fields.size()) +
                           " fields, header has " + std::to_string(columns_));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw std::runtime_error("error writing " + path_.string());
}

void write_record_csv(const std::filesystem::path& path, const TrajectoryRecord& rec,
                      const std::vector<std::pair<std::string, std::string>>& columns) {
  rec.check_consistent();
  std::vector<std::string> header = {"t"};
  std::vector<const std::vector<double>*> cols;
  for (const auto& [label, name] : columns) {
    header.push_back(name);
    cols.push_back(&rec.column(label));
  }
  CsvWriter w(path, header);
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    std::vector<double> row = {rec.times[i]};
    for (const auto* c : cols) row.push_back((*c)[i]);
    w.row(row);
  }
  w.close();
}

void write_record_csv(const std::filesystem::path& path, const TrajectoryRecord& rec) {
  std::vector<std::pair<std::string, std::string>> cols;
  for (const auto& s : rec.series) cols.emplace_back(s.first, s.first);
  write_record_csv(path, rec, cols);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::out_of_range("csv: no column '" + name + "'");
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  for (const auto& r : rows) {
    const std::string& s = r.at(c);
    double v = 0.0;
    if (s == "nan") v = std::nan("");
    else if (s == "inf") v = INFINITY;
    else if (s == "-inf") v = -INFINITY;
    else {
      auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("csv: column '" + name + "' has non-numeric field '" + s + "'");
    }
    out.push_back(v);
  }
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> f;
    std::stringstream ss(l);
    std::string x;
    while (std::getline(ss, x, ',')) f.push_back(x);
    if (!l.empty() && l.back() == ',') f.emplace_back();
    return f;
  };
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
  }
  return t;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  nlohmann::ordered_json j;
  j["subcommand"] = m.subcommand;
  j["config_hash"] = m.config_hash;
  j["version"] = m.version;
  j["master_seed"] = m.master_seed;
  j["seeds"] = m.seeds;
  j["started_utc"] = m.started_utc;
  j["wall_seconds"] = m.wall_seconds;
  j["threads"] = m.threads;
  j["files"] = m.files;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

std::string artifact_version() { return DECOH_VERSION; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace decoh
