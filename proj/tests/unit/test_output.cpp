#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "decoh/output.hpp"
#include "json.hpp"

using namespace decoh;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "decoh_output_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("output") {
  TEST_CASE("doubles round trip exactly") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, 1e-17}) {
      const std::string s = format_double(v);
      CHECK(std::stod(s) == v);
    }
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(1.5).find(',') == std::string::npos);
  }

  TEST_CASE("csv layout and read back") {
    const auto path = scratch("table.csv");
    {
      CsvWriter w(path, {"t", "x"});
      w.row(std::vector<double>{0.0, 0.1});
      w.row(std::vector<double>{0.5, 1.0 / 3.0});
      CHECK_THROWS(w.row(std::vector<double>{1.0}));
      w.close();
    }
    const std::string text = slurp(path);
    CHECK(text.rfind("t,x\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    const auto table = read_csv(path);
    CHECK(table.header == std::vector<std::string>{"t", "x"});
    CHECK(table.numbers("x")[1] == 1.0 / 3.0);
    CHECK_THROWS(table.column("y"));
  }

  TEST_CASE("trajectory records become columns") {
    TrajectoryRecord rec;
    rec.push(0.0, {{"a", 1.0}, {"b", 2.0}});
    rec.push(0.5, {{"a", 1.5}, {"b", 2.5}});
    const auto path = scratch("rec.csv");
    write_record_csv(path, rec, {{"b", "bee"}});
    const auto t = read_csv(path);
    CHECK(t.header == std::vector<std::string>{"t", "bee"});
    CHECK(t.numbers("bee") == std::vector<double>{2.0, 2.5});
    write_record_csv(path, rec);
    CHECK(read_csv(path).header == std::vector<std::string>{"t", "a", "b"});
  }

  TEST_CASE("manifest") {
    RunManifest m;
    m.subcommand = "evolve";
    m.config_hash = "0123456789abcdef";
    m.version = artifact_version();
    m.master_seed = 11;
    m.seeds["tilde_1"] = 12;
    m.started_utc = utc_timestamp();
    m.files = {"evolution.csv"};
    const auto path = scratch("manifest.json");
    write_manifest(path, m);
    const auto j = nlohmann::json::parse(slurp(path));
    CHECK(j["subcommand"] == "evolve");
    CHECK(j["config_hash"] == "0123456789abcdef");
    CHECK(j["seeds"]["tilde_1"] == 12);
    CHECK(j["files"][0] == "evolution.csv");
    CHECK(m.started_utc.back() == 'Z');
  }
}
