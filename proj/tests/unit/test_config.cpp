#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "decoh/config.hpp"

using namespace decoh;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("minimal file applies every default") {
    const auto c = parse_config_text("n_sites = 8\n");
    CHECK(c == ExperimentConfig{});
    CHECK(std::isnan(c.packet_width));
    CHECK(c.n_random == 5);
  }

  TEST_CASE("sections, dotted keys and comments") {
    const auto c = parse_config_text(
        "# comment line\n"
        "[schwinger]\n"
        "n_sites = 6   # trailing\n"
        "mass = 0.25\n"
        "[couplings]\n"
        "sigma = 2.5\n"
        "particles.n_points = 10\n"
        "[measurement]\n"
        "ctop_mode = top_two\n"
        "[experiment]\n"
        "sweep = 8, 12\n");
    CHECK(c.schwinger.n_sites == 6);
    CHECK(c.schwinger.mass == 0.25);
    CHECK(c.couplings.sigma == 2.5);
    CHECK(c.particles.n_points == 10);
    CHECK(c.ctop_mode == CTopMode::TopTwo);
    CHECK(c.sweep == std::vector<int>{8, 12});
  }

  TEST_CASE("json form") {
    const auto c = parse_config_text(R"({"schwinger": {"n_sites": 6, "coupling": 0.5},
      "apparatus": {"packet_center": null, "packet_width": 1.25},
      "experiment": {"sweep": [8, 12, 16], "seed": 9}})");
    CHECK(c.schwinger.n_sites == 6);
    CHECK(c.schwinger.coupling == 0.5);
    CHECK(std::isnan(c.packet_center));
    CHECK(c.packet_width == 1.25);
    CHECK(c.sweep == std::vector<int>{8, 12, 16});
    CHECK(c.seed == 9);
    CHECK(starts_with(error_of(R"({"experiment": {"sweep": [1.5]}})"), "experiment.sweep"));
  }

  TEST_CASE("round trip through the canonical form") {
    ExperimentConfig c;
    c.schwinger.mass = 0.1 + 0.2;
    c.couplings.g_ae = 1.0 / 3.0;
    c.particles.boundary = Boundary::Periodic;
    c.ctop_density = DensityKind::Fermion;
    c.packet_width = 0.7;
    c.sweep = {8, 20};
    c.probe_time = 12.5;
    const auto back = parse_config_text(serialize_config(c));
    CHECK(back == c);
    CHECK(back.schwinger.mass == c.schwinger.mass);
    CHECK(back.couplings.g_ae == c.couplings.g_ae);
    CHECK(config_hash(back) == config_hash(c));
  }

  TEST_CASE("hash is stable under key reordering") {
    const auto a = parse_config_text("mass = 0.3\ng_sa = 2\nn_sites = 6\n");
    const auto b = parse_config_text("n_sites = 6\n[couplings]\ng_sa = 2.0\n[schwinger]\nmass = 0.3\n");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    CHECK(config_hash(a) != config_hash(ExperimentConfig{}));
  }

  TEST_CASE("schema violations name the field") {
    CHECK(starts_with(error_of("sigma = -1\n"), "couplings.sigma"));
    CHECK(starts_with(error_of("bogus = 1\n"), "bogus"));
    CHECK(error_of("bogus = 1\n").find("unknown key") != std::string::npos);
    CHECK(error_of("spacing = 1\n").find("ambiguous") != std::string::npos);
    CHECK(error_of("n_sites = 8\nschwinger.n_sites = 8\n").find("more than once") != std::string::npos);
    CHECK(starts_with(error_of("n_sites = eight\n"), "schwinger.n_sites"));
    CHECK(starts_with(error_of("n_sites = 7\n"), "schwinger.n_sites"));
    CHECK(starts_with(error_of("boundary = sticky\n"), "particles.boundary"));
    CHECK(starts_with(error_of("[schwinger\n"), "line 1"));
    CHECK(starts_with(error_of("dt = 0\n"), "evolution.dt"));
  }

  TEST_CASE("file errors") {
    CHECK_THROWS_AS(parse_config_file("/nonexistent/decoh.conf"), ConfigError);
    const auto path = std::filesystem::temp_directory_path() / "decoh_config_test.conf";
    {
      std::ofstream(path) << "n_sites = 6\n";
    }
    CHECK(parse_config_file(path).schwinger.n_sites == 6);
    std::filesystem::remove(path);
  }

  TEST_CASE("every key appears in the canonical form") {
    const auto text = serialize_config(ExperimentConfig{});
    for (const auto& k : config_keys()) CHECK(text.find(k + " = ") != std::string::npos);
  }
}
