#include "decoh/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "decoh/output.hpp"
#include "decoh/random.hpp"
#include "json.hpp"

namespace decoh {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const std::string& key, const std::string& why) {
  throw ConfigError(key + ": " + why);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out))
    fail(key, "expected a number, got '" + v + "'");
  return out;
}

double to_optional_double(const std::string& key, const std::string& v) {
  if (v == "auto") return std::numeric_limits<double>::quiet_NaN();
  return to_double(key, v);
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    fail(key, "expected an integer, got '" + v + "'");
  return out;
}

int to_small_int(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    fail(key, "integer out of range");
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    fail(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

std::string opt_str(double v) { return std::isnan(v) ? "auto" : format_double(v); }

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define DECOH_DOUBLE(KEY, MEMBER)                                                          \
  Field {                                                                                  \
    KEY, [](ExperimentConfig& c, const std::string& v) { c.MEMBER = to_double(KEY, v); }, \
        [](const ExperimentConfig& c) { return format_double(c.MEMBER); }                  \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"schwinger.n_sites",
       [](ExperimentConfig& c, const std::string& v) { c.schwinger.n_sites = to_small_int("schwinger.n_sites", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.schwinger.n_sites); }},
      DECOH_DOUBLE("schwinger.spacing", schwinger.spacing),
      DECOH_DOUBLE("schwinger.mass", schwinger.mass),
      DECOH_DOUBLE("schwinger.coupling", schwinger.coupling),
      DECOH_DOUBLE("schwinger.background_field", schwinger.background_field),
      DECOH_DOUBLE("schwinger.ground_state_tol", ground_state_tol),
      {"particles.n_points",
       [](ExperimentConfig& c, const std::string& v) { c.particles.n_points = to_small_int("particles.n_points", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.particles.n_points); }},
      DECOH_DOUBLE("particles.spacing", particles.spacing),
      DECOH_DOUBLE("particles.mass_apparatus", particles.mass_apparatus),
      DECOH_DOUBLE("particles.mass_environment", particles.mass_environment),
      {"particles.boundary",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "hard_wall") c.particles.boundary = Boundary::HardWall;
         else if (v == "periodic") c.particles.boundary = Boundary::Periodic;
         else fail("particles.boundary", "expected hard_wall or periodic, got '" + v + "'");
       },
       [](const ExperimentConfig& c) {
         return std::string(c.particles.boundary == Boundary::HardWall ? "hard_wall" : "periodic");
       }},
      DECOH_DOUBLE("couplings.g_sa", couplings.g_sa),
      DECOH_DOUBLE("couplings.g_ae", couplings.g_ae),
      DECOH_DOUBLE("couplings.sigma", couplings.sigma),
      {"apparatus.packet_center",
       [](ExperimentConfig& c, const std::string& v) {
         c.packet_center = to_optional_double("apparatus.packet_center", v);
       },
       [](const ExperimentConfig& c) { return opt_str(c.packet_center); }},
      {"apparatus.packet_width",
       [](ExperimentConfig& c, const std::string& v) {
         c.packet_width = to_optional_double("apparatus.packet_width", v);
       },
       [](const ExperimentConfig& c) { return opt_str(c.packet_width); }},
      {"measurement.ctop_mode",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "all_but_bottom_two") c.ctop_mode = CTopMode::AllButBottomTwo;
         else if (v == "top_two") c.ctop_mode = CTopMode::TopTwo;
         else fail("measurement.ctop_mode", "expected all_but_bottom_two or top_two, got '" + v + "'");
       },
       [](const ExperimentConfig& c) {
         return std::string(c.ctop_mode == CTopMode::TopTwo ? "top_two" : "all_but_bottom_two");
       }},
      {"measurement.density",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "particle") c.ctop_density = DensityKind::Particle;
         else if (v == "fermion") c.ctop_density = DensityKind::Fermion;
         else fail("measurement.density", "expected particle or fermion, got '" + v + "'");
       },
       [](const ExperimentConfig& c) {
         return std::string(c.ctop_density == DensityKind::Particle ? "particle" : "fermion");
       }},
      DECOH_DOUBLE("evolution.dt", evolution.dt),
      DECOH_DOUBLE("evolution.t_max", evolution.t_max),
      {"evolution.krylov_dim",
       [](ExperimentConfig& c, const std::string& v) { c.evolution.krylov_dim = to_small_int("evolution.krylov_dim", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.evolution.krylov_dim); }},
      DECOH_DOUBLE("evolution.tol", evolution.tol),
      {"evolution.record_every",
       [](ExperimentConfig& c, const std::string& v) {
         c.evolution.record_every = to_small_int("evolution.record_every", v);
       },
       [](const ExperimentConfig& c) { return std::to_string(c.evolution.record_every); }},
      {"experiment.seed",
       [](ExperimentConfig& c, const std::string& v) { c.seed = to_u64("experiment.seed", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      {"experiment.n_random",
       [](ExperimentConfig& c, const std::string& v) { c.n_random = to_small_int("experiment.n_random", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.n_random); }},
      {"experiment.sweep",
       [](ExperimentConfig& c, const std::string& v) {
         c.sweep.clear();
         if (trim(v).empty()) return;
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) c.sweep.push_back(to_small_int("experiment.sweep", trim(item)));
       },
       [](const ExperimentConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.sweep.size(); ++i) s += (i ? "," : "") + std::to_string(c.sweep[i]);
         return s;
       }},
      {"experiment.probe_time",
       [](ExperimentConfig& c, const std::string& v) {
         c.probe_time = to_optional_double("experiment.probe_time", v);
       },
       [](const ExperimentConfig& c) { return opt_str(c.probe_time); }},
  };
  return f;
}

#undef DECOH_DOUBLE

const Field& lookup(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return f;
  // bare leaf name, accepted when unambiguous
  const Field* hit = nullptr;
  int count = 0;
  for (const auto& f : fields()) {
    const auto dot = f.key.rfind('.');
    if (f.key.substr(dot + 1) == key) {
      hit = &f;
      ++count;
    }
  }
  if (count == 1) return *hit;
  if (count > 1) fail(key, "ambiguous key, qualify it with its section");
  fail(key, "unknown key");
}

using Flat = std::vector<std::pair<std::string, std::string>>;

Flat flatten_text(std::string_view text) {
  Flat out;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string l = trim(line);
    if (l.empty()) continue;
    if (l.front() == '[') {
      if (l.back() != ']') fail("line " + std::to_string(lineno), "unterminated section header");
      section = trim(std::string_view(l).substr(1, l.size() - 2));
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string::npos) fail("line " + std::to_string(lineno), "expected key = value");
    std::string key = trim(std::string_view(l).substr(0, eq));
    const std::string value = trim(std::string_view(l).substr(eq + 1));
    if (key.empty()) fail("line " + std::to_string(lineno), "empty key");
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    out.emplace_back(key, value);
  }
  return out;
}

void flatten_json(const nlohmann::json& j, const std::string& prefix, Flat& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const auto& v = *it;
    if (v.is_object()) {
      flatten_json(v, key, out);
    } else if (v.is_array()) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_integer()) fail(key, "array entries must be integers");
        s += (i ? "," : "") + v[i].dump();
      }
      out.emplace_back(key, s);
    } else if (v.is_string()) {
      out.emplace_back(key, v.get<std::string>());
    } else if (v.is_number_float()) {
      out.emplace_back(key, format_double(v.get<double>()));
    } else if (v.is_number()) {
      out.emplace_back(key, v.dump());
    } else if (v.is_null()) {
      out.emplace_back(key, "auto");
    } else {
      fail(key, "unsupported value type");
    }
  }
}

}  // namespace

ExperimentConfig parse_config_text(std::string_view text) {
  Flat flat;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("json: ") + e.what());
    }
    flatten_json(j, "", flat);
  } else {
    flat = flatten_text(text);
  }
  ExperimentConfig c;
  std::set<std::string> seen;
  for (const auto& [key, value] : flat) {
    const Field& f = lookup(key);
    if (!seen.insert(f.key).second) fail(f.key, "given more than once");
    f.set(c, value);
  }
  c.validate();
  return c;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& f : fields()) kv.emplace_back(f.key, f.get(config));
  std::sort(kv.begin(), kv.end());
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::uint64_t h = fnv1a(serialize_config(config));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

}  // namespace decoh
