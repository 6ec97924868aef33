#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "phase_space.hpp"
#include "spacetime.hpp"
#include "theories.hpp"

namespace gaugelab {

// Malformed configuration; line is 0 when the problem is not tied to one line.
struct ConfigError : Error {
  ConfigError(int line, std::string field, const std::string& what)
      : Error(format(line, field, what)), line(line), field(std::move(field)) {}
  int line;
  std::string field;

 private:
  static std::string format(int line, const std::string& field, const std::string& what) {
    std::string s = line > 0 ? "line " + std::to_string(line) + ": " : std::string();
    if (!field.empty()) s += "field '" + field + "': ";
    return s + what;
  }
};

inline const std::vector<std::string>& model_catalogue() {
  static const std::vector<std::string> names{"klein_gordon",  "majorana",      "yang_mills",
                                              "linearised_gr", "toy_fermionic", "rarita_schwinger"};
  return names;
}

struct ExperimentConfig {
  int schema_version = 1;
  std::string model = "klein_gordon";
  std::optional<int> dimension;
  std::optional<int> mode_cutoff;
  std::optional<std::string> spin_structure;
  std::optional<double> mass;
  int m_pairs = 1;
  std::vector<double> lengths;
  std::string frw = "none";
  TimeGrid time;
  int trials = 50;
  std::uint64_t seed = 1;
  double tolerance_scale = 1.0;
  int basis_degree = 5;
  double basis_halfwidth = 1.0;
  double null_tolerance = 1e-8;
  double T_scale = 2.0;
  std::string out_dir = "gaugelab_out";
  // Keys in file order, as read.
  std::vector<std::pair<std::string, std::string>> entries;

  BasisOptions basis() const {
    BasisOptions o;
    o.degree = basis_degree;
    o.halfwidth = basis_halfwidth;
    o.null_tolerance = null_tolerance;
    return o;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T>
T parse_number(const std::string& text, int line, const std::string& key) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError(line, key, "expected a number, got '" + text + "'");
  return value;
}

inline std::vector<double> parse_list(const std::string& text, int line, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(trim(item), line, key));
  if (out.empty()) throw ConfigError(line, key, "expected a comma-separated list");
  return out;
}

inline void require_positive(double v, int line, const std::string& key) {
  if (!(v > 0.0)) throw ConfigError(line, key, "must be positive");
}

}  // namespace detail

// key = value lines; '#' starts a comment. Unknown and repeated keys are rejected.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::string raw;
  int line = 0;
  bool versioned = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = detail::trim(raw.substr(0, raw.find('#')));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "", "expected 'key = value'");
    const std::string key = detail::trim(text.substr(0, eq)), val = detail::trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "", "missing key");
    if (val.empty()) throw ConfigError(line, key, "missing value");
    if (!seen.insert(key).second) throw ConfigError(line, key, "duplicate key");
    c.entries.emplace_back(key, val);
    auto integer = [&] { return detail::parse_number<int>(val, line, key); };
    auto real = [&] { return detail::parse_number<double>(val, line, key); };
    auto positive_int = [&] {
      const int v = integer();
      if (v < 1) throw ConfigError(line, key, "must be at least 1");
      return v;
    };
    if (key == "schema_version") {
      c.schema_version = integer();
      if (c.schema_version != 1) throw ConfigError(line, key, "unsupported schema version " + val);
      versioned = true;
    } else if (key == "model") {
      const auto& cat = model_catalogue();
      if (std::find(cat.begin(), cat.end(), val) == cat.end()) throw ConfigError(line, key, "unknown model '" + val + "'");
      c.model = val;
    } else if (key == "dimension") {
      c.dimension = positive_int();
    } else if (key == "mode_cutoff") {
      c.mode_cutoff = positive_int();
    } else if (key == "spin_structure") {
      if (val.find_first_not_of("PA") != std::string::npos) throw ConfigError(line, key, "use letters P and A");
      c.spin_structure = val;
    } else if (key == "mass") {
      c.mass = real();
      if (*c.mass < 0.0) throw ConfigError(line, key, "must be non-negative");
    } else if (key == "m_pairs") {
      c.m_pairs = positive_int();
    } else if (key == "lengths") {
      c.lengths = detail::parse_list(val, line, key);
      for (double l : c.lengths) detail::require_positive(l, line, key);
    } else if (key == "frw") {
      const auto colon = val.find(':');
      const std::string kind = val.substr(0, colon);
      if (kind == "none") {
        if (colon != std::string::npos) throw ConfigError(line, key, "'none' takes no parameters");
      } else if (kind == "constant" || kind == "tanh") {
        if (colon == std::string::npos) throw ConfigError(line, key, "missing parameters after ':'");
        const auto p = detail::parse_list(val.substr(colon + 1), line, key);
        if (p.size() != (kind == "constant" ? 1u : 3u)) throw ConfigError(line, key, "wrong parameter count for " + kind);
      } else {
        throw ConfigError(line, key, "expected none, constant:a or tanh:a0,a1,duration");
      }
      c.frw = val;
    } else if (key == "time_min") {
      c.time.t_min = real();
    } else if (key == "time_max") {
      c.time.t_max = real();
    } else if (key == "time_steps") {
      c.time.n_steps = positive_int();
    } else if (key == "trials") {
      c.trials = positive_int();
    } else if (key == "seed") {
      c.seed = detail::parse_number<std::uint64_t>(val, line, key);
    } else if (key == "tolerance_scale") {
      c.tolerance_scale = real();
      detail::require_positive(c.tolerance_scale, line, key);
    } else if (key == "basis_degree") {
      c.basis_degree = positive_int();
    } else if (key == "basis_halfwidth") {
      c.basis_halfwidth = real();
      detail::require_positive(c.basis_halfwidth, line, key);
    } else if (key == "null_tolerance") {
      c.null_tolerance = real();
      detail::require_positive(c.null_tolerance, line, key);
    } else if (key == "T_scale") {
      c.T_scale = real();
    } else if (key == "out_dir") {
      c.out_dir = val;
    } else {
      throw ConfigError(line, key, "unknown key");
    }
  }
  if (!versioned) throw ConfigError(0, "schema_version", "required key is missing");
  if (!(c.time.t_min < c.time.t_max)) throw ConfigError(0, "time_max", "must exceed time_min");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open config file " + path);
  return parse_config(in);
}

// Spacetime dimension and cutoff used when the config leaves them open.
inline std::pair<int, int> default_geometry(const std::string& model) {
  if (model == "klein_gordon") return {2, 2};
  if (model == "linearised_gr" || model == "rarita_schwinger") return {4, 1};
  return {3, 1};
}

inline SpinStructure parse_spin_structure(const std::string& letters, int D) {
  if (static_cast<int>(letters.size()) != D - 1)
    throw ConfigError(0, "spin_structure", "needs one letter per circle (" + std::to_string(D - 1) + ")");
  SpinStructure s;
  for (char ch : letters) s.periodic.push_back(ch == 'P');
  return s;
}

inline Spacetime build_spacetime(const ExperimentConfig& c) {
  const auto [dflt_dim, dflt_cut] = default_geometry(c.model);
  const int N = c.mode_cutoff.value_or(dflt_cut);
  if (c.frw != "none") {
    if (c.model != "klein_gordon") throw ConfigError(0, "frw", "FRW backgrounds are available for klein_gordon");
    if (c.dimension.value_or(2) != 2) throw ConfigError(0, "frw", "FRW backgrounds are two-dimensional");
    const auto colon = c.frw.find(':');
    const auto p = detail::parse_list(c.frw.substr(colon + 1), 0, "frw");
    try {
      return make_frw_circle(c.frw.substr(0, colon) == "constant" ? frw_constant(p[0]) : frw_tanh_ramp(p[0], p[1], p[2]),
                             N, c.time);
    } catch (const InvalidArgument& e) {
      throw ConfigError(0, "frw", e.what());
    }
  }
  const int D = c.dimension.value_or(dflt_dim);
  try {
    return make_flat_torus(D, c.lengths, N, c.time);
  } catch (const Error& e) {
    throw ConfigError(0, c.lengths.empty() ? "dimension" : "lengths", e.what());
  }
}

inline GaugeTheory build_theory(const ExperimentConfig& c, const Spacetime& st,
                                std::optional<SpinStructure> spin = std::nullopt) {
  const int D = st.dim();
  const SpinStructure ss =
      spin ? *spin : c.spin_structure ? parse_spin_structure(*c.spin_structure, D) : SpinStructure::trivial_for(D);
  if (c.model == "klein_gordon") return klein_gordon(st, c.mass.value_or(1.0));
  if (c.model == "majorana") return majorana_matter(st, ss, c.mass.value_or(0.0));
  if (c.model == "yang_mills") return yang_mills_linear(st);
  if (c.model == "linearised_gr") return linearised_gr(st);
  if (c.model == "toy_fermionic") return toy_fermionic(st, c.m_pairs);
  if (c.model == "rarita_schwinger") return rarita_schwinger(st, ss);
  throw ConfigError(0, "model", "unknown model '" + c.model + "'");
}

inline GaugeTheory build_theory(const ExperimentConfig& c) { return build_theory(c, build_spacetime(c)); }

}  // namespace gaugelab
