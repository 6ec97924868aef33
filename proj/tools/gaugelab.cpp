#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>

#include "gaugelab/clifford.hpp"
#include "gaugelab/config.hpp"
#include "gaugelab/greens_checks.hpp"
#include "gaugelab/phase_space.hpp"
#include "gaugelab/quantum_algebra.hpp"
#include "gaugelab/solutions.hpp"
#include "gaugelab/suites.hpp"

using namespace gaugelab;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

enum ExitCode { exit_pass = 0, exit_check_failed = 1, exit_config = 2, exit_internal = 3 };

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> tolerance_scale;
  std::optional<int> modes;
  bool json_only = false;
  bool csv_only = false;
  std::string model;
};

struct Run {
  ExperimentConfig cfg;
  fs::path out_dir;
  bool write_json = true;
  bool write_csv = true;
  bool passed = true;
  bool model_chosen = false;
  json body = json::object();
};

double tol_scale(const Run& r) { return r.cfg.tolerance_scale; }

json report_json(Run& run, const Report& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks) {
    const double tol = c.tolerance * tol_scale(run);
    const bool ok = c.residual <= tol;
    run.passed = run.passed && ok;
    checks.push_back({{"name", c.name}, {"residual", c.residual}, {"tolerance", tol}, {"passed", ok}});
  }
  json values = json::object();
  for (const auto& [k, v] : rep.values) values[k] = v;
  return {{"title", rep.title}, {"checks", checks}, {"values", values}};
}

void print_report(const Run& run, const Report& rep) {
  std::cout << rep.title << "\n";
  for (const auto& c : rep.checks) {
    const double tol = c.tolerance * tol_scale(run);
    std::cout << "  " << (c.residual <= tol ? "PASS " : "FAIL ") << std::left << std::setw(44) << c.name
              << std::scientific << std::setprecision(3) << c.residual << " <= " << tol << "\n";
  }
  std::cout << std::defaultfloat;
}

json add_report(Run& run, const Report& rep) {
  print_report(run, rep);
  return report_json(run, rep);
}

json signature_json(const PhaseSpace& ps) {
  return {{"size", ps.size()},
          {"positive", ps.signature.positive},
          {"negative", ps.signature.negative},
          {"null", ps.signature.null},
          {"positive_definite", ps.positive_definite()},
          {"cutoff", ps.cutoff},
          {"null_tolerance", ps.null_tolerance}};
}

std::vector<double> eigenvalue_list(const PhaseSpace& ps) {
  return {ps.eigenvalues.data(), ps.eigenvalues.data() + ps.eigenvalues.size()};
}

void write_csv_tables(const Run& run, const std::string& stem, const PhaseSpace& ps) {
  if (!run.write_csv) return;
  std::ofstream gram(run.out_dir / (stem + "_gram.csv"));
  gram << std::setprecision(17);
  for (int i = 0; i < ps.size(); ++i) {
    for (int j = 0; j < ps.size(); ++j) gram << (j ? "," : "") << ps.gram(i, j);
    gram << "\n";
  }
  std::ofstream ev(run.out_dir / (stem + "_eigenvalues.csv"));
  ev << std::setprecision(17) << "index,eigenvalue\n";
  for (int i = 0; i < ps.eigenvalues.size(); ++i) ev << i << "," << ps.eigenvalues(i) << "\n";
}

// Model construction failures are configuration problems.
GaugeTheory make_model(const ExperimentConfig& cfg, std::optional<SpinStructure> spin = std::nullopt) {
  try {
    return build_theory(cfg, build_spacetime(cfg), spin);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(0, "model", e.what());
  }
}

ExperimentConfig with_model(ExperimentConfig cfg, const std::string& model) {
  cfg.model = model;
  return cfg;
}

json model_json(const GaugeTheory& th) {
  return {{"name", th.name},
          {"dimension", th.spacetime.dim()},
          {"mode_cutoff", th.spacetime.mode_cutoff},
          {"modes", th.mode_count()},
          {"spin_structure", th.spin.label()},
          {"statistics", th.statistics == Statistics::fermionic ? "fermionic" : "bosonic"},
          {"gauge", th.gauge}};
}

// --------------------------------------------------------------------------------------------

void cmd_gamma_audit(Run& run) {
  std::vector<int> dims{2, 3, 4, 10, 11, 12};
  if (run.cfg.dimension) dims = {*run.cfg.dimension};
  json out = json::array();
  for (int D : dims) {
    try {
      out.push_back(add_report(run, gamma_audit(build_gamma(D))));
    } catch (const DimensionNotSupported& e) {
      throw ConfigError(0, "dimension", e.what());
    }
  }
  run.body["audits"] = out;
}

SuiteOptions suite_options(const ExperimentConfig& cfg) { return {cfg.trials, cfg.T_scale, cfg.seed}; }

json verify_model(Run& run, const ExperimentConfig& cfg) {
  const GaugeTheory th = make_model(cfg);
  const PhaseSpace ps = build_phase_space(th, cfg.basis());
  Report rep;
  try {
    rep = identity_suite(th, ps, suite_options(cfg));
  } catch (const CatalogueRejection& e) {
    throw ConfigError(0, "T_scale", e.what());
  }
  return {{"model", model_json(th)}, {"suite", add_report(run, rep)}};
}

void cmd_verify(Run& run) { run.body["verify"] = verify_model(run, run.cfg); }

void cmd_greens_check(Run& run) {
  const GaugeTheory th = make_model(run.cfg);
  json out = {{"model", model_json(th)}};
  out["definition"] = add_report(run, greens_check(th, run.cfg.trials, run.cfg.seed));
  if (th.gauge) out["intertwining"] = add_report(run, intertwining_check(th, run.cfg.trials, run.cfg.seed + 1));
  out["skew_adjoint"] = add_report(run, skew_adjoint_check(th, run.cfg.trials, true, run.cfg.seed + 2));
  run.body["greens_check"] = out;
}

json gram_model(Run& run, const ExperimentConfig& cfg) {
  const GaugeTheory th = make_model(cfg);
  const PhaseSpace ps = build_phase_space(th, cfg.basis());
  Report rep;
  rep.title = "gram " + th.name;
  rep.add("statistics_residual", ps.statistics_residual, 1e-8);
  rep.add("imaginary_residual", ps.imaginary_residual, 1e-8);
  rep.add("assembly_gap", ps.assembly_gap, 1e-8);
  std::cout << "signature n+=" << ps.signature.positive << " n-=" << ps.signature.negative
            << " n0=" << ps.signature.null << " size=" << ps.size() << " cutoff=" << ps.cutoff << "\n";
  write_csv_tables(run, "gram_" + th.name, ps);
  return {{"model", model_json(th)},
          {"checks", add_report(run, rep)},
          {"signature", signature_json(ps)},
          {"eigenvalues", eigenvalue_list(ps)}};
}

void cmd_gram(Run& run) { run.body["gram"] = gram_model(run, run.cfg); }

void cmd_spin_scan(Run& run) {
  ExperimentConfig cfg = run.cfg;
  if (!run.model_chosen) cfg.model = "rarita_schwinger";
  if (cfg.model != "majorana" && cfg.model != "rarita_schwinger")
    throw ConfigError(0, "model", "spin-scan needs majorana or rarita_schwinger");
  const Spacetime st = build_spacetime(cfg);
  const bool rs = cfg.model == "rarita_schwinger";
  json rows = json::array();
  std::ofstream csv;
  if (run.write_csv) {
    csv.open(run.out_dir / ("spin_scan_" + cfg.model + ".csv"));
    csv << "spin_structure,size,positive,negative,null,min_eigenvalue\n" << std::setprecision(17);
  }
  for (const SpinStructure& ss : all_spin_structures(st.dim())) {
    const GaugeTheory th = make_model(cfg, ss);
    const PhaseSpace ps = build_phase_space(th, cfg.basis());
    const double lowest = ps.size() ? ps.eigenvalues(0) : 0.0;
    const bool expected = ss.trivial() && rs ? ps.signature.negative >= 1 : ps.positive_definite();
    run.passed = run.passed && expected && ps.statistics_residual <= 1e-8 * tol_scale(run);
    const char* verdict = ps.positive_definite() ? "positive-definite" : ps.signature.negative > 0 ? "indefinite" : "degenerate";
    std::cout << ss.label() << " size=" << ps.size() << " n+=" << ps.signature.positive << " n-=" << ps.signature.negative
              << " n0=" << ps.signature.null << " " << verdict << (expected ? "" : " UNEXPECTED") << "\n";
    if (run.write_csv)
      csv << ss.label() << "," << ps.size() << "," << ps.signature.positive << "," << ps.signature.negative << ","
          << ps.signature.null << "," << lowest << "\n";
    rows.push_back({{"spin_structure", ss.label()},
                    {"trivial", ss.trivial()},
                    {"signature", signature_json(ps)},
                    {"statistics_residual", ps.statistics_residual},
                    {"min_eigenvalue", lowest},
                    {"expected", expected}});
  }
  run.body["spin_scan"] = {{"model", cfg.model}, {"dimension", st.dim()}, {"structures", rows}};
}

void cmd_rs_counterexample(Run& run) {
  ExperimentConfig cfg = with_model(run.cfg, "rarita_schwinger");
  if (cfg.dimension.value_or(4) != 4) throw ConfigError(0, "dimension", "the counterexample lives on R x T^3");
  const GaugeTheory th = make_model(cfg, SpinStructure::trivial_for(4));
  const auto basis = majorana_basis(*th.gamma);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss;
  Vec u = Vec::Zero(th.gamma->spinor_dim());
  for (const auto& b : basis) u += gauss(rng) * b;
  const double vol = th.volume();

  const double timelike = rs_constant_mode_pairing(th, u, RsComponent::timelike);
  const double timelike_expected = -vol * 1.5 * u.squaredNorm();
  const Section spatial = rs_constant_solution(th, u, RsComponent::spatial_transverse);
  const Vec s = spatial.modes.at(th.lattice.zero)->value(0.0);
  const double spatial_expected = vol * s.tail(s.size() - u.size()).squaredNorm();
  const double spatial_value = sol_pairing_surface(th, spatial, spatial, 0.0);

  Report rep;
  rep.title = "rarita-schwinger constant modes " + th.spin.label();
  rep.add("timelike_relative_error", std::abs(timelike - timelike_expected) / std::abs(timelike_expected), 1e-6);
  rep.add("spatial_relative_error", std::abs(spatial_value - spatial_expected) / std::abs(spatial_expected), 1e-6);
  rep.note("timelike_pairing", timelike);
  rep.note("timelike_expected", timelike_expected);
  rep.note("spatial_pairing", spatial_value);
  rep.note("spatial_expected", spatial_expected);
  json out = {{"model", model_json(th)}, {"constant_modes", add_report(run, rep)}};

  const PhaseSpace ps = build_phase_space(th, cfg.basis());
  const auto witness = negative_norm_witness(th, ps);
  out["signature"] = signature_json(ps);
  if (witness) {
    out["witness"] = {{"value", witness->value}, {"null", witness->null}};
    std::cout << "witness tau([w],[w]) = " << witness->value << "\n";
  }
  run.passed = run.passed && witness && !witness->null && witness->value < 0.0;
  out["projected_matter"] = add_report(run, projected_rs_indefiniteness(th.spacetime, th.spin));
  run.body["rs_counterexample"] = out;
}

void cmd_quantize(Run& run) {
  const GaugeTheory th = make_model(run.cfg);
  const PhaseSpace ps = build_phase_space(th, run.cfg.basis());
  json out = {{"model", model_json(th)}, {"signature", signature_json(ps)}};
  if (ps.size() == 0) throw ConfigError(0, "model", "empty phase space within the cutoff");
  if (th.statistics == Statistics::bosonic) {
    out["weyl"] = add_report(run, weyl_relation_report(ps.gram, run.cfg.trials, run.cfg.seed));
  } else {
    try {
      const CarRep car = car_representation(th, ps);
      Report rep;
      rep.title = "car " + th.name;
      rep.add("anticommutator_residual", car.anticommutator_residual, 1e-10);
      rep.add("hermiticity_residual", car.hermiticity_residual, 1e-10);
      rep.add("string_algebra_residual", car.string_algebra_residual, 0.0);
      rep.note("generators", car.size());
      rep.note("qubits", car.qubits);
      out["outcome"] = "represented";
      out["car"] = add_report(run, rep);
      out["dense"] = car.dense();
    } catch (const NotPositiveDefinite& e) {
      // An obstruction is a legitimate outcome; the witness is checked against the Gram.
      const RVec w = e.witness;
      const double rayleigh = w.dot(ps.gram * w) / w.squaredNorm();
      Report rep;
      rep.title = "car obstruction " + th.name;
      rep.add("witness_rayleigh_gap", std::abs(rayleigh - e.value) / std::max(std::abs(e.value), 1e-300), 1e-8);
      rep.note("witness_value", e.value);
      out["outcome"] = "obstructed";
      out["reason"] = e.what();
      out["witness"] = {{"value", e.value}, {"coefficients", std::vector<double>(w.data(), w.data() + w.size())}};
      out["obstruction"] = add_report(run, rep);
      std::cout << "obstructed: " << e.what() << " (value " << e.value << ")\n";
    }
  }
  run.body["quantize"] = out;
}

void cmd_report_all(Run& run) {
  json out = json::object();
  for (const std::string& m : model_catalogue()) {
    ExperimentConfig cfg = with_model(run.cfg, m);
    cfg.dimension.reset();
    cfg.spin_structure.reset();
    cfg.frw = "none";
    cfg.lengths.clear();
    try {
      out[m] = {{"verify", verify_model(run, cfg)}, {"gram", gram_model(run, cfg)}};
    } catch (const std::exception& e) {
      run.passed = false;
      out[m] = {{"error", e.what()}};
      std::cout << m << ": FAILED " << e.what() << "\n";
    }
  }
  run.body["report_all"] = out;
}

json config_echo(const ExperimentConfig& cfg) {
  json entries = json::object();
  for (const auto& [k, v] : cfg.entries) entries[k] = v;
  return {{"file", entries},
          {"model", cfg.model},
          {"seed", cfg.seed},
          {"trials", cfg.trials},
          {"tolerance_scale", cfg.tolerance_scale},
          {"mode_cutoff", cfg.mode_cutoff ? json(*cfg.mode_cutoff) : json(nullptr)},
          {"time_window", {cfg.time.t_min, cfg.time.t_max, cfg.time.n_steps}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gaugelab: linear gauge field theories on flat tori"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "RNG seed (overrides the config)");
  app.add_option("--out-dir", flags.out_dir, "directory for JSON and CSV artifacts");
  app.add_option("--tolerance-scale", flags.tolerance_scale, "multiplier on every check tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--modes", flags.modes, "mode cutoff N (overrides the config)")->check(CLI::PositiveNumber);
  auto* json_flag = app.add_flag("--json", flags.json_only, "write only the JSON report");
  app.add_flag("--csv", flags.csv_only, "write only the CSV tables")->excludes(json_flag);

  using Handler = void (*)(Run&);
  const std::vector<std::tuple<std::string, std::string, bool, Handler>> commands{
      {"gamma-audit", "Clifford and charge-conjugation identity table", false, cmd_gamma_audit},
      {"verify", "operator identity suite for a model", true, cmd_verify},
      {"greens-check", "Green's operator checks for a model", true, cmd_greens_check},
      {"gram", "Gram matrix, signature and eigenvalues of a model", true, cmd_gram},
      {"spin-scan", "signatures over every spin structure", true, cmd_spin_scan},
      {"rs-counterexample", "Rarita-Schwinger constant modes on the trivial structure", false, cmd_rs_counterexample},
      {"quantize", "Weyl relations or CAR construction for a model", true, cmd_quantize},
      {"report-all", "verify and gram for every model", false, cmd_report_all}};
  std::vector<std::tuple<CLI::App*, bool, Handler>> subs;
  for (const auto& [name, help, takes_model, handler] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    if (takes_model) sub->add_option("model", flags.model, "model name (overrides the config)");
    subs.emplace_back(sub, takes_model, handler);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_pass : exit_config;
  }

  const auto start = std::chrono::steady_clock::now();
  Run run;
  std::string command, stem;
  try {
    if (!flags.config.empty()) run.cfg = load_config(flags.config);
    if (flags.seed) run.cfg.seed = *flags.seed;
    if (flags.tolerance_scale) run.cfg.tolerance_scale = *flags.tolerance_scale;
    if (flags.modes) run.cfg.mode_cutoff = *flags.modes;
    if (!flags.model.empty()) {
      const auto& cat = model_catalogue();
      if (std::find(cat.begin(), cat.end(), flags.model) == cat.end())
        throw ConfigError(0, "model", "unknown model '" + flags.model + "'");
      run.cfg.model = flags.model;
    }
    for (const auto& kv : run.cfg.entries) run.model_chosen = run.model_chosen || kv.first == "model";
    run.model_chosen = run.model_chosen || !flags.model.empty();
    run.out_dir = flags.out_dir.value_or(run.cfg.out_dir);
    run.write_json = !flags.csv_only;
    run.write_csv = !flags.json_only;
    fs::create_directories(run.out_dir);

    for (const auto& [sub, takes_model, handler] : subs)
      if (sub->parsed()) {
        command = stem = sub->get_name();
        handler(run);
        if (takes_model) stem += "_" + (command == "spin-scan" && !run.model_chosen ? "rarita_schwinger" : run.cfg.model);
      }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return exit_internal;
  }

  json report = {{"schema_version", 1},
                 {"command", command},
                 {"config", config_echo(run.cfg)},
                 {"passed", run.passed},
                 {"results", run.body}};
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report["timing"] = {{"wall_seconds", seconds}};
  if (run.write_json) {
    const fs::path path = run.out_dir / (stem + ".json");
    std::ofstream(path) << report.dump(2) << "\n";
    std::cout << "report: " << path.string() << "\n";
  }
  std::cout << (run.passed ? "PASS" : "FAIL") << " " << command << "\n";
  return run.passed ? exit_pass : exit_check_failed;
}
