#include <gtest/gtest.h>

#include <sstream>

#include "gaugelab/config.hpp"

using namespace gaugelab;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ConfigError parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return ConfigError(0, "", "");
}

}  // namespace

TEST(Config, ParsesAllKeys) {
  const ExperimentConfig c = parse(
      "schema_version = 1\n"
      "# comment line\n"
      "model = rarita_schwinger   # trailing comment\n"
      "dimension = 4\n"
      "mode_cutoff = 2\n"
      "spin_structure = APP\n"
      "trials = 7\n"
      "seed = 42\n"
      "tolerance_scale = 10\n"
      "lengths = 6.283185307179586, 3, 2.5\n"
      "time_min = -4\n"
      "time_max = 4\n"
      "time_steps = 33\n"
      "null_tolerance = 1e-9\n"
      "out_dir = results\n");
  EXPECT_EQ(c.model, "rarita_schwinger");
  EXPECT_EQ(c.dimension.value(), 4);
  EXPECT_EQ(c.mode_cutoff.value(), 2);
  EXPECT_EQ(c.spin_structure.value(), "APP");
  EXPECT_EQ(c.trials, 7);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.tolerance_scale, 10.0);
  ASSERT_EQ(c.lengths.size(), 3u);
  EXPECT_EQ(c.lengths[2], 2.5);
  EXPECT_EQ(c.time.t_min, -4.0);
  EXPECT_EQ(c.time.n_steps, 33);
  EXPECT_EQ(c.basis().null_tolerance, 1e-9);
  EXPECT_EQ(c.out_dir, "results");
  EXPECT_EQ(c.entries.size(), 14u);
  EXPECT_EQ(c.entries[1].first, "model");
}

TEST(Config, DefaultsWhenOnlyVersioned) {
  const ExperimentConfig c = parse("schema_version = 1\n");
  EXPECT_EQ(c.model, "klein_gordon");
  EXPECT_FALSE(c.mode_cutoff.has_value());
  EXPECT_EQ(c.trials, 50);
  const GaugeTheory th = build_theory(c);
  EXPECT_EQ(th.spacetime.dim(), 2);
  EXPECT_EQ(th.name, "klein_gordon");
}

TEST(Config, ErrorsNameLineAndField) {
  const ConfigError bad = parse_error("schema_version = 1\nmodel = yang_mills\nmode_cutoff = two\n");
  EXPECT_EQ(bad.line, 3);
  EXPECT_EQ(bad.field, "mode_cutoff");
  EXPECT_NE(std::string(bad.what()).find("line 3: field 'mode_cutoff'"), std::string::npos);

  EXPECT_EQ(parse_error("schema_version = 1\ncolour = red\n").field, "colour");
  EXPECT_EQ(parse_error("schema_version = 1\ntrials = 3\ntrials = 4\n").line, 3);
  EXPECT_EQ(parse_error("schema_version = 1\nmodel = maxwell\n").field, "model");
  EXPECT_EQ(parse_error("schema_version = 1\nseed = 12abc\n").field, "seed");
  EXPECT_EQ(parse_error("schema_version = 1\ntrials = 0\n").field, "trials");
  EXPECT_EQ(parse_error("schema_version = 1\ntolerance_scale = -1\n").field, "tolerance_scale");
  EXPECT_EQ(parse_error("schema_version = 1\nspin_structure = PX\n").field, "spin_structure");
  EXPECT_EQ(parse_error("schema_version = 1\nfrw = tanh:1,2\n").field, "frw");
  EXPECT_EQ(parse_error("schema_version = 1\nmass =\n").field, "mass");
  EXPECT_EQ(parse_error("schema_version = 1\njust words\n").line, 2);
  EXPECT_EQ(parse_error("schema_version = 2\n").field, "schema_version");
  EXPECT_EQ(parse_error("model = majorana\n").field, "schema_version");
  EXPECT_EQ(parse_error("schema_version = 1\ntime_min = 3\ntime_max = 1\n").field, "time_max");
}

TEST(Config, BuildsRequestedGeometry) {
  const ExperimentConfig c = parse("schema_version = 1\nmodel = majorana\ndimension = 3\nspin_structure = AP\nmass = 0.3\n");
  const GaugeTheory th = build_theory(c);
  EXPECT_EQ(th.spacetime.dim(), 3);
  ASSERT_EQ(th.spin.periodic.size(), 2u);
  EXPECT_FALSE(th.spin.periodic[0]);
  EXPECT_TRUE(th.spin.periodic[1]);

  const ExperimentConfig wrong = parse("schema_version = 1\nmodel = majorana\ndimension = 3\nspin_structure = APP\n");
  EXPECT_THROW(build_theory(wrong), ConfigError);
  const ExperimentConfig frw = parse("schema_version = 1\nmodel = yang_mills\nfrw = constant:1.5\n");
  EXPECT_THROW(build_spacetime(frw), ConfigError);
  const ExperimentConfig collapsing = parse("schema_version = 1\nfrw = tanh:1,2,1\n");
  EXPECT_THROW(build_spacetime(collapsing), ConfigError);
  const ExperimentConfig expanding = parse("schema_version = 1\nfrw = tanh:2,1,1\nmode_cutoff = 1\n");
  EXPECT_TRUE(build_theory(expanding).time_dependent());
}
