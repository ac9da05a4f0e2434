#include <gtest/gtest.h>

#include "sglab/errors.hpp"
#include "sglab/run_config.hpp"

using namespace sglab;

TEST(RunConfig, ParsesMinimalDocument) {
  auto c = parse_run_config(R"({"n":64, "model":"Euler", "eps":0, "t_final":0.1})");
  EXPECT_EQ(c.n, 64);
  EXPECT_EQ(c.model, Model::Euler);
  EXPECT_EQ(c.t_final, 0.1);
  EXPECT_EQ(c.cfl, 0.5);
  EXPECT_EQ(c.initial_data.preset, "default");
}

TEST(RunConfig, RejectsBadDocuments) {
  EXPECT_THROW(parse_run_config(R"({"n":48})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"n":16})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"n":64, "colour":1})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"n":"64"})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"eps":-1})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"t_final":0})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"model":"QG"})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"initial_data":"bumpy"})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"initial_data":[{"p":0,"q":0,"a":1}]})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"initial_data":[{"p":1,"q":0,"c":1}]})"), ConfigError);
  EXPECT_THROW(parse_run_config("{"), ConfigError);
}

TEST(RunConfig, ErrorNamesTheKey) {
  try {
    parse_run_config(R"({"n":64, "colour":1})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
  }
  try {
    parse_run_config(R"({"cfl":"fast"})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("cfl"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("number"), std::string::npos);
  }
}

TEST(RunConfig, SerializationIsCanonical) {
  const std::string text =
      R"({"seed":3,"n":64,"initial_data":[{"p":1,"q":2,"a":0.5}],"model":"SGeps","eps":0.02})";
  auto c = parse_run_config(text);
  const std::string s = serialize(c);
  EXPECT_EQ(serialize(parse_run_config(s)), s);
  EXPECT_EQ(parse_run_config(s), c);
  EXPECT_EQ(s.find("\"n\":64"), 1u);
}

TEST(ExperimentSpec, ParsesAndValidates) {
  auto v = parse_config(R"({"kind":"stability", "eps_list":[0.04,0.02,0.01]})");
  ASSERT_TRUE(std::holds_alternative<ExperimentSpec>(v));
  auto s = std::get<ExperimentSpec>(v);
  EXPECT_EQ(s.kind, ExperimentKind::Stability);
  EXPECT_EQ(s.slope_window, std::make_pair(0, 2));
  EXPECT_EQ(serialize(parse_experiment_spec(serialize(s))), serialize(s));

  EXPECT_THROW(parse_experiment_spec(R"({"kind":"stability", "eps_list":[0.01,0.02,0.04]})"),
               ConfigError);
  EXPECT_THROW(parse_experiment_spec(R"({"kind":"stability", "eps_list":[0.04,0.02]})"),
               ConfigError);
  EXPECT_THROW(parse_experiment_spec(R"({"kind":"vortex", "eps_list":[0.04,0.02,0.01]})"),
               ConfigError);
  EXPECT_NO_THROW(parse_experiment_spec(R"({"kind":"inequalities", "count":3})"));
  EXPECT_TRUE(std::holds_alternative<RunConfig>(parse_config(R"({"n":32})")));
}

TEST(InitialData, PresetsAreMeanZero) {
  TorusGrid g(32);
  for (const char* p : {"default", "steep", "shear"}) {
    InitialData d;
    d.preset = p;
    EXPECT_NEAR(make_initial_density(d, g).mean(), 0.0, 1e-14) << p;
  }
  InitialData d;
  d.preset = "default";
  auto f = make_initial_density(d, g);
  const double x = g.coord(3), y = g.coord(5);
  EXPECT_NEAR(f(3, 5), std::cos(kTwoPi * x) * std::cos(kTwoPi * y) + 0.5 * std::cos(2 * kTwoPi * y),
              1e-14);
}
