#include <gtest/gtest.h>

#include <set>
#include <string>

#include "wellposed/wellposed.hpp"

namespace ex = wellposed::experiments;
using wellposed::UsageError;
using json = wellposed::io::json;

namespace {

json parse(const char* text) { return json::parse(text); }

}  // namespace

TEST(Config, RejectsMalformedDocuments) {
  EXPECT_THROW(ex::config_from_json(parse("[1, 2]")), UsageError);
  EXPECT_THROW(ex::config_from_json(parse(R"({"seed": 1})")), UsageError);
  EXPECT_THROW(ex::config_from_json(parse(R"({"kind": "nope"})")), UsageError);
  EXPECT_THROW(ex::config_from_json(parse(R"({"kind": "radius", "colour": 1})")), UsageError);
  EXPECT_THROW(ex::config_from_json(parse(R"({"kind": "radius", "schema_version": 2})")), UsageError);
  EXPECT_THROW(ex::config_from_json(parse(R"({"kind": "radius", "seed": "x"})")), UsageError);
  EXPECT_THROW(ex::config_from_json(parse(R"({"kind": "radius", "trials": -1})")), UsageError);
  EXPECT_THROW(ex::config_from_json(parse(R"({"kind": "radius", "profile": "medium"})")), UsageError);
  EXPECT_THROW(ex::config_from_json(parse(R"({"kind": "radius", "grid": {"n_steps": 1}})")), UsageError);
  EXPECT_THROW(ex::config_from_json(parse(R"({"kind": "beam-bounds", "beam": {"N": 4}})")), UsageError);
}

TEST(Config, RejectsBadTolerances) {
  EXPECT_THROW(ex::config_from_json(parse(R"({"kind": "radius", "tolerances": {"rank": 0}})")), UsageError);
  EXPECT_THROW(ex::config_from_json(parse(R"({"kind": "radius", "tolerances": {"rank": -1e-3}})")), UsageError);
  EXPECT_THROW(ex::config_from_json(parse(R"({"kind": "radius", "tolerances": {"H": 1}})")), UsageError);
  EXPECT_THROW(ex::config_from_json(parse(R"({"kind": "radius", "tolerances": [1]})")), UsageError);
}

TEST(Config, DefaultsAndOverrides) {
  const auto c = ex::config_from_json(parse(R"({"kind": "radius", "profile": "quick"})"));
  EXPECT_EQ(c.trial_count(), 20);
  EXPECT_DOUBLE_EQ(c.tolerance("rank"), 1e-8);
  const auto d = ex::config_from_json(parse(R"({"kind": "radius", "trials": 7, "tolerances": {"rank": 1e-6}})"));
  EXPECT_EQ(d.trial_count(), 7);
  EXPECT_DOUBLE_EQ(d.tolerance("rank"), 1e-6);
  EXPECT_DOUBLE_EQ(d.tolerance("fraction"), 0.99);
}

TEST(Config, ToJsonRoundTrips) {
  const auto c = ex::config_from_json(
      parse(R"({"kind": "compose-cross", "seed": 11, "trials": 3, "dimensions": {"n_max": 5}, "grid": {"t_end": 0.5}})"));
  json j = c.to_json();
  j["schema_version"] = ex::kSchemaVersion;
  const auto back = ex::config_from_json(j);
  EXPECT_EQ(back.to_json().dump(), c.to_json().dump());
  EXPECT_EQ(back.seed, 11u);
  EXPECT_EQ(back.n_max, 5);
}

TEST(Profiles, ParseKnownNamesOnly) {
  EXPECT_EQ(ex::parse_profile("quick"), ex::Profile::quick);
  EXPECT_EQ(ex::parse_profile("full"), ex::Profile::full);
  EXPECT_THROW(ex::parse_profile("bogus"), UsageError);
  EXPECT_THROW(ex::parse_profile("Quick"), UsageError);
}

TEST(Kinds, TableIsComplete) {
  const auto& table = ex::kinds();
  EXPECT_EQ(table.size(), 11u);
  std::set<std::string> names;
  for (const auto& k : table) {
    names.insert(k.name);
    EXPECT_GE(k.full_trials, k.quick_trials) << k.name;
    EXPECT_FALSE(k.tolerances.empty()) << k.name;
    EXPECT_NO_THROW(ex::kind_info(k.name));
  }
  EXPECT_EQ(names.size(), table.size());
  EXPECT_THROW(ex::kind_info("beam"), UsageError);
}

TEST(Run, DeterministicForFixedConfig) {
  for (const char* kind : {"quadruple-identities", "compose-double", "radius", "k0-sweep"}) {
    ex::ExperimentConfig c;
    c.kind = kind;
    c.seed = 5;
    c.trials = 3;
    const auto a = ex::run(c), b = ex::run(c);
    EXPECT_EQ(a.to_json(false).dump(), b.to_json(false).dump()) << kind;
    EXPECT_TRUE(a.passed()) << kind;
  }
}

TEST(Run, SeedChangesDraws) {
  ex::ExperimentConfig c;
  c.kind = "radius";
  c.trials = 4;
  c.seed = 1;
  const auto a = ex::run(c);
  c.seed = 2;
  const auto b = ex::run(c);
  EXPECT_NE(a.payload.dump(), b.payload.dump());
}

TEST(Run, ReportCarriesAssertionsAndHeader) {
  ex::ExperimentConfig c;
  c.kind = "radius";
  c.trials = 4;
  const json j = ex::run(c).to_json();
  EXPECT_EQ(j.at("schema_version").get<int>(), ex::kSchemaVersion);
  EXPECT_TRUE(j.contains("wall_time_s"));
  ASSERT_FALSE(j.at("assertions").empty());
  for (const auto& a : j.at("assertions")) {
    for (const char* key : {"name", "measured", "relation", "tolerance", "passed"}) EXPECT_TRUE(a.contains(key)) << key;
  }
  EXPECT_EQ(j.at("config").at("trials").get<int>(), 4);
}

TEST(Run, TightToleranceFails) {
  ex::ExperimentConfig c;
  c.kind = "beam-transfer";
  c.tolerances["discrete"] = 1e-12;
  const auto r = ex::run(c);
  EXPECT_FALSE(r.passed());
  int failed = 0;
  for (const auto& a : r.assertions) failed += a.passed ? 0 : 1;
  EXPECT_EQ(failed, 1);
}

TEST(Expect, Relations) {
  ex::RunReport r;
  r.expect("a", 1.0, "<=", 1.0);
  r.expect("b", 1.0, "<", 1.0);
  r.expect("c", 2.0, ">=", 1.0);
  r.expect("d", 3.0, "==", 3.0);
  EXPECT_TRUE(r.assertions[0].passed);
  EXPECT_FALSE(r.assertions[1].passed);
  EXPECT_TRUE(r.assertions[2].passed);
  EXPECT_TRUE(r.assertions[3].passed);
  EXPECT_FALSE(r.passed());
  EXPECT_THROW(r.expect("e", 1.0, "~", 1.0), wellposed::InvalidInput);
  EXPECT_FALSE(ex::RunReport{}.passed());
}

TEST(Suite, IndependentOfThreadCount) {
  const auto one = ex::suite(ex::Profile::quick, 3, 1);
  const auto two = ex::suite(ex::Profile::quick, 3, 2);
  ASSERT_EQ(one.runs.size(), two.runs.size());
  EXPECT_EQ(one.to_json(false).dump(), two.to_json(false).dump());
  for (std::size_t i = 0; i < one.runs.size(); ++i)
    EXPECT_EQ(one.runs[i].to_json(false).dump(), two.runs[i].to_json(false).dump()) << one.runs[i].config.kind;
  EXPECT_TRUE(one.passed());
}
