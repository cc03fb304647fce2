#include <gtest/gtest.h>

#include <filesystem>

#include "qct/harness.hpp"

using namespace qct;
using namespace qct::harness;

namespace {

ExperimentSpec small(const std::string& command) {
  ExperimentSpec s = parse_spec(json::object(), command);
  s.trials = 2;
  s.mc_samples = 200;
  s.n_grid = {100, 1000};
  return s;
}

}  // namespace

TEST(Spec, DefaultsAndOverrides) {
  const auto s = parse_spec(json::parse(R"({"dims": {"d1": 3, "r": 4}, "counts": {"trials": 7}, "seed": 99})"), "verify");
  EXPECT_EQ(s.d1, 3u);
  EXPECT_EQ(s.d2, 2u);
  EXPECT_EQ(s.r, 4u);
  EXPECT_EQ(s.trials, 7u);
  EXPECT_EQ(s.seed, 99u);
  EXPECT_EQ(s.command, "verify");
}

TEST(Spec, MalformedInputsAreRejected) {
  EXPECT_THROW(parse_spec(json::array(), "verify"), SpecError);
  EXPECT_THROW(parse_spec(json::object(), "nope"), SpecError);
  EXPECT_THROW(parse_spec(json::parse(R"({"dims": {"d1": "two"}})"), "verify"), SpecError);
}

TEST(Spec, CompilerPreconditionIsEnforced) {
  auto s = parse_spec(json::parse(R"({"dims": {"d1": 5, "d2": 2, "r": 2}})"), "verify");
  EXPECT_THROW(validate(s), SpecError);
  s.command = "tomo-channel";
  EXPECT_THROW(validate(s), SpecError);
  s.command = "schur-selftest";
  EXPECT_NO_THROW(validate(s));
  auto z = parse_spec(json::parse(R"({"dims": {"d1": 0}})"), "schur-selftest");
  EXPECT_THROW(validate(z), SpecError);
  auto dn = parse_spec(json::object(), "dnorm");
  EXPECT_THROW(validate(dn), SpecError);
}

TEST(Spec, HashIsStableAndSensitive) {
  const auto a = small("verify");
  auto b = a;
  EXPECT_EQ(spec_hash(a), spec_hash(b));
  b.seed = 2;
  EXPECT_NE(spec_hash(a), spec_hash(b));
  EXPECT_EQ(spec_hash(a).size(), 16u);
}

TEST(Report, HeaderCarriesProvenance) {
  const auto h = report_header(small("verify"));
  for (const char* key : {"version", "seed", "spec_hash", "tolerances", "spec"}) EXPECT_TRUE(h.contains(key)) << key;
  EXPECT_EQ(h["version"], kVersion);
}

TEST(Helpers, MedianAndSlope) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_NEAR(loglog_slope({1, 10, 100}, {1, 0.1, 0.01}), -1.0, 1e-12);
}

TEST(Helpers, ParallelForCoversEveryIndexOnce) {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 5) throw InvalidArgument("boom");
               }),
               InvalidArgument);
}

TEST(Commands, VerifyIsDeterministicAndJobIndependent) {
  const auto s = small("verify");
  const auto a = run(s, 1);
  const auto b = run(s, 2);
  EXPECT_TRUE(a.ok());
  EXPECT_EQ(a.report.dump(), b.report.dump());
  EXPECT_FALSE(a.report["negative_control"]["pass"].get<bool>());
}

TEST(Commands, TomographyCsvSchema) {
  const auto s = small("tomo-iso");
  const auto res = run(s, 1);
  EXPECT_TRUE(res.ok()) << res.report.dump();
  EXPECT_EQ(res.csv.substr(0, res.csv.find('\n') + 1), std::string(kCsvHeader));
  std::size_t lines = 0;
  for (char c : res.csv) lines += c == '\n' ? 1 : 0;
  EXPECT_EQ(lines, 1 + 3 * s.trials);
  EXPECT_EQ(run(s, 2).csv, res.csv);
}

TEST(Commands, TomographyChannelRuns) {
  auto s = small("tomo-channel");
  s.n_grid = {1000};
  const auto res = run(s, 1);
  EXPECT_TRUE(res.ok()) << res.report.dump();
}

TEST(Commands, DiamondFromChannelFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "qct_harness_test";
  std::filesystem::create_directories(dir);
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  write_channel(identity_channel(2), (dir / "id.json").string());
  write_channel(QuantumChannel(2, 2, {x}), (dir / "x.json").string());
  auto s = small("dnorm");
  s.channels = {(dir / "id.json").string(), (dir / "x.json").string()};
  const auto res = run(s, 1);
  EXPECT_NEAR(res.report["diamond_distance"].get<double>(), 2.0, 1e-6);
  EXPECT_TRUE(res.report["lower_bound"].get<bool>());
  s.channels = {(dir / "id.json").string(), (dir / "missing.json").string()};
  EXPECT_THROW(run(s, 1), SpecError);
}

TEST(Commands, SchurSelftestPasses) {
  auto s = small("schur-selftest");
  s.mc_samples = 2000;
  s.schur_cases = {{2, 2}, {3, 2}};
  const auto res = run(s, 1);
  EXPECT_TRUE(res.ok()) << res.report.dump();
}
