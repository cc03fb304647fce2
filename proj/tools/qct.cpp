// qct: command-line front end for the tester compiler, Schur-Weyl self
// tests, tomography sweeps and diamond-distance estimates.
//
// Exit codes: 0 success, 1 invariant failure (failing checks on stderr),
// 2 malformed spec or arguments.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "qct/harness.hpp"

namespace {

using qct::harness::json;

int emit(const qct::harness::CommandResult& res, const std::string& out_path) {
  const std::string report = res.report.dump(2) + "\n";
  std::cout << report;
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write '" << out_path << "'\n";
      return 2;
    }
    out << (res.csv.empty() ? report : res.csv);
  }
  if (res.ok()) return 0;
  json failing = json::array();
  for (const auto& c : res.failures) failing.push_back(qct::harness::to_json(c));
  std::cerr << json{{"failing_checks", failing}}.dump(2) << '\n';
  return 1;
}

std::string describe(const std::string& name) {
  if (name == "verify") return "compile random testers and compare against Monte-Carlo dilation averages";
  if (name == "schur-selftest") return "check Schur transforms for the configured (n, d) cases";
  if (name == "tomo-iso") return "isometry tomography: success rate and error-vs-queries sweep";
  if (name == "tomo-channel") return "channel tomography through a random dilation";
  if (name == "dnorm") return "diamond distance between two channels read from JSON";
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel-tester compiler and channel tomography simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qct::harness::kVersion);

  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t jobs = 1;
  for (const auto& name : qct::harness::kCommands) {
    CLI::App* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", config, "JSON experiment spec");
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out, "report path (CSV for tomography sweeps)");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  try {
    json spec_json = json::object();
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) throw qct::harness::SpecError("cannot open spec '" + config + "'");
      try {
        spec_json = json::parse(in);
      } catch (const json::exception& e) {
        throw qct::harness::SpecError(std::string("spec is not valid JSON: ") + e.what());
      }
    }
    qct::harness::ExperimentSpec spec = qct::harness::parse_spec(spec_json, chosen->get_name());
    if (chosen->count("--seed") > 0) spec.seed = seed;
    if (chosen->count("--out") > 0) spec.output = out;
    return emit(qct::harness::run(spec, jobs), spec.output);
  } catch (const qct::harness::SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const qct::SizeLimitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const qct::ConstructionFault& e) {
    std::cerr << json{{"failing_checks", json::array({{{"name", "construction"}, {"error", e.what()}}})}}.dump(2)
              << '\n';
    return 1;
  } catch (const qct::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
