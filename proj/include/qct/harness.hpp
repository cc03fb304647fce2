#pragma once

// Experiment specs and the commands behind the qct CLI. Every command is a
// pure function of its spec: trial k draws from make_stream(seed, k), so
// reports are byte-identical for any --jobs value.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qct/channels.hpp"
#include "qct/compiler.hpp"
#include "qct/error.hpp"
#include "qct/json_io.hpp"
#include "qct/metrics.hpp"
#include "qct/random.hpp"
#include "qct/schur_weyl.hpp"
#include "qct/testers.hpp"
#include "qct/tomography.hpp"
#include "qct/twirl.hpp"

namespace qct::harness {

using json_io::json;

inline constexpr const char* kVersion = "0.1.0";
inline const std::vector<std::string> kCommands = {"verify", "schur-selftest", "tomo-iso", "tomo-channel", "dnorm"};

/// Malformed or inconsistent experiment spec (CLI exit code 2).
class SpecError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct ExperimentSpec {
  std::string command;
  std::size_t d1 = 2;
  std::size_t d2 = 2;
  std::size_t r = 2;
  std::size_t n = 1;
  std::size_t mc_samples = 10000;
  std::size_t trials = 20;
  std::size_t outcomes = 3;
  std::vector<std::size_t> n_grid = {100, 1000, 10000, 100000};
  double eps = 0.25;
  double c_total = kDefaultCTotal;
  double c_copies = kDefaultCCopies;
  std::vector<std::pair<std::size_t, std::size_t>> schur_cases = {{2, 2}, {2, 3}, {3, 2}, {3, 4}, {2, 4}};
  std::vector<std::string> channels;
  std::uint64_t seed = 1;
  std::string output;
};

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

/// Canonical form hashed into reports (the output path is not part of it).
inline json to_json(const ExperimentSpec& s) {
  json j;
  j["command"] = s.command;
  j["dims"] = {{"d1", s.d1}, {"d2", s.d2}, {"r", s.r}, {"n", s.n}};
  j["counts"] = {{"mc_samples", s.mc_samples}, {"trials", s.trials}, {"outcomes", s.outcomes}, {"n_grid", s.n_grid}};
  j["eps"] = s.eps;
  j["constants"] = {{"c_total", s.c_total}, {"c_copies", s.c_copies}};
  json cases = json::array();
  for (const auto& [n, d] : s.schur_cases) cases.push_back(json::array({n, d}));
  j["schur_cases"] = cases;
  j["channels"] = s.channels;
  j["seed"] = s.seed;
  return j;
}

inline std::string spec_hash(const ExperimentSpec& s) { return hex64(fnv1a(to_json(s).dump())); }

inline json tolerance_table() {
  return {{"kraus_completeness", kKrausCompletenessTol},
          {"isometry", kIsometryTol},
          {"tester_psd_and_normalization", kTesterTol},
          {"compiler_psd", kCompilerPsdTol},
          {"block_identity", kBlockIdentityTol},
          {"z_score_limit", kZScoreLimit},
          {"power_decomposition_residual", kPowerDecompositionTol},
          {"schur_structure", 1e-10},
          {"twirl_identities", 1e-10},
          {"zero_noise_diamond", 1e-8},
          {"contractivity_slack", 1e-6}};
}

namespace detail {

template <class T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SpecError(std::string("spec field '") + key + "' has the wrong type: " + e.what());
  }
}

}  // namespace detail

/// Reads a spec object; fields missing from `j` keep their defaults.
inline ExperimentSpec parse_spec(const json& j, const std::string& command) {
  if (!j.is_object()) throw SpecError("spec must be a JSON object");
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw SpecError("unknown command '" + command + "'");
  ExperimentSpec s;
  s.command = command;
  if (j.contains("command") && detail::field<std::string>(j, "command", command) != command)
    throw SpecError("spec is for command '" + j.at("command").get<std::string>() + "', not '" + command + "'");
  const json dims = j.value("dims", json::object());
  const json counts = j.value("counts", json::object());
  const json consts = j.value("constants", json::object());
  s.d1 = detail::field(dims, "d1", s.d1);
  s.d2 = detail::field(dims, "d2", s.d2);
  s.r = detail::field(dims, "r", s.r);
  s.n = detail::field(dims, "n", s.n);
  s.mc_samples = detail::field(counts, "mc_samples", s.mc_samples);
  s.trials = detail::field(counts, "trials", s.trials);
  s.outcomes = detail::field(counts, "outcomes", s.outcomes);
  s.n_grid = detail::field(counts, "n_grid", s.n_grid);
  s.eps = detail::field(j, "eps", s.eps);
  s.c_total = detail::field(consts, "c_total", s.c_total);
  s.c_copies = detail::field(consts, "c_copies", s.c_copies);
  if (j.contains("schur_cases")) {
    s.schur_cases.clear();
    for (const auto& c : j.at("schur_cases")) {
      if (!c.is_array() || c.size() != 2) throw SpecError("schur_cases entries must be [n, d] pairs");
      s.schur_cases.emplace_back(c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>());
    }
  }
  s.channels = detail::field(j, "channels", s.channels);
  s.seed = detail::field(j, "seed", s.seed);
  s.output = detail::field(j, "output", s.output);
  return s;
}

/// Precondition checks for the command (SpecError on violation).
inline void validate(const ExperimentSpec& s) {
  if (s.d1 == 0 || s.d2 == 0 || s.r == 0 || s.n == 0) throw SpecError("all dimensions must be >= 1");
  if (s.command == "verify" || s.command == "tomo-channel") {
    if (s.r * s.d2 < s.d1)
      throw SpecError("r*d2 = " + std::to_string(s.r * s.d2) + " < d1 = " + std::to_string(s.d1) +
                      ": no isometry C^d1 -> C^r (x) C^d2 exists");
  }
  if (s.command == "tomo-iso" && s.d2 < s.d1) throw SpecError("tomo-iso needs d2 >= d1");
  if (s.command == "verify" && (s.mc_samples < 2 || s.outcomes == 0)) throw SpecError("verify needs mc_samples >= 2 and outcomes >= 1");
  if ((s.command == "tomo-iso" || s.command == "tomo-channel") && s.n_grid.empty() && !(s.eps > 0.0))
    throw SpecError("tomography needs an N grid or eps > 0");
  if (!(s.eps > 0.0) || !(s.c_total > 0.0) || !(s.c_copies > 0.0)) throw SpecError("eps and constants must be positive");
  if (s.command == "dnorm" && s.channels.size() != 2) throw SpecError("dnorm needs exactly two channel files");
  for (const auto& [n, d] : s.schur_cases)
    if (n == 0 || d == 0) throw SpecError("schur_cases entries must be positive");
}

struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
};

inline Check check_le(std::string name, double value, double limit) {
  return {std::move(name), value, limit, value <= limit};
}

inline json to_json(const Check& c) {
  return {{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"pass", c.pass}};
}

struct CommandResult {
  json report;
  /// Tomography sweeps: CSV rows with the fixed schema.
  std::string csv;
  std::vector<Check> failures;
  bool ok() const { return failures.empty(); }
};

/// Runs fn(0..count-1) on `jobs` threads. Each index writes only its own
/// output slot.
inline void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline json report_header(const ExperimentSpec& s) {
  return {{"tool", "qct"},       {"version", kVersion},   {"command", s.command},
          {"seed", s.seed},      {"spec_hash", spec_hash(s)}, {"spec", to_json(s)},
          {"tolerances", tolerance_table()}};
}

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t k = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double kk = static_cast<double>(k);
  return (kk * sxy - sx * sy) / (kk * sxx - sx * sx);
}

inline std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline const char* kCsvHeader = "d1,d2,r,N,trial,diamond_error,choi_error,seed\n";

// ---------------------------------------------------------------------------

/// Compiles random testers on ISO(d1, r*d2) and checks them against random
/// channels of Kraus rank <= r; one extra instance with a perturbed outcome
/// must fail.
inline CommandResult run_verify(const ExperimentSpec& s, std::size_t jobs = 1) {
  validate(s);
  std::vector<json> rows(s.trials);
  std::vector<bool> passed(s.trials, false);
  parallel_for(s.trials, jobs, [&](std::size_t k) {
    Rng rng = make_stream(s.seed, k);
    const ParallelTester t = random_tester(s.n, s.d1, s.r * s.d2, s.outcomes, rng);
    const CompiledTester ct = compile(t, s.r);
    const QuantumChannel ch = random_channel(s.d1, s.d2, s.r, rng);
    const TheoremReport rep = verify_theorem(t, ct, ch, s.mc_samples, rng);
    rows[k] = to_json(rep);
    rows[k]["trial"] = k;
    passed[k] = rep.pass;
  });

  CommandResult res;
  res.report = report_header(s);
  res.report["regrouping"] = qct::detail::pair_order(s.n);
  res.report["s"] = std::min(s.r, s.d1 * s.d2);
  res.report["trials"] = rows;
  for (std::size_t k = 0; k < s.trials; ++k)
    if (!passed[k]) res.failures.push_back({"trial " + std::to_string(k), 0.0, 0.0, false});

  Rng rng = make_stream(s.seed, s.trials);
  const ParallelTester t = random_tester(s.n, s.d1, s.r * s.d2, s.outcomes, rng);
  const QuantumChannel ch = random_channel(s.d1, s.d2, s.r, rng);
  const CompiledTester bad = perturb_outcome(compile(t, s.r), ch, 0, 1e-3);
  const TheoremReport neg = verify_theorem(t, bad, ch, std::min<std::size_t>(s.mc_samples, 2000), rng);
  res.report["negative_control"] = {{"perturbation", 1e-3}, {"pass", neg.pass}, {"expected_pass", false}};
  if (neg.pass) res.failures.push_back({"negative control was not detected", 0.0, 0.0, false});
  res.report["pass"] = res.ok();
  return res;
}

/// Largest deviation of S^† p(pi) S from (+) p_lambda(pi) (x) I_Q over S_n.
inline double permutation_block_deviation(const SchurTransform& st) {
  double worst = 0.0;
  for (const auto& pi : symmetric_group(st.n)) {
    const Matrix z = st.unitary.adjoint() * permutation_operator(st.n, st.d, pi).matrix() * st.unitary;
    Matrix expect = Matrix::Zero(z.rows(), z.cols());
    for (const auto& b : st.layout) {
      const RealMatrix rep = young_orthogonal_rep(b.shape, pi);
      for (std::size_t t = 0; t < b.dim_p; ++t)
        for (std::size_t u = 0; u < b.dim_p; ++u)
          for (std::size_t m = 0; m < b.dim_q; ++m)
            expect(static_cast<Eigen::Index>(b.index(t, m)), static_cast<Eigen::Index>(b.index(u, m))) =
                rep(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(u));
    }
    worst = std::max(worst, (z - expect).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// Largest deviation of S^† U^{(x) n} S from (+) I_P (x) q_lambda(U).
inline double unitary_block_deviation(const SchurTransform& st, const Matrix& u) {
  const Matrix z = st.unitary.adjoint() * kron_power(u, st.n) * st.unitary;
  Matrix expect = Matrix::Zero(z.rows(), z.cols());
  for (const auto& b : st.layout) {
    const auto q = static_cast<Eigen::Index>(b.dim_q);
    const Matrix qb = z.block(static_cast<Eigen::Index>(b.index(0, 0)), static_cast<Eigen::Index>(b.index(0, 0)), q, q);
    for (std::size_t t = 0; t < b.dim_p; ++t)
      expect.block(static_cast<Eigen::Index>(b.index(t, 0)), static_cast<Eigen::Index>(b.index(t, 0)), q, q) = qb;
  }
  return (z - expect).cwiseAbs().maxCoeff();
}

/// p_lambda(pi) as read off a transform (block rows index(t, 0)).
inline RealMatrix extracted_irrep(const SchurTransform& st, const SchurBlock& b, const Permutation& pi) {
  const Matrix z = st.unitary.adjoint() * permutation_operator(st.n, st.d, pi).matrix() * st.unitary;
  RealMatrix out(static_cast<Eigen::Index>(b.dim_p), static_cast<Eigen::Index>(b.dim_p));
  for (std::size_t t = 0; t < b.dim_p; ++t)
    for (std::size_t u = 0; u < b.dim_p; ++u)
      out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(u)) =
          z(static_cast<Eigen::Index>(b.index(t, 0)), static_cast<Eigen::Index>(b.index(u, 0))).real();
  return out;
}

inline CommandResult run_schur_selftest(const ExperimentSpec& s, std::size_t jobs = 1) {
  validate(s);
  std::vector<std::vector<Check>> per_case(s.schur_cases.size());
  parallel_for(s.schur_cases.size(), jobs, [&](std::size_t c) {
    const auto [n, d] = s.schur_cases[c];
    const std::string tag = "(n=" + std::to_string(n) + ",d=" + std::to_string(d) + ") ";
    Rng rng = make_stream(s.seed, c);
    const SchurTransform& st = cached_schur_transform(n, d);
    const auto dim = static_cast<Eigen::Index>(st.dim());
    auto& out = per_case[c];
    out.push_back(check_le(tag + "unitarity",
                           (st.unitary.adjoint() * st.unitary - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff(),
                           1e-10));
    out.push_back(check_le(tag + "permutation blocks", permutation_block_deviation(st), 1e-10));
    double ublock = 0.0;
    for (int k = 0; k < 10; ++k)
      ublock = std::max(ublock, unitary_block_deviation(st, haar_unitary(static_cast<Eigen::Index>(d), rng)));
    out.push_back(check_le(tag + "unitary blocks", ublock, 1e-10));
    const std::size_t other = d == 2 ? 3 : 2;
    const SchurTransform& so = cached_schur_transform(n, other);
    double cross = 0.0;
    for (const auto& b : st.layout) {
      const SchurBlock* bo = so.find(b.shape);
      if (bo == nullptr) continue;
      for (const auto& pi : symmetric_group(n))
        cross = std::max(cross, (extracted_irrep(st, b, pi) - extracted_irrep(so, *bo, pi)).cwiseAbs().maxCoeff());
    }
    out.push_back(check_le(tag + "P basis identical to d=" + std::to_string(other), cross, 1e-10));
    double residual = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Vector psi = haar_state(static_cast<Eigen::Index>(d * 2), rng);
      residual = std::max(residual, bipartite_power_decompose(psi, d, 2, n).residual);
    }
    out.push_back(check_le(tag + "power decomposition residual", residual, kPowerDecompositionTol));
  });

  std::vector<Check> checks;
  for (auto& v : per_case) checks.insert(checks.end(), v.begin(), v.end());

  for (const auto& [n, r] : std::vector<std::pair<std::size_t, std::size_t>>{{2, 2}, {3, 2}}) {
    const std::string tag = "twirl (n=" + std::to_string(n) + ",r=" + std::to_string(r) + ") ";
    Rng rng = make_stream(s.seed, 1000 + n);
    Layout layout{{"S", 2}};
    std::vector<std::string> anc;
    for (std::size_t j = 1; j <= n; ++j) {
      layout.push_back({anc_label(j), r});
      anc.push_back(anc_label(j));
    }
    const auto dim = static_cast<Eigen::Index>(total_dim(layout));
    const LabeledOperator x(ginibre(dim, dim, rng), layout);
    const LabeledOperator tw = exact_twirl(x, anc, r, n);
    const LabeledOperator tw2 = exact_twirl(tw, anc, r, n);
    checks.push_back(check_le(tag + "idempotence", (tw2.matrix() - tw.matrix()).cwiseAbs().maxCoeff(), 1e-10));
    checks.push_back(check_le(tag + "trace", std::abs(tw.matrix().trace() - x.matrix().trace()), 1e-10));
    const Matrix w = kron(Matrix::Identity(2, 2), kron_power(haar_unitary(static_cast<Eigen::Index>(r), rng), n));
    checks.push_back(
        check_le(tag + "invariance", (w * tw.matrix() * w.adjoint() - tw.matrix()).cwiseAbs().maxCoeff(), 1e-10));
    const TwirlEstimate mc = mc_twirl(x, anc, r, n, s.mc_samples, rng);
    double worst_z = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j < dim; ++j) {
        const double dev = std::abs(mc.mean.matrix()(i, j) - tw.matrix()(i, j));
        worst_z = std::max(worst_z, mc.std_error(i, j) > 1e-12 ? dev / mc.std_error(i, j) : (dev > 1e-9 ? 1e9 : 0.0));
      }
    checks.push_back(check_le(tag + "Monte-Carlo agreement (stderr units)", worst_z, 5.0));
  }

  CommandResult res;
  res.report = report_header(s);
  json arr = json::array();
  for (const auto& c : checks) {
    arr.push_back(to_json(c));
    if (!c.pass) res.failures.push_back(c);
  }
  res.report["checks"] = arr;
  res.report["pass"] = res.ok();
  return res;
}

/// Target budget for the eps requested by the experiment config.
inline std::size_t target_queries(const ExperimentSpec& s, std::size_t d_out) {
  return tomography_queries(s.d1, d_out, s.eps, s.c_total);
}

inline std::vector<std::size_t> sweep_grid(const ExperimentSpec& s, std::size_t d_out) {
  std::vector<std::size_t> grid = s.n_grid;
  const std::size_t target = target_queries(s, d_out);
  if (std::find(grid.begin(), grid.end(), target) == grid.end()) grid.push_back(target);
  return grid;
}

/// Isometry tomography of Haar-random V in ISO(d1, d2) over the N grid (and
/// the budget for eps), plus a zero-noise run.
inline CommandResult run_tomo_iso(const ExperimentSpec& s, std::size_t jobs = 1) {
  validate(s);
  const std::vector<std::size_t> grid = sweep_grid(s, s.d2);
  const std::size_t total = grid.size() * s.trials;
  std::vector<double> diamond(total);
  std::vector<double> choi_err(total);
  std::vector<double> unitarity(total);
  parallel_for(total, jobs, [&](std::size_t idx) {
    Rng rng = make_stream(s.seed, idx);
    const Isometry v = random_isometry(s.d1, s.d2, rng);
    const IsometryEstimate est = isometry_tomography_budget(v, grid[idx / s.trials], rng, s.c_copies);
    const auto d1 = static_cast<Eigen::Index>(s.d1);
    unitarity[idx] = (est.v_hat.adjoint() * est.v_hat - Matrix::Identity(d1, d1)).cwiseAbs().maxCoeff();
    diamond[idx] = isometry_diamond_distance(v.matrix(), est.v_hat);
    choi_err[idx] = trace_distance(choi_state(isometry_channel(v)), choi_state(QuantumChannel(s.d1, s.d2, {est.v_hat})));
  });

  CommandResult res;
  std::ostringstream csv;
  csv << kCsvHeader;
  json per_n = json::array();
  std::vector<double> xs;
  std::vector<double> medians;
  double worst_unitarity = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> errs;
    std::size_t ok = 0;
    for (std::size_t t = 0; t < s.trials; ++t) {
      const std::size_t idx = g * s.trials + t;
      csv << s.d1 << ',' << s.d2 << ",1," << grid[g] << ',' << t << ',' << csv_number(diamond[idx]) << ','
          << csv_number(choi_err[idx]) << ',' << stream_seed(s.seed, idx) << '\n';
      errs.push_back(diamond[idx]);
      ok += diamond[idx] <= s.eps ? 1 : 0;
      worst_unitarity = std::max(worst_unitarity, unitarity[idx]);
    }
    per_n.push_back({{"N", grid[g]},
                     {"median_diamond_error", median(errs)},
                     {"success_rate", static_cast<double>(ok) / static_cast<double>(s.trials)}});
    if (g < s.n_grid.size()) {
      xs.push_back(static_cast<double>(grid[g]));
      medians.push_back(median(errs));
    }
  }
  res.csv = csv.str();

  Rng rng = make_stream(s.seed, total);
  const Isometry v = random_isometry(s.d1, s.d2, rng);
  const IsometryEstimate exact = isometry_tomography_budget(v, 2 * s.d1, rng, s.c_copies, true);
  const Check zero = check_le("zero-noise diamond error", isometry_diamond_distance(v.matrix(), exact.v_hat), 1e-8);
  const Check iso = check_le("estimate isometry deviation", worst_unitarity, 1e-9);

  res.report = report_header(s);
  res.report["oracle_model"] = "eps = eps_max * Uniform[0,1], eps_max = min(1, c_copies * d2 / copies)";
  res.report["target_queries"] = target_queries(s, s.d2);
  res.report["sweep"] = per_n;
  if (xs.size() >= 2) res.report["loglog_slope"] = loglog_slope(xs, medians);
  res.report["checks"] = json::array({to_json(zero), to_json(iso)});
  for (const auto& c : {zero, iso})
    if (!c.pass) res.failures.push_back(c);
  res.report["pass"] = res.ok();
  return res;
}

/// Channel tomography through Haar dilations for random channels of Kraus
/// rank r, with the per-trial contractivity assertion.
inline CommandResult run_tomo_channel(const ExperimentSpec& s, std::size_t jobs = 1) {
  validate(s);
  const std::vector<std::size_t> grid = sweep_grid(s, s.r * s.d2);
  const std::size_t total = grid.size() * s.trials;
  std::vector<double> diamond(total);
  std::vector<double> iso_err(total);
  std::vector<double> choi_err(total);
  parallel_for(total, jobs, [&](std::size_t idx) {
    Rng rng = make_stream(s.seed, idx);
    const QuantumChannel ch = random_channel(s.d1, s.d2, s.r, rng);
    const ChannelTomographyResult res = channel_tomography_budget(ch, s.r, grid[idx / s.trials], rng, s.c_copies);
    diamond[idx] = diamond_distance(res.estimate, ch, rng).value;
    iso_err[idx] = isometry_diamond_distance(res.dilation.matrix(), res.dilation_estimate.matrix());
    choi_err[idx] = choi_distance(res.estimate, ch);
  });

  CommandResult res;
  std::ostringstream csv;
  csv << kCsvHeader;
  json per_n = json::array();
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> errs;
    std::size_t ok = 0;
    for (std::size_t t = 0; t < s.trials; ++t) {
      const std::size_t idx = g * s.trials + t;
      csv << s.d1 << ',' << s.d2 << ',' << s.r << ',' << grid[g] << ',' << t << ',' << csv_number(diamond[idx]) << ','
          << csv_number(choi_err[idx]) << ',' << stream_seed(s.seed, idx) << '\n';
      errs.push_back(diamond[idx]);
      ok += diamond[idx] <= s.eps ? 1 : 0;
      worst_gap = std::max(worst_gap, diamond[idx] - iso_err[idx]);
    }
    per_n.push_back({{"N", grid[g]},
                     {"median_diamond_error", median(errs)},
                     {"success_rate", static_cast<double>(ok) / static_cast<double>(s.trials)}});
  }
  res.csv = csv.str();
  const Check contr = check_le("contractivity: channel error - dilation error", worst_gap, 1e-6);
  res.report = report_header(s);
  res.report["oracle_model"] = "eps = eps_max * Uniform[0,1], eps_max = min(1, c_copies * r * d2 / copies)";
  res.report["diamond_estimator"] = "see-saw lower bound (channel), numerical-range upper bound (dilation)";
  res.report["target_queries"] = target_queries(s, s.r * s.d2);
  res.report["sweep"] = per_n;
  res.report["checks"] = json::array({to_json(contr)});
  if (!contr.pass) res.failures.push_back(contr);
  res.report["pass"] = res.ok();
  return res;
}

inline CommandResult run_dnorm(const ExperimentSpec& s, std::size_t jobs = 1) {
  validate(s);
  (void)jobs;
  QuantumChannel a = identity_channel(1);
  QuantumChannel b = identity_channel(1);
  try {
    a = read_channel(s.channels[0]);
    b = read_channel(s.channels[1]);
  } catch (const InvalidArgument& e) {
    throw SpecError(e.what());
  }
  if (a.d_in() != b.d_in() || a.d_out() != b.d_out()) throw SpecError("dnorm: channels have different shapes");
  Rng rng = make_stream(s.seed, 0);
  const DiamondEstimate est = diamond_distance(a, b, rng);
  CommandResult res;
  res.report = report_header(s);
  res.report["diamond_distance"] = est.value;
  res.report["lower_bound"] = est.lower_bound;
  if (est.upper_bound) {
    res.report["upper_bound"] = *est.upper_bound;
    res.report["isometry_distance"] = isometry_diamond_distance(a.kraus().front(), b.kraus().front());
  }
  res.report["choi_distance"] = choi_distance(a, b);
  res.report["pass"] = true;
  return res;
}

inline CommandResult run(const ExperimentSpec& s, std::size_t jobs = 1) {
  if (s.command == "verify") return run_verify(s, jobs);
  if (s.command == "schur-selftest") return run_schur_selftest(s, jobs);
  if (s.command == "tomo-iso") return run_tomo_iso(s, jobs);
  if (s.command == "tomo-channel") return run_tomo_channel(s, jobs);
  if (s.command == "dnorm") return run_dnorm(s, jobs);
  throw SpecError("unknown command '" + s.command + "'");
}

}  // namespace qct::harness
