#pragma once

// Compiles a parallel tester that queries dilations W in ISO(d1, r*d2) of an
// unknown channel into a parallel tester that queries the channel itself,
// with T~_i * C_E^{(x) n} = E_{W ~ Dilation_r(E)}[T_i * C_W^{(x) n}].
//
// Pipeline: symmetrize (Haar twirl over the ancilla part of every B system),
// project (pair the permutation registers of A_jB_j and anc_j through
// |I_P>> and trace out the ancilla unitary register), complete (add the BOT
// outcome so the operators sum to rho'_A (x) I_B).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qct/channels.hpp"
#include "qct/error.hpp"
#include "qct/json_io.hpp"
#include "qct/linalg.hpp"
#include "qct/random.hpp"
#include "qct/schur_weyl.hpp"
#include "qct/tensor.hpp"
#include "qct/testers.hpp"
#include "qct/twirl.hpp"

namespace qct {

inline constexpr double kCompilerPsdTol = 1e-9;
inline constexpr double kBlockIdentityTol = 1e-8;
inline constexpr double kZScoreLimit = 5.0;

namespace detail {

inline std::vector<std::string> anc_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t j = 1; j <= n; ++j) out.push_back(anc_label(j));
  return out;
}

/// B_j (dimension r*d2) -> anc_j (r), B_j (d2), ancilla leading.
inline LabeledOperator split_ancillas(LabeledOperator x, std::size_t n, std::size_t r, std::size_t d2) {
  for (std::size_t j = 1; j <= n; ++j) x = split_system(x, b_label(j), Layout{{anc_label(j), r}, {b_label(j), d2}});
  return x;
}

inline LabeledOperator merge_ancillas(LabeledOperator x, std::size_t n) {
  for (std::size_t j = 1; j <= n; ++j) x = merge_systems(x, {anc_label(j), b_label(j)}, b_label(j));
  return x;
}

/// A1 B1 A2 B2 ... An Bn: each query pair becomes one d1*d2 register.
inline std::vector<std::string> pair_order(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t j = 1; j <= n; ++j) {
    out.push_back(a_label(j));
    out.push_back(b_label(j));
  }
  return out;
}

inline std::vector<std::string> tester_order(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t j = 1; j <= n; ++j) out.push_back(a_label(j));
  for (std::size_t j = 1; j <= n; ++j) out.push_back(b_label(j));
  return out;
}

/// N_lambda = tr_{Q^r}(<<I_P| Z |I_P>>) for Z given in the coordinates
/// (Schur basis of the AB pairs) (x) (Schur basis of the ancillas).
inline Matrix paired_block(const Matrix& z, const SchurBlock& ab, const SchurBlock& k, std::size_t k_dim) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(ab.dim_q), static_cast<Eigen::Index>(ab.dim_q));
  const auto kd = static_cast<Eigen::Index>(k_dim);
  for (std::size_t t = 0; t < ab.dim_p; ++t)
    for (std::size_t u = 0; u < ab.dim_p; ++u)
      for (std::size_t qa = 0; qa < ab.dim_q; ++qa)
        for (std::size_t qb = 0; qb < ab.dim_q; ++qb) {
          cplx acc = 0.0;
          const Eigen::Index row = static_cast<Eigen::Index>(ab.index(t, qa)) * kd;
          const Eigen::Index col = static_cast<Eigen::Index>(ab.index(u, qb)) * kd;
          for (std::size_t m = 0; m < k.dim_q; ++m)
            acc += z(row + static_cast<Eigen::Index>(k.index(t, m)), col + static_cast<Eigen::Index>(k.index(u, m)));
          out(static_cast<Eigen::Index>(qa), static_cast<Eigen::Index>(qb)) += acc;
        }
  return out;
}

}  // namespace detail

/// Twirls every outcome of a tester on ISO(d1, r*d2) over the ancilla
/// factors of its B systems. The result is again a tester with the same
/// rho_A.
inline ParallelTester symmetrize(const ParallelTester& t, std::size_t r) {
  if (r == 0 || t.d_b() % r != 0)
    throw DimensionError("symmetrize: ancilla dimension " + std::to_string(r) + " does not divide d_B = " +
                         std::to_string(t.d_b()));
  const std::size_t n = t.n();
  const std::size_t d2 = t.d_b() / r;
  const SchurTransform& st = cached_schur_transform(n, r);
  std::vector<Outcome> out;
  for (const auto& o : t.outcomes()) {
    const LabeledOperator split = detail::split_ancillas(o.op, n, r, d2);
    const LabeledOperator tw = exact_twirl(split, detail::anc_labels(n), r, n, st);
    out.push_back({o.label, detail::merge_ancillas(tw, n)});
  }
  return {n, t.d_a(), t.d_b(), std::move(out), t.rho_a().matrix()};
}

struct CompiledTester {
  std::size_t r = 0;
  /// min(r, d1*d2): Young diagrams with more rows are dropped.
  std::size_t s = 0;
  /// Outcomes T~_i followed by BOT; rho_a() is rho'_A.
  ParallelTester tester;
  /// Twirled tester T-bar on ISO(d1, r*d2).
  ParallelTester intermediate;

  const LabeledOperator& bot() const { return tester.outcomes().back().op; }
};

/// T~_i = (+)_lambda (1 / (dim P dim Q^r)) I_P (x) tr_{Q^r}(<<I_P| T-bar_i |I_P>>)
/// on A1..An B1..Bn (B of dimension d2).
inline std::vector<Outcome> project(const ParallelTester& tbar, std::size_t r) {
  if (r == 0 || tbar.d_b() % r != 0) throw DimensionError("project: ancilla dimension does not divide d_B");
  const std::size_t n = tbar.n();
  const std::size_t d1 = tbar.d_a();
  const std::size_t d2 = tbar.d_b() / r;
  const std::size_t s = std::min(r, d1 * d2);
  const SchurTransform& s_ab = cached_schur_transform(n, d1 * d2);
  const SchurTransform& s_k = cached_schur_transform(n, r);
  const Matrix frame = kron(s_ab.unitary, s_k.unitary);
  const std::size_t k_dim = s_k.dim();

  std::vector<std::string> order = detail::pair_order(n);
  for (const auto& a : detail::anc_labels(n)) order.push_back(a);
  Layout pair_layout;
  for (std::size_t j = 1; j <= n; ++j) {
    pair_layout.push_back({a_label(j), d1});
    pair_layout.push_back({b_label(j), d2});
  }

  std::vector<Outcome> out;
  for (const auto& o : tbar.outcomes()) {
    const LabeledOperator x = reorder(detail::split_ancillas(o.op, n, r, d2), order);
    const Matrix z = frame.adjoint() * x.matrix() * frame;
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(s_ab.dim()), static_cast<Eigen::Index>(s_ab.dim()));
    for (const auto& lambda : partitions(n, s)) {
      const SchurBlock* ab = s_ab.find(lambda);
      const SchurBlock* k = s_k.find(lambda);
      if (ab == nullptr || k == nullptr || ab->dim_p != k->dim_p)
        throw ConstructionFault("project: inconsistent Schur layouts for " + lambda.str());
      const Matrix nb = detail::paired_block(z, *ab, *k, k_dim) / static_cast<double>(ab->dim_p * k->dim_q);
      for (std::size_t t = 0; t < ab->dim_p; ++t)
        y.block(static_cast<Eigen::Index>(ab->index(t, 0)), static_cast<Eigen::Index>(ab->index(t, 0)), nb.rows(),
                nb.cols()) = nb;
    }
    const LabeledOperator back(s_ab.unitary * y * s_ab.unitary.adjoint(), pair_layout);
    out.push_back({o.label, reorder(back, detail::tester_order(n))});
  }
  return out;
}

/// rho'_A = (1/n!) sum_pi p(pi) rho_A p(pi)^†.
inline Matrix symmetrize_state(const Matrix& rho_a, std::size_t n, std::size_t d) {
  Matrix acc = Matrix::Zero(rho_a.rows(), rho_a.cols());
  const auto group = symmetric_group(n);
  for (const auto& pi : group) {
    const Matrix p = permutation_operator(n, d, pi).matrix();
    acc += p * rho_a * p.adjoint();
  }
  return acc / static_cast<double>(group.size());
}

/// Adds T~_BOT = rho'_A (x) I_B - sum_i T~_i. Throws ConstructionFault when
/// it is not PSD to kCompilerPsdTol.
inline ParallelTester complete(std::vector<Outcome> projected, const Matrix& rho_a, std::size_t n, std::size_t d1,
                               std::size_t d2) {
  for (const auto& o : projected)
    if (o.label == kBotLabel) throw InvalidArgument("outcome label '" + kBotLabel + "' is reserved");
  const Matrix rho_prime = symmetrize_state(rho_a, n, d1);
  const Layout layout = concat(query_layout("A", n, d1), query_layout("B", n, d2));
  const auto db = static_cast<Eigen::Index>(total_dim(query_layout("B", n, d2)));
  Matrix bot = kron(rho_prime, Matrix::Identity(db, db));
  for (const auto& o : projected) bot -= o.op.matrix();
  bot = hermitian_part(bot);
  const double lo = min_eigenvalue(bot);
  if (lo < -kCompilerPsdTol)
    throw ConstructionFault("complete: BOT operator has eigenvalue " + std::to_string(lo));
  projected.push_back({kBotLabel, LabeledOperator(std::move(bot), layout)});
  return {n, d1, d2, std::move(projected), rho_prime};
}

/// Full compiler for a tester on ISO(d1, r*d2).
inline CompiledTester compile(const ParallelTester& t, std::size_t r) {
  if (r == 0 || t.d_b() % r != 0)
    throw DimensionError("compile: d_B = " + std::to_string(t.d_b()) + " is not a multiple of r = " + std::to_string(r));
  if (t.d_b() < t.d_a())
    throw InvalidArgument("compile: isometries C^" + std::to_string(t.d_a()) + " -> C^" + std::to_string(t.d_b()) +
                          " do not exist (need r*d2 >= d1)");
  const std::size_t d1 = t.d_a();
  const std::size_t d2 = t.d_b() / r;
  ParallelTester tbar = symmetrize(t, r);
  ParallelTester compiled = complete(project(tbar, r), t.rho_a().matrix(), t.n(), d1, d2);
  return {r, std::min(r, d1 * d2), std::move(compiled), std::move(tbar)};
}

/// Block formula for T-bar_i * C_V^{(x) n}:
///   sum_lambda (1/dim Q^r) tr(tr_{Q^r}(<<I_P| T-bar^T |I_P>>) tr_{Q^r}|V_lambda><V_lambda|)
/// with V_lambda from the power decomposition of vec(V) regrouped as
/// (A B) (x) anc.
inline double prob_via_blocks(const LabeledOperator& tbar_i, const Isometry& v, std::size_t r, std::size_t n) {
  const std::size_t d1 = v.d_in();
  if (r == 0 || v.d_out() % r != 0) throw DimensionError("prob_via_blocks: ancilla dimension does not divide d_out");
  const std::size_t d2 = v.d_out() / r;
  const Layout expect = concat(query_layout("A", n, d1), query_layout("B", n, r * d2));
  if (tbar_i.systems() != expect) throw LabelError("prob_via_blocks: operator is not on A1..An B1..Bn");
  const SchurTransform& s_ab = cached_schur_transform(n, d1 * d2);
  const SchurTransform& s_k = cached_schur_transform(n, r);

  Matrix m(static_cast<Eigen::Index>(d1 * d2), static_cast<Eigen::Index>(r));
  for (std::size_t a = 0; a < d1; ++a)
    for (std::size_t b = 0; b < d2; ++b)
      for (std::size_t k = 0; k < r; ++k)
        m(static_cast<Eigen::Index>(a * d2 + b), static_cast<Eigen::Index>(k)) =
            v.matrix()(static_cast<Eigen::Index>(k * d2 + b), static_cast<Eigen::Index>(a));
  const PowerDecomposition dec = bipartite_power_decompose(m, n, s_ab, s_k);

  std::vector<std::string> order = detail::pair_order(n);
  for (const auto& a : detail::anc_labels(n)) order.push_back(a);
  const LabeledOperator x = reorder(detail::split_ancillas(transpose(tbar_i), n, r, d2), order);
  const Matrix frame = kron(s_ab.unitary, s_k.unitary);
  const Matrix z = frame.adjoint() * x.matrix() * frame;

  cplx total = 0.0;
  for (const auto& comp : dec.components) {
    const SchurBlock* ab = s_ab.find(comp.shape);
    const SchurBlock* k = s_k.find(comp.shape);
    const Matrix nb = detail::paired_block(z, *ab, *k, s_k.dim());
    const Matrix reduced = comp.coefficients * comp.coefficients.adjoint();
    total += (nb * reduced).trace() / static_cast<double>(k->dim_q);
  }
  return total.real();
}

/// vec(W)^{(x) n} on A1..An B1..Bn for W: C^{d1} -> C^{d_out}.
inline Vector isometry_power_vector(const Matrix& w, std::size_t n) {
  const std::size_t d_in = static_cast<std::size_t>(w.cols());
  const std::size_t d_out = static_cast<std::size_t>(w.rows());
  const Vector single = vec_flatten(w);  // (B, A)
  Layout layout;
  for (std::size_t j = 1; j <= n; ++j) {
    layout.push_back({b_label(j), d_out});
    layout.push_back({a_label(j), d_in});
  }
  return reorder(kron_power(single, n), layout, detail::tester_order(n));
}

struct OutcomeCheck {
  std::string label;
  double exact = 0.0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  double z = 0.0;
  double block_value = 0.0;
  double link_value = 0.0;
};

struct TheoremReport {
  std::vector<OutcomeCheck> outcomes;
  double max_abs_z = 0.0;
  /// max_i |prob_via_blocks - T-bar_i * C_V^{(x) n}|
  double block_gap = 0.0;
  /// max_i |T~_i * C_E^{(x) n} - T-bar_i * C_V^{(x) n}|
  double exact_gap = 0.0;
  /// ParallelTester::invariant_violation of the compiled tester
  double validity_violation = 0.0;
  double bot_probability = 0.0;
  bool pass = false;
};

/// Checks the compiled tester against the original on channel `ch`:
/// exact compiled probabilities vs a Monte-Carlo average over Haar
/// dilations, the block formula vs the direct link product, and validity.
inline TheoremReport verify_theorem(const ParallelTester& t, const CompiledTester& compiled, const QuantumChannel& ch,
                                    std::size_t mc_samples, Rng& rng) {
  const std::size_t n = t.n();
  const std::size_t r = compiled.r;
  if (ch.d_in() != t.d_a() || ch.d_out() * r != t.d_b())
    throw DimensionError("verify_theorem: channel dimensions do not match the tester");
  if (mc_samples < 2) throw InvalidArgument("verify_theorem: need at least two Monte-Carlo samples");

  TheoremReport rep;
  rep.validity_violation = compiled.tester.invariant_violation();

  const LabeledOperator c_pow = choi_power(ch, n);
  const Isometry base = stinespring_dilate(compress_kraus(ch, r), r);
  const LabeledOperator cv_pow = choi_power(isometry_channel(base), n);

  std::vector<Matrix> tt;
  for (const auto& o : t.outcomes()) tt.push_back(o.op.matrix().transpose());
  const std::size_t k = tt.size();
  std::vector<double> sum(k, 0.0);
  std::vector<double> sum_sq(k, 0.0);
  for (std::size_t s = 0; s < mc_samples; ++s) {
    const Isometry w = redilate(base, r, rng);
    const Vector wv = isometry_power_vector(w.matrix(), n);
    for (std::size_t i = 0; i < k; ++i) {
      const double p = wv.dot(tt[i] * wv).real();
      sum[i] += p;
      sum_sq[i] += p * p;
    }
  }

  const double ns = static_cast<double>(mc_samples);
  for (std::size_t i = 0; i < k; ++i) {
    OutcomeCheck c;
    c.label = t.outcomes()[i].label;
    c.exact = link_product(compiled.tester.outcomes()[i].op, c_pow).value().real();
    c.mc_mean = sum[i] / ns;
    const double var = std::max(0.0, (sum_sq[i] / ns - c.mc_mean * c.mc_mean) * ns / (ns - 1.0));
    c.mc_stderr = std::sqrt(var / ns);
    const double diff = c.exact - c.mc_mean;
    if (c.mc_stderr < 1e-12)
      c.z = std::abs(diff) <= 1e-9 ? 0.0 : std::numeric_limits<double>::infinity();
    else
      c.z = diff / c.mc_stderr;
    const LabeledOperator& tbar_i = compiled.intermediate.outcomes()[i].op;
    c.link_value = link_product(tbar_i, cv_pow).value().real();
    c.block_value = prob_via_blocks(tbar_i, base, r, n);
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(c.z));
    rep.block_gap = std::max(rep.block_gap, std::abs(c.block_value - c.link_value));
    rep.exact_gap = std::max(rep.exact_gap, std::abs(c.exact - c.link_value));
    rep.outcomes.push_back(std::move(c));
  }
  rep.bot_probability = link_product(compiled.bot(), c_pow).value().real();
  rep.pass = rep.max_abs_z <= kZScoreLimit && rep.block_gap <= kBlockIdentityTol &&
             rep.exact_gap <= kBlockIdentityTol && rep.validity_violation <= kCompilerPsdTol;
  return rep;
}

/// Copy of `compiled` with outcome `index` perturbed by `eps` at the
/// diagonal entry where C_E^{(x) n} is largest.
inline CompiledTester perturb_outcome(const CompiledTester& compiled, const QuantumChannel& ch, std::size_t index,
                                      double eps) {
  CompiledTester out = compiled;
  auto& outcomes = out.tester.outcomes();
  if (index >= outcomes.size()) throw InvalidArgument("perturb_outcome: index out of range");
  const Matrix c = choi_power(ch, compiled.tester.n()).matrix();
  Eigen::Index best = 0;
  c.diagonal().cwiseAbs().maxCoeff(&best);
  Matrix m = outcomes[index].op.matrix();
  m(best, best) += eps;
  outcomes[index].op = LabeledOperator(std::move(m), outcomes[index].op.systems());
  return out;
}

inline json_io::json to_json(const TheoremReport& rep) {
  json_io::json j;
  j["outcomes"] = json_io::json::object();
  for (const auto& c : rep.outcomes)
    j["outcomes"][c.label] = {{"exact", c.exact},           {"mc_mean", c.mc_mean},
                              {"mc_stderr", c.mc_stderr},   {"z", std::isfinite(c.z) ? json_io::json(c.z) : json_io::json("inf")},
                              {"block_value", c.block_value}, {"link_value", c.link_value}};
  j["bot_probability"] = rep.bot_probability;
  j["max_abs_z"] = rep.max_abs_z;
  j["block_gap"] = rep.block_gap;
  j["exact_gap"] = rep.exact_gap;
  j["validity_violation"] = rep.validity_violation;
  j["pass"] = rep.pass;
  return j;
}

}  // namespace qct
