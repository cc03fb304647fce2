#pragma once

// Link product and parallel testers.
//
// A parallel tester on n queries is a family {T_i} of PSD operators on the
// systems A1..An (query inputs) followed by B1..Bn (query outputs) with
// sum_i T_i = rho_A (x) I_B. Applied to a channel E it yields outcome i with
// probability T_i * C_E^{(x) n}, where * is the link product.

#include <cstddef>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "qct/channels.hpp"
#include "qct/error.hpp"
#include "qct/json_io.hpp"
#include "qct/linalg.hpp"
#include "qct/tensor.hpp"

namespace qct {

inline constexpr double kTesterTol = 1e-9;
inline constexpr double kPinvCutoff = 1e-10;
/// Outcome label reserved for the completion operator of compiled testers.
inline const std::string kBotLabel = "BOT";

inline std::string a_label(std::size_t j) { return "A" + std::to_string(j); }
inline std::string b_label(std::size_t j) { return "B" + std::to_string(j); }
inline std::string anc_label(std::size_t j) { return "anc" + std::to_string(j); }
inline std::string ref_label(std::size_t j) { return "R" + std::to_string(j); }

inline Layout query_layout(const std::string& prefix, std::size_t n, std::size_t d) {
  Layout l;
  for (std::size_t j = 1; j <= n; ++j) l.push_back({prefix + std::to_string(j), d});
  return l;
}

inline Layout concat(Layout a, const Layout& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

/// X * Y = tr_shared(X^{T_shared} Y), both operators extended by identities
/// to the union of their systems (x's systems first).
inline LabeledOperator link_product(const LabeledOperator& x, const LabeledOperator& y) {
  if (!x.square() || !y.square()) throw LabelError("link_product: operands must have identical row/column layouts");
  Layout joint = x.systems();
  std::vector<std::string> shared;
  for (const auto& s : y.systems()) {
    const std::size_t p = position_of(x.systems(), s.label);
    if (p == x.systems().size()) {
      joint.push_back(s);
    } else {
      if (x.systems()[p].dim != s.dim)
        throw DimensionError("link_product: system '" + s.label + "' has mismatched dimension");
      shared.push_back(s.label);
    }
  }
  const LabeledOperator xt = partial_transpose(extend(x, joint), shared);
  const LabeledOperator ye = extend(y, joint);
  return partial_trace(LabeledOperator(xt.matrix() * ye.matrix(), joint), shared);
}

struct Outcome {
  std::string label;
  LabeledOperator op;
};

/// Choi operator of n parallel uses of `ch`, on A1..An B1..Bn.
inline LabeledOperator choi_power(const QuantumChannel& ch, std::size_t n) {
  LabeledOperator acc = LabeledOperator::scalar(1.0);
  for (std::size_t j = 1; j <= n; ++j) acc = kron(acc, choi(ch, b_label(j), a_label(j)));
  std::vector<std::string> order;
  for (std::size_t j = 1; j <= n; ++j) order.push_back(a_label(j));
  for (std::size_t j = 1; j <= n; ++j) order.push_back(b_label(j));
  return reorder(acc, order);
}

class ParallelTester {
 public:
  ParallelTester(std::size_t n, std::size_t d_a, std::size_t d_b, std::vector<Outcome> outcomes, Matrix rho_a)
      : n_(n), d_a_(d_a), d_b_(d_b), outcomes_(std::move(outcomes)), rho_a_(std::move(rho_a), query_layout("A", n, d_a)) {
    if (n_ == 0 || d_a_ == 0 || d_b_ == 0) throw InvalidArgument("tester dimensions must be positive");
    if (outcomes_.empty()) throw InvalidArgument("tester needs at least one outcome");
    for (const auto& o : outcomes_)
      if (o.op.systems() != layout() || !o.op.square())
        throw LabelError("tester outcome '" + o.label + "' is not on systems A1..An B1..Bn");
  }

  std::size_t n() const { return n_; }
  std::size_t d_a() const { return d_a_; }
  std::size_t d_b() const { return d_b_; }
  const std::vector<Outcome>& outcomes() const { return outcomes_; }
  std::vector<Outcome>& outcomes() { return outcomes_; }
  const LabeledOperator& rho_a() const { return rho_a_; }
  Layout layout() const { return concat(query_layout("A", n_, d_a_), query_layout("B", n_, d_b_)); }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& o : outcomes_) out.push_back(o.label);
    return out;
  }

  /// Largest violation of {T_i PSD, sum T_i = rho_A (x) I_B, tr rho_A = 1}.
  /// Zero (or negative) means every invariant holds exactly.
  double invariant_violation() const {
    double worst = 0.0;
    Matrix sum = Matrix::Zero(outcomes_.front().op.matrix().rows(), outcomes_.front().op.matrix().cols());
    for (const auto& o : outcomes_) {
      worst = std::max(worst, -min_eigenvalue(o.op.matrix()));
      sum += o.op.matrix();
    }
    const Matrix target = kron(rho_a_.matrix(), Matrix::Identity(static_cast<Eigen::Index>(b_dim()),
                                                                 static_cast<Eigen::Index>(b_dim())));
    worst = std::max(worst, (sum - target).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(rho_a_.matrix().trace() - 1.0));
    worst = std::max(worst, -min_eigenvalue(rho_a_.matrix()));
    return worst;
  }

  void validate(double tol = kTesterTol) const {
    const double v = invariant_violation();
    if (v > tol) throw InvalidArgument("parallel tester invariants violated by " + std::to_string(v));
  }

  std::size_t a_dim() const { return total_dim(query_layout("A", n_, d_a_)); }
  std::size_t b_dim() const { return total_dim(query_layout("B", n_, d_b_)); }

 private:
  std::size_t n_;
  std::size_t d_a_;
  std::size_t d_b_;
  std::vector<Outcome> outcomes_;
  LabeledOperator rho_a_;
};

/// p_i = T_i * C^{(x) n} = tr(T_i^T C^{(x) n}).
inline std::vector<double> outcome_distribution(const ParallelTester& t, const QuantumChannel& ch) {
  if (ch.d_in() != t.d_a() || ch.d_out() != t.d_b())
    throw DimensionError("outcome_distribution: channel dimensions do not match the tester");
  const LabeledOperator c = choi_power(ch, t.n());
  std::vector<double> p;
  double total = 0.0;
  for (const auto& o : t.outcomes()) {
    const cplx v = link_product(o.op, c).value();
    if (std::abs(v.imag()) > kTesterTol || v.real() < -kTesterTol)
      throw ConstructionFault("outcome '" + o.label + "' has non-physical probability");
    p.push_back(v.real());
    total += v.real();
  }
  if (std::abs(total - 1.0) > kTesterTol) throw ConstructionFault("outcome probabilities do not sum to one");
  return p;
}

/// Physical protocol for a tester: an input state on R1..Rn A1..An, where
/// the A registers are fed to the channel and R1..Rn are kept, and a POVM on
/// R1..Rn B1..Bn.
struct RealizedAlgorithm {
  std::size_t n = 0;
  std::size_t d_a = 0;
  std::size_t d_b = 0;
  Vector input;
  Layout input_layout;
  std::vector<Outcome> povm;
};

/// Input (sqrt(rho_A)^T (x) I)|I>> and POVM
/// (sqrt(rho_A)^T (x) I_B)^+ T_i^T (sqrt(rho_A)^T (x) I_B)^+ (A relabeled R).
inline RealizedAlgorithm realize(const ParallelTester& t) {
  const std::size_t n = t.n();
  const Matrix sqrt_rho_t = psd_sqrt(t.rho_a().matrix()).transpose();
  const auto da = static_cast<Eigen::Index>(t.a_dim());
  const auto db = static_cast<Eigen::Index>(t.b_dim());

  RealizedAlgorithm out;
  out.n = n;
  out.d_a = t.d_a();
  out.d_b = t.d_b();
  out.input_layout = concat(query_layout("R", n, t.d_a()), query_layout("A", n, t.d_a()));
  out.input = kron(sqrt_rho_t, Matrix::Identity(da, da)) * vec_flatten(Matrix::Identity(da, da));

  const Matrix pinv = kron(hermitian_pinv(sqrt_rho_t, kPinvCutoff), Matrix::Identity(db, db));
  const Layout povm_layout = concat(query_layout("R", n, t.d_a()), query_layout("B", n, t.d_b()));
  for (const auto& o : t.outcomes()) {
    Matrix m = pinv * o.op.matrix().transpose() * pinv;
    out.povm.push_back({o.label, LabeledOperator(hermitian_part(m), povm_layout)});
  }
  return out;
}

/// Applies `ch` to each A register of the input state (Kraus form) and
/// returns the POVM statistics. A direct density-matrix simulation.
inline std::vector<double> run_algorithm(const RealizedAlgorithm& alg, const QuantumChannel& ch) {
  if (ch.d_in() != alg.d_a || ch.d_out() != alg.d_b) throw DimensionError("run_algorithm: channel dimensions mismatch");
  const std::size_t n = alg.n;
  const auto dr = static_cast<Eigen::Index>(total_dim(query_layout("R", n, alg.d_a)));
  const std::size_t k = ch.kraus_count();
  std::size_t combos = 1;
  for (std::size_t j = 0; j < n; ++j) combos *= k;
  const Matrix rho_in = alg.input * alg.input.adjoint();
  Matrix out = Matrix::Zero(dr * static_cast<Eigen::Index>(total_dim(query_layout("B", n, alg.d_b))),
                            dr * static_cast<Eigen::Index>(total_dim(query_layout("B", n, alg.d_b))));
  for (std::size_t c = 0; c < combos; ++c) {
    Matrix op = Matrix::Identity(dr, dr);
    std::size_t code = c;
    std::vector<std::size_t> pick(n);
    for (std::size_t j = n; j-- > 0;) {
      pick[j] = code % k;
      code /= k;
    }
    for (std::size_t j = 0; j < n; ++j) op = kron(op, ch.kraus()[pick[j]]);
    out += op * rho_in * op.adjoint();
  }
  std::vector<double> p;
  for (const auto& m : alg.povm) p.push_back((m.op.matrix() * out).trace().real());
  return p;
}

/// Tester of the algorithm "prepare rho on A1..An (x) anc, query, measure
/// povm on B1..Bn (x) anc": T_i = E_i^T * rho.
inline ParallelTester from_algorithm(const LabeledOperator& rho, const std::vector<Outcome>& povm) {
  if (povm.empty()) throw InvalidArgument("from_algorithm: empty POVM");
  std::size_t n = 0;
  while (rho.has(a_label(n + 1))) ++n;
  if (n == 0) throw LabelError("from_algorithm: state has no A1 system");
  const std::size_t d_a = rho.systems()[position_of(rho.systems(), a_label(1))].dim;
  const Layout& pl = povm.front().op.systems();
  if (!contains(pl, b_label(1))) throw LabelError("from_algorithm: POVM has no B1 system");
  const std::size_t d_b = pl[position_of(pl, b_label(1))].dim;

  const Layout a_layout = query_layout("A", n, d_a);
  std::vector<std::string> anc;
  for (const auto& s : rho.systems())
    if (!contains(a_layout, s.label)) anc.push_back(s.label);
  const Layout target = concat(a_layout, query_layout("B", n, d_b));
  std::vector<Outcome> outcomes;
  for (const auto& e : povm) {
    const LabeledOperator t = link_product(partial_transpose(e.op, e.op.labels()), rho);
    outcomes.push_back({e.label, reorder(t, labels_of(target))});
  }
  const LabeledOperator rho_a = anc.empty() ? rho : partial_trace(rho, anc);
  std::vector<std::string> a_order;
  for (std::size_t j = 1; j <= n; ++j) a_order.push_back(a_label(j));
  return {n, d_a, d_b, std::move(outcomes), reorder(rho_a, a_order).matrix()};
}

/// Random tester: random rho_A and a random k-outcome POVM M_i on the whole
/// space, T_i = sqrt(rho_A (x) I) M_i sqrt(rho_A (x) I).
inline ParallelTester random_tester(std::size_t n, std::size_t d_a, std::size_t d_b, std::size_t k, Rng& rng) {
  if (k == 0) throw InvalidArgument("random_tester: need at least one outcome");
  const Layout a_layout = query_layout("A", n, d_a);
  const Layout layout = concat(a_layout, query_layout("B", n, d_b));
  const auto da = static_cast<Eigen::Index>(total_dim(a_layout));
  const auto dim = static_cast<Eigen::Index>(total_dim(layout));
  const Matrix rho = random_density(da, rng);
  const Matrix root = kron(psd_sqrt(rho), Matrix::Identity(dim / da, dim / da));

  std::vector<Matrix> g;
  Matrix s = Matrix::Zero(dim, dim);
  for (std::size_t i = 0; i < k; ++i) {
    const Matrix x = ginibre(dim, dim, rng);
    g.push_back(x.adjoint() * x);
    s += g.back();
  }
  const Matrix s_inv_root = psd_sqrt(hermitian_pinv(s, 1e-14));
  std::vector<Outcome> outcomes;
  for (std::size_t i = 0; i < k; ++i) {
    const Matrix m = s_inv_root * g[i] * s_inv_root;
    outcomes.push_back({std::to_string(i), LabeledOperator(hermitian_part(root * m * root), layout)});
  }
  return {n, d_a, d_b, std::move(outcomes), rho};
}

// ---------------------------------------------------------------------------
// JSON: {"n", "d_A", "d_B", "systems": [[label, dim], ...], "rho_A": matrix,
//        "outcomes": {label: matrix, ...}}

inline json_io::json to_json(const ParallelTester& t) {
  json_io::json j;
  j["n"] = t.n();
  j["d_A"] = t.d_a();
  j["d_B"] = t.d_b();
  j["systems"] = json_io::encode(t.layout());
  j["rho_A"] = json_io::encode(t.rho_a().matrix());
  j["outcomes"] = json_io::json::object();
  for (const auto& o : t.outcomes()) j["outcomes"][o.label] = json_io::encode(o.op.matrix());
  return j;
}

inline ParallelTester tester_from_json(const json_io::json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    const auto d_a = j.at("d_A").get<std::size_t>();
    const auto d_b = j.at("d_B").get<std::size_t>();
    const Layout layout = json_io::decode_layout(j.at("systems"));
    if (layout != concat(query_layout("A", n, d_a), query_layout("B", n, d_b)))
      throw InvalidArgument("tester system layout must be A1..An B1..Bn");
    std::vector<Outcome> outcomes;
    for (const auto& [label, m] : j.at("outcomes").items())
      outcomes.push_back({label, LabeledOperator(json_io::decode_matrix(m), layout)});
    return {n, d_a, d_b, std::move(outcomes), json_io::decode_matrix(j.at("rho_A"))};
  } catch (const json_io::json::exception& e) {
    throw InvalidArgument(std::string("malformed tester JSON: ") + e.what());
  }
}

inline void write_tester(const ParallelTester& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  out << to_json(t).dump(2) << '\n';
}

inline ParallelTester read_tester(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open tester file '" + path + "'");
  try {
    return tester_from_json(json_io::json::parse(in));
  } catch (const json_io::json::parse_error& e) {
    throw InvalidArgument("tester file '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace qct
