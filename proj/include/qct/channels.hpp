#pragma once

// Quantum channels in Kraus, Choi and Stinespring form.
//
// A dilation V of a channel with Kraus operators E_1..E_r is the isometry
// V = sum_i |i>_anc (x) E_i, with the ancilla as the leading output factor.

#include <cstddef>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "qct/error.hpp"
#include "qct/json_io.hpp"
#include "qct/linalg.hpp"
#include "qct/tensor.hpp"

namespace qct {

inline constexpr double kKrausCompletenessTol = 1e-10;
inline constexpr double kIsometryTol = 1e-10;
inline constexpr double kChoiRankTol = 1e-9;
inline constexpr double kChoiPsdTol = 1e-8;

class QuantumChannel {
 public:
  QuantumChannel(std::size_t d_in, std::size_t d_out, std::vector<Matrix> kraus)
      : d_in_(d_in), d_out_(d_out), kraus_(std::move(kraus)) {
    if (d_in_ == 0 || d_out_ == 0) throw InvalidArgument("channel dimensions must be positive");
    if (kraus_.empty()) throw InvalidArgument("channel needs at least one Kraus operator");
    Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(d_in_), static_cast<Eigen::Index>(d_in_));
    for (const auto& e : kraus_) {
      if (static_cast<std::size_t>(e.rows()) != d_out_ || static_cast<std::size_t>(e.cols()) != d_in_)
        throw DimensionError("Kraus operator has shape " + std::to_string(e.rows()) + "x" + std::to_string(e.cols()) +
                             ", expected " + std::to_string(d_out_) + "x" + std::to_string(d_in_));
      sum += e.adjoint() * e;
    }
    const double dev = (sum - Matrix::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff();
    if (dev > kKrausCompletenessTol)
      throw InvalidArgument("Kraus operators are not trace preserving (deviation " + std::to_string(dev) + ")");
  }

  std::size_t d_in() const { return d_in_; }
  std::size_t d_out() const { return d_out_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }
  std::size_t kraus_count() const { return kraus_.size(); }

 private:
  std::size_t d_in_;
  std::size_t d_out_;
  std::vector<Matrix> kraus_;
};

/// Matrix V with V^† V = I.
class Isometry {
 public:
  explicit Isometry(Matrix v) : v_(std::move(v)) {
    if (v_.rows() < v_.cols()) throw InvalidArgument("isometry must have at least as many rows as columns");
    const double dev = (v_.adjoint() * v_ - Matrix::Identity(v_.cols(), v_.cols())).cwiseAbs().maxCoeff();
    if (dev > kIsometryTol) throw InvalidArgument("matrix is not an isometry (deviation " + std::to_string(dev) + ")");
  }

  const Matrix& matrix() const { return v_; }
  std::size_t d_in() const { return static_cast<std::size_t>(v_.cols()); }
  std::size_t d_out() const { return static_cast<std::size_t>(v_.rows()); }

 private:
  Matrix v_;
};

inline QuantumChannel identity_channel(std::size_t d) {
  return {d, d, {Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))}};
}

inline QuantumChannel isometry_channel(const Isometry& v) { return {v.d_in(), v.d_out(), {v.matrix()}}; }

/// Choi operator C = sum_i vec(E_i) vec(E_i)^† on systems (out, in).
inline LabeledOperator choi(const QuantumChannel& ch, const std::string& out_label = "out",
                            const std::string& in_label = "in") {
  const auto d = static_cast<Eigen::Index>(ch.d_in() * ch.d_out());
  Matrix c = Matrix::Zero(d, d);
  for (const auto& e : ch.kraus()) {
    const Vector v = vec_flatten(e);
    c += v * v.adjoint();
  }
  return {std::move(c), Layout{{out_label, ch.d_out()}, {in_label, ch.d_in()}}};
}

/// Orthogonal Kraus operators from a Choi operator on (out, in), largest
/// eigenvalue first. Eigenvalues at or below 1e-9 are dropped.
inline QuantumChannel kraus_from_choi(const LabeledOperator& c) {
  if (!c.square() || c.systems().size() != 2) throw InvalidArgument("Choi operator must live on (out, in)");
  const std::size_t d_out = c.systems()[0].dim;
  const std::size_t d_in = c.systems()[1].dim;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(c.matrix()));
  const RealVector& ev = es.eigenvalues();
  if (ev(0) < -kChoiPsdTol)
    throw InvalidArgument("Choi operator is not positive semidefinite (min eigenvalue " + std::to_string(ev(0)) + ")");
  std::vector<Matrix> kraus;
  for (Eigen::Index k = ev.size(); k-- > 0;) {
    if (ev(k) <= kChoiRankTol) break;
    kraus.push_back(std::sqrt(ev(k)) *
                    unvec(es.eigenvectors().col(k), static_cast<Eigen::Index>(d_out), static_cast<Eigen::Index>(d_in)));
  }
  if (kraus.empty()) throw InvalidArgument("Choi operator is zero");
  return {d_in, d_out, std::move(kraus)};
}

/// Rank of the Choi operator.
inline std::size_t kraus_rank(const QuantumChannel& ch) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(choi(ch).matrix(), Eigen::EigenvaluesOnly);
  std::size_t rank = 0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    if (es.eigenvalues()(k) > kChoiRankTol) ++rank;
  return rank;
}

/// Stacks Kraus blocks into V = sum_i |i>_anc (x) E_i, zero-padding the
/// ancilla to dimension `anc_dim` (0 means the Kraus count).
inline Isometry stinespring_dilate(const QuantumChannel& ch, std::size_t anc_dim = 0) {
  if (anc_dim == 0) anc_dim = ch.kraus_count();
  if (anc_dim < ch.kraus_count())
    throw InvalidArgument("ancilla dimension " + std::to_string(anc_dim) + " is smaller than the Kraus count " +
                          std::to_string(ch.kraus_count()));
  const auto d_out = static_cast<Eigen::Index>(ch.d_out());
  Matrix v = Matrix::Zero(static_cast<Eigen::Index>(anc_dim) * d_out, static_cast<Eigen::Index>(ch.d_in()));
  for (std::size_t i = 0; i < ch.kraus_count(); ++i)
    v.middleRows(static_cast<Eigen::Index>(i) * d_out, d_out) = ch.kraus()[i];
  return Isometry(std::move(v));
}

/// rho -> tr_anc(V rho V^†) with the ancilla (dimension `anc_dim`) leading.
inline QuantumChannel contract(const Isometry& v, std::size_t anc_dim) {
  if (anc_dim == 0 || v.d_out() % anc_dim != 0)
    throw DimensionError("contract: output dimension " + std::to_string(v.d_out()) + " is not divisible by " +
                         std::to_string(anc_dim));
  const auto d_out = static_cast<Eigen::Index>(v.d_out() / anc_dim);
  std::vector<Matrix> kraus;
  kraus.reserve(anc_dim);
  for (std::size_t i = 0; i < anc_dim; ++i)
    kraus.emplace_back(v.matrix().middleRows(static_cast<Eigen::Index>(i) * d_out, d_out));
  return {v.d_in(), static_cast<std::size_t>(d_out), std::move(kraus)};
}

/// Kraus list of at most `r` operators describing the same channel.
inline QuantumChannel compress_kraus(const QuantumChannel& ch, std::size_t r) {
  if (ch.kraus_count() <= r) return ch;
  QuantumChannel orth = kraus_from_choi(choi(ch));
  if (orth.kraus_count() > r)
    throw InvalidArgument("channel has Kraus rank " + std::to_string(orth.kraus_count()) + " > " + std::to_string(r));
  return orth;
}

/// (U (x) I_{d_out}) V_base for Haar-random U on the leading ancilla factor
/// of dimension r.
inline Isometry redilate(const Isometry& base, std::size_t r, Rng& rng) {
  if (r == 0 || base.d_out() % r != 0) throw DimensionError("redilate: ancilla dimension does not divide the output");
  const Eigen::Index d_out = static_cast<Eigen::Index>(base.d_out() / r);
  const Matrix u = haar_unitary(static_cast<Eigen::Index>(r), rng);
  const Matrix& v = base.matrix();
  Matrix w = Matrix::Zero(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(r); ++i)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(r); ++j)
      w.middleRows(i * d_out, d_out) += u(i, j) * v.middleRows(j * d_out, d_out);
  return Isometry(std::move(w));
}

/// Haar sample from the dilations of `ch` with an r-dimensional ancilla.
inline Isometry sample_random_dilation(const QuantumChannel& ch, std::size_t r, Rng& rng) {
  return redilate(stinespring_dilate(compress_kraus(ch, r), r), r, rng);
}

inline Matrix apply(const QuantumChannel& ch, const Matrix& rho) {
  if (static_cast<std::size_t>(rho.rows()) != ch.d_in() || rho.rows() != rho.cols())
    throw DimensionError("apply: state dimension does not match channel input");
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(ch.d_out()), static_cast<Eigen::Index>(ch.d_out()));
  for (const auto& e : ch.kraus()) out += e * rho * e.adjoint();
  return out;
}

/// First d_in columns of a Haar unitary on C^{d_out}.
inline Isometry random_isometry(std::size_t d_in, std::size_t d_out, Rng& rng) {
  if (d_in > d_out) throw InvalidArgument("random_isometry: d_in must not exceed d_out");
  return Isometry(haar_unitary(static_cast<Eigen::Index>(d_out), rng).leftCols(static_cast<Eigen::Index>(d_in)));
}

/// Contraction of a Haar isometry C^{d_in} -> C^r (x) C^{d_out}.
inline QuantumChannel random_channel(std::size_t d_in, std::size_t d_out, std::size_t r, Rng& rng) {
  return contract(random_isometry(d_in, r * d_out, rng), r);
}

// ---------------------------------------------------------------------------
// JSON: {"d_in": int, "d_out": int, "kraus": [matrix, ...]}

inline json_io::json to_json(const QuantumChannel& ch) {
  json_io::json j;
  j["d_in"] = ch.d_in();
  j["d_out"] = ch.d_out();
  j["kraus"] = json_io::json::array();
  for (const auto& e : ch.kraus()) j["kraus"].push_back(json_io::encode(e));
  return j;
}

inline QuantumChannel channel_from_json(const json_io::json& j) {
  try {
    std::vector<Matrix> kraus;
    for (const auto& m : j.at("kraus")) kraus.push_back(json_io::decode_matrix(m));
    return {j.at("d_in").get<std::size_t>(), j.at("d_out").get<std::size_t>(), std::move(kraus)};
  } catch (const json_io::json::exception& e) {
    throw InvalidArgument(std::string("malformed channel JSON: ") + e.what());
  }
}

inline void write_channel(const QuantumChannel& ch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  out << to_json(ch).dump(2) << '\n';
}

inline QuantumChannel read_channel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open channel file '" + path + "'");
  json_io::json j;
  try {
    j = json_io::json::parse(in);
  } catch (const json_io::json::exception& e) {
    throw InvalidArgument("channel file '" + path + "' is not valid JSON: " + e.what());
  }
  return channel_from_json(j);
}

}  // namespace qct
