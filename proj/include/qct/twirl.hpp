#pragma once

// Haar twirl X -> E_U[(U^{(x) n}) X (U^{(x) n})^†] over n ancilla registers
// of dimension r, exactly (Schur blocks) and by Monte-Carlo sampling.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "qct/error.hpp"
#include "qct/linalg.hpp"
#include "qct/random.hpp"
#include "qct/schur_weyl.hpp"
#include "qct/tensor.hpp"

namespace qct {

namespace detail {

struct TwirlFrame {
  std::vector<std::string> original;
  std::vector<std::string> order;  // other systems first, then the ancillas
  Eigen::Index outer = 1;
  Eigen::Index inner = 1;
};

inline TwirlFrame twirl_frame(const LabeledOperator& x, const std::vector<std::string>& anc_labels, std::size_t r) {
  if (!x.square()) throw LabelError("twirl: operator must have identical row and column layouts");
  TwirlFrame f;
  f.original = x.labels();
  for (const auto& s : x.systems()) {
    bool is_anc = false;
    for (const auto& a : anc_labels) is_anc = is_anc || a == s.label;
    if (!is_anc) {
      f.order.push_back(s.label);
      f.outer *= static_cast<Eigen::Index>(s.dim);
    }
  }
  for (const auto& a : anc_labels) {
    const std::size_t p = position_of(x.systems(), a);
    if (p == x.systems().size()) throw LabelError("twirl: unknown ancilla label '" + a + "'");
    if (x.systems()[p].dim != r)
      throw DimensionError("twirl: ancilla '" + a + "' has dimension " + std::to_string(x.systems()[p].dim) +
                           ", expected " + std::to_string(r));
    f.order.push_back(a);
    f.inner *= static_cast<Eigen::Index>(r);
  }
  return f;
}

/// Schur's lemma on one ancilla block given in Schur coordinates: cross
/// blocks vanish and each lambda block becomes X_P (x) I_Q / dim Q with
/// X_P = tr_Q of the block.
inline Matrix schur_average(const Matrix& z, const SchurTransform& st) {
  Matrix out = Matrix::Zero(z.rows(), z.cols());
  for (const auto& b : st.layout) {
    for (std::size_t t = 0; t < b.dim_p; ++t)
      for (std::size_t u = 0; u < b.dim_p; ++u) {
        cplx acc = 0.0;
        for (std::size_t m = 0; m < b.dim_q; ++m)
          acc += z(static_cast<Eigen::Index>(b.index(t, m)), static_cast<Eigen::Index>(b.index(u, m)));
        acc /= static_cast<double>(b.dim_q);
        for (std::size_t m = 0; m < b.dim_q; ++m)
          out(static_cast<Eigen::Index>(b.index(t, m)), static_cast<Eigen::Index>(b.index(u, m))) = acc;
      }
  }
  return out;
}

}  // namespace detail

/// Exact twirl of `x` over the ancilla systems `anc_labels` (each of
/// dimension r, n of them) using the Schur transform `st` = (n, r). The
/// result has the systems of `x` in the original order.
inline LabeledOperator exact_twirl(const LabeledOperator& x, const std::vector<std::string>& anc_labels, std::size_t r,
                                   std::size_t n, const SchurTransform& st) {
  if (anc_labels.size() != n) throw InvalidArgument("exact_twirl: expected " + std::to_string(n) + " ancilla labels");
  if (st.n != n || st.d != r) throw DimensionError("exact_twirl: Schur transform does not match (n, r)");
  const auto f = detail::twirl_frame(x, anc_labels, r);
  const LabeledOperator y = reorder(x, f.order);
  const Matrix& s = st.unitary;
  Matrix out(y.matrix().rows(), y.matrix().cols());
  for (Eigen::Index i = 0; i < f.outer; ++i)
    for (Eigen::Index j = 0; j < f.outer; ++j) {
      const Matrix z = s.adjoint() * y.matrix().block(i * f.inner, j * f.inner, f.inner, f.inner) * s;
      out.block(i * f.inner, j * f.inner, f.inner, f.inner) = s * detail::schur_average(z, st) * s.adjoint();
    }
  return reorder(LabeledOperator(std::move(out), y.systems()), f.original);
}

inline LabeledOperator exact_twirl(const LabeledOperator& x, const std::vector<std::string>& anc_labels, std::size_t r,
                                   std::size_t n) {
  return exact_twirl(x, anc_labels, r, n, cached_schur_transform(n, r));
}

struct TwirlEstimate {
  LabeledOperator mean;
  /// Entrywise standard error of the mean, sqrt(E|X - mean|^2 / samples).
  RealMatrix std_error;
};

/// Monte-Carlo twirl with `samples` Haar unitaries drawn from `rng`.
inline TwirlEstimate mc_twirl(const LabeledOperator& x, const std::vector<std::string>& anc_labels, std::size_t r,
                              std::size_t n, std::size_t samples, Rng& rng) {
  if (anc_labels.size() != n) throw InvalidArgument("mc_twirl: expected " + std::to_string(n) + " ancilla labels");
  if (samples < 2) throw InvalidArgument("mc_twirl: need at least two samples");
  const auto f = detail::twirl_frame(x, anc_labels, r);
  const LabeledOperator y = reorder(x, f.order);
  const Eigen::Index dim = y.matrix().rows();
  Matrix sum = Matrix::Zero(dim, dim);
  RealMatrix sum_sq = RealMatrix::Zero(dim, dim);
  Matrix conj(dim, dim);
  for (std::size_t k = 0; k < samples; ++k) {
    const Matrix u = kron_power(haar_unitary(static_cast<Eigen::Index>(r), rng), n);
    for (Eigen::Index i = 0; i < f.outer; ++i)
      for (Eigen::Index j = 0; j < f.outer; ++j)
        conj.block(i * f.inner, j * f.inner, f.inner, f.inner) =
            u * y.matrix().block(i * f.inner, j * f.inner, f.inner, f.inner) * u.adjoint();
    sum += conj;
    sum_sq += conj.cwiseAbs2();
  }
  const double ns = static_cast<double>(samples);
  const Matrix mean = sum / ns;
  const RealMatrix var = ((sum_sq / ns - mean.cwiseAbs2()) * (ns / (ns - 1.0))).cwiseMax(0.0);
  TwirlEstimate out{reorder(LabeledOperator(mean, y.systems()), f.original), RealMatrix()};
  // standard errors follow the same index permutation as the mean
  const auto idx = reorder_map(y.systems(), f.original);
  out.std_error.resize(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      out.std_error(i, j) = std::sqrt(var(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                                        static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)])) /
                                    ns);
  return out;
}

}  // namespace qct
