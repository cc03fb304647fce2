#pragma once

// Labeled multi-system operators: tensor products, row-major
// vectorization, partial trace and transpose, and permutation operators.
//
// Conventions used everywhere in the library:
//  * The first system of a layout is the most significant tensor factor
//    (standard Kronecker ordering).
//  * vec() flattens row by row, so vec(|psi><phi|) = |psi> (x) |phi*> and
//    vec(X Y Z) = (X (x) Z^T) vec(Y).
//  * Operations that drop or permute systems keep the relative order of the
//    systems that remain.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "qct/error.hpp"
#include "qct/linalg.hpp"

namespace qct {

struct System {
  std::string label;
  std::size_t dim = 1;

  friend bool operator==(const System&, const System&) = default;
};

using Layout = std::vector<System>;

inline std::size_t total_dim(const Layout& layout) {
  std::size_t d = 1;
  for (const auto& s : layout) d *= s.dim;
  return d;
}

inline std::vector<std::string> labels_of(const Layout& layout) {
  std::vector<std::string> out;
  out.reserve(layout.size());
  for (const auto& s : layout) out.push_back(s.label);
  return out;
}

/// Index of `label` in `layout`, or layout.size() when absent.
inline std::size_t position_of(const Layout& layout, const std::string& label) {
  for (std::size_t k = 0; k < layout.size(); ++k)
    if (layout[k].label == label) return k;
  return layout.size();
}

inline bool contains(const Layout& layout, const std::string& label) {
  return position_of(layout, label) < layout.size();
}

namespace detail {

inline void check_layout(const Layout& layout) {
  std::unordered_set<std::string> seen;
  for (const auto& s : layout) {
    if (s.dim == 0) throw DimensionError("system '" + s.label + "' has dimension 0");
    if (!seen.insert(s.label).second) throw LabelError("duplicate system label '" + s.label + "'");
  }
}

inline std::vector<std::size_t> strides(const Layout& layout) {
  std::vector<std::size_t> st(layout.size());
  std::size_t acc = 1;
  for (std::size_t k = layout.size(); k-- > 0;) {
    st[k] = acc;
    acc *= layout[k].dim;
  }
  return st;
}

/// Linear offsets (inside the full layout) of every joint index of the
/// systems at `positions`, enumerated with positions[0] most significant.
inline std::vector<std::size_t> offsets(const Layout& layout, const std::vector<std::size_t>& positions) {
  const auto st = strides(layout);
  std::vector<std::size_t> out{0};
  for (std::size_t p : positions) {
    std::vector<std::size_t> next;
    next.reserve(out.size() * layout[p].dim);
    for (std::size_t base : out)
      for (std::size_t i = 0; i < layout[p].dim; ++i) next.push_back(base + i * st[p]);
    out = std::move(next);
  }
  return out;
}

inline std::vector<std::size_t> positions_of(const Layout& layout, const std::vector<std::string>& labels) {
  std::vector<std::size_t> pos;
  pos.reserve(labels.size());
  for (const auto& l : labels) {
    const std::size_t p = position_of(layout, l);
    if (p == layout.size()) throw LabelError("unknown system label '" + l + "'");
    pos.push_back(p);
  }
  return pos;
}

inline std::vector<std::size_t> complement_positions(std::size_t size, const std::vector<std::size_t>& pos) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < size; ++k)
    if (std::find(pos.begin(), pos.end(), k) == pos.end()) out.push_back(k);
  return out;
}

inline Layout select(const Layout& layout, const std::vector<std::size_t>& pos) {
  Layout out;
  out.reserve(pos.size());
  for (std::size_t p : pos) out.push_back(layout[p]);
  return out;
}

}  // namespace detail

/// Dense complex matrix whose row and column spaces are tensor products of
/// labeled systems.
class LabeledOperator {
 public:
  LabeledOperator() : matrix_(Matrix::Identity(1, 1)) {}

  LabeledOperator(Matrix matrix, Layout systems) : LabeledOperator(std::move(matrix), systems, systems) {}

  LabeledOperator(Matrix matrix, Layout rows, Layout cols)
      : matrix_(std::move(matrix)), rows_(std::move(rows)), cols_(std::move(cols)) {
    detail::check_layout(rows_);
    detail::check_layout(cols_);
    if (static_cast<std::size_t>(matrix_.rows()) != total_dim(rows_) ||
        static_cast<std::size_t>(matrix_.cols()) != total_dim(cols_))
      throw DimensionError("matrix shape " + std::to_string(matrix_.rows()) + "x" + std::to_string(matrix_.cols()) +
                           " does not match system dimensions " + std::to_string(total_dim(rows_)) + "x" +
                           std::to_string(total_dim(cols_)));
  }

  static LabeledOperator identity(const Layout& systems) {
    const auto d = static_cast<Eigen::Index>(total_dim(systems));
    return {Matrix::Identity(d, d), systems};
  }

  static LabeledOperator scalar(cplx value) { return {Matrix::Constant(1, 1, value), Layout{}}; }

  const Matrix& matrix() const { return matrix_; }
  Matrix& matrix() { return matrix_; }
  const Layout& rows() const { return rows_; }
  const Layout& cols() const { return cols_; }
  /// Row layout; the layout of a square operator.
  const Layout& systems() const { return rows_; }
  bool square() const { return rows_ == cols_; }
  bool has(const std::string& label) const { return contains(rows_, label) || contains(cols_, label); }
  std::vector<std::string> labels() const { return labels_of(rows_); }

  /// The single entry of an operator on no systems.
  cplx value() const {
    if (matrix_.size() != 1) throw DimensionError("value() requires a 1x1 operator");
    return matrix_(0, 0);
  }

 private:
  Matrix matrix_;
  Layout rows_;
  Layout cols_;
};

/// Tensor product; systems of `a` come first.
inline LabeledOperator kron(const LabeledOperator& a, const LabeledOperator& b) {
  Layout rows = a.rows();
  rows.insert(rows.end(), b.rows().begin(), b.rows().end());
  Layout cols = a.cols();
  cols.insert(cols.end(), b.cols().begin(), b.cols().end());
  for (const auto& s : b.rows())
    if (contains(a.rows(), s.label)) throw LabelError("kron: label '" + s.label + "' appears in both operands");
  for (const auto& s : b.cols())
    if (contains(a.cols(), s.label)) throw LabelError("kron: label '" + s.label + "' appears in both operands");
  return {kron(a.matrix(), b.matrix()), std::move(rows), std::move(cols)};
}

/// Row-major flattening: entry (i, j) of an r x c matrix lands at i*c + j.
inline Vector vec_flatten(const Matrix& x) {
  Vector v(x.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) v(i * x.cols() + j) = x(i, j);
  return v;
}

inline Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 0 || cols < 0 || v.size() != rows * cols)
    throw DimensionError("unvec: vector of length " + std::to_string(v.size()) + " cannot be reshaped to " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  Matrix x(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = v(i * cols + j);
  return x;
}

/// Traces out the systems named in `labels`. Each must appear in both the
/// row and column layout with equal dimension.
inline LabeledOperator partial_trace(const LabeledOperator& x, const std::vector<std::string>& labels) {
  const auto row_tr = detail::positions_of(x.rows(), labels);
  const auto col_tr = detail::positions_of(x.cols(), labels);
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (x.rows()[row_tr[k]].dim != x.cols()[col_tr[k]].dim)
      throw DimensionError("partial_trace: system '" + labels[k] + "' is not square");
  const auto row_keep = detail::complement_positions(x.rows().size(), row_tr);
  const auto col_keep = detail::complement_positions(x.cols().size(), col_tr);
  const auto rk = detail::offsets(x.rows(), row_keep);
  const auto ck = detail::offsets(x.cols(), col_keep);
  const auto rt = detail::offsets(x.rows(), row_tr);
  const auto ct = detail::offsets(x.cols(), col_tr);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rk.size()), static_cast<Eigen::Index>(ck.size()));
  const Matrix& m = x.matrix();
  for (std::size_t i = 0; i < rk.size(); ++i)
    for (std::size_t j = 0; j < ck.size(); ++j) {
      cplx acc = 0.0;
      for (std::size_t t = 0; t < rt.size(); ++t)
        acc += m(static_cast<Eigen::Index>(rk[i] + rt[t]), static_cast<Eigen::Index>(ck[j] + ct[t]));
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
  return {std::move(out), detail::select(x.rows(), row_keep), detail::select(x.cols(), col_keep)};
}

/// Transposes the systems named in `labels`, which must appear on both
/// sides with equal dimension. An involution; transposing every system
/// is the ordinary matrix transpose.
inline LabeledOperator partial_transpose(const LabeledOperator& x, const std::vector<std::string>& labels) {
  const auto row_t = detail::positions_of(x.rows(), labels);
  const auto col_t = detail::positions_of(x.cols(), labels);
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (x.rows()[row_t[k]].dim != x.cols()[col_t[k]].dim)
      throw DimensionError("partial_transpose: system '" + labels[k] + "' is not square");
  const auto ru = detail::offsets(x.rows(), detail::complement_positions(x.rows().size(), row_t));
  const auto cu = detail::offsets(x.cols(), detail::complement_positions(x.cols().size(), col_t));
  const auto rt = detail::offsets(x.rows(), row_t);
  const auto ct = detail::offsets(x.cols(), col_t);
  const Matrix& m = x.matrix();
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < ru.size(); ++i)
    for (std::size_t j = 0; j < cu.size(); ++j)
      for (std::size_t a = 0; a < rt.size(); ++a)
        for (std::size_t b = 0; b < ct.size(); ++b)
          out(static_cast<Eigen::Index>(ru[i] + rt[b]), static_cast<Eigen::Index>(cu[j] + ct[a])) =
              m(static_cast<Eigen::Index>(ru[i] + rt[a]), static_cast<Eigen::Index>(cu[j] + ct[b]));
  return {std::move(out), x.rows(), x.cols()};
}

/// Full transpose of a square-layout operator (all systems).
inline LabeledOperator transpose(const LabeledOperator& x) {
  return {x.matrix().transpose(), x.cols(), x.rows()};
}

/// Reorders the systems of a square-layout operator to `order`, which must
/// be a permutation of its labels.
inline LabeledOperator reorder(const LabeledOperator& x, const std::vector<std::string>& order) {
  if (!x.square()) throw LabelError("reorder: operator must have identical row and column layouts");
  if (order.size() != x.rows().size()) throw LabelError("reorder: label list is not a permutation of the systems");
  const auto pos = detail::positions_of(x.rows(), order);
  const auto idx = detail::offsets(x.rows(), pos);
  const Matrix& m = x.matrix();
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(static_cast<Eigen::Index>(idx[i]), static_cast<Eigen::Index>(idx[j]));
  return {std::move(out), detail::select(x.rows(), pos)};
}

/// Reorders the tensor factors of a vector living on `layout`.
inline Vector reorder(const Vector& v, const Layout& layout, const std::vector<std::string>& order) {
  if (static_cast<std::size_t>(v.size()) != total_dim(layout)) throw DimensionError("reorder: vector size mismatch");
  if (order.size() != layout.size()) throw LabelError("reorder: label list is not a permutation of the systems");
  const auto idx = detail::offsets(layout, detail::positions_of(layout, order));
  Vector out(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(idx[i]));
  return out;
}

/// Index map for repeated reordering: result[i] = source index of entry i.
inline std::vector<std::size_t> reorder_map(const Layout& layout, const std::vector<std::string>& order) {
  if (order.size() != layout.size()) throw LabelError("reorder_map: label list is not a permutation of the systems");
  return detail::offsets(layout, detail::positions_of(layout, order));
}

/// Tensors `x` with the identity on the systems of `target` it lacks, then
/// orders the systems as in `target`.
inline LabeledOperator extend(const LabeledOperator& x, const Layout& target) {
  if (!x.square()) throw LabelError("extend: operator must have identical row and column layouts");
  Layout missing;
  for (const auto& s : target) {
    const std::size_t p = position_of(x.rows(), s.label);
    if (p == x.rows().size())
      missing.push_back(s);
    else if (x.rows()[p].dim != s.dim)
      throw DimensionError("extend: system '" + s.label + "' has mismatched dimension");
  }
  if (x.rows().size() + missing.size() != target.size())
    throw LabelError("extend: operator has systems not present in the target layout");
  LabeledOperator full = missing.empty() ? x : kron(x, LabeledOperator::identity(missing));
  return reorder(full, labels_of(target));
}

/// Renames one system; data untouched.
inline LabeledOperator relabel(const LabeledOperator& x, const std::string& from, const std::string& to) {
  auto rename = [&](Layout l) {
    for (auto& s : l)
      if (s.label == from) s.label = to;
    return l;
  };
  if (!x.has(from)) throw LabelError("relabel: unknown system label '" + from + "'");
  return {x.matrix(), rename(x.rows()), rename(x.cols())};
}

/// Replaces system `label` (dimension d1*d2*...) by the factors `parts`,
/// first part most significant. Data untouched.
inline LabeledOperator split_system(const LabeledOperator& x, const std::string& label, const Layout& parts) {
  auto split = [&](const Layout& l) {
    Layout out;
    bool found = false;
    for (const auto& s : l) {
      if (s.label != label) {
        out.push_back(s);
        continue;
      }
      if (total_dim(parts) != s.dim)
        throw DimensionError("split_system: parts do not multiply to the dimension of '" + label + "'");
      out.insert(out.end(), parts.begin(), parts.end());
      found = true;
    }
    if (!found) throw LabelError("split_system: unknown system label '" + label + "'");
    return out;
  };
  return {x.matrix(), split(x.rows()), split(x.cols())};
}

/// Merges adjacent systems `labels` (in that order) into one system named
/// `merged`. Inverse of split_system.
inline LabeledOperator merge_systems(const LabeledOperator& x, const std::vector<std::string>& labels,
                                     const std::string& merged) {
  auto merge = [&](const Layout& l) {
    const auto pos = detail::positions_of(l, labels);
    for (std::size_t k = 1; k < pos.size(); ++k)
      if (pos[k] != pos[0] + k) throw LabelError("merge_systems: systems are not adjacent and in order");
    Layout out;
    for (std::size_t k = 0; k < l.size(); ++k) {
      if (k == pos.front()) {
        std::size_t d = 1;
        for (std::size_t p : pos) d *= l[p].dim;
        out.push_back({merged, d});
      } else if (k > pos.front() && k <= pos.back()) {
        continue;
      } else {
        out.push_back(l[k]);
      }
    }
    return out;
  };
  return {x.matrix(), merge(x.rows()), merge(x.cols())};
}

/// Permutation of 0..n-1 given as image list: perm[i] = pi(i).
using Permutation = std::vector<std::size_t>;

inline bool is_permutation(const Permutation& perm) {
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t v : perm) {
    if (v >= perm.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

/// (pi o sigma)(i) = pi(sigma(i)).
inline Permutation compose(const Permutation& pi, const Permutation& sigma) {
  Permutation out(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) out[i] = pi[sigma[i]];
  return out;
}

inline Permutation inverse(const Permutation& pi) {
  Permutation out(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) out[pi[i]] = i;
  return out;
}

/// Computational-basis index of p(pi)|x_1 ... x_n>, where p(pi) moves the
/// factor in slot i to slot pi(i).
inline std::size_t permute_basis_index(std::size_t index, std::size_t n, std::size_t d, const Permutation& pi) {
  std::vector<std::size_t> digits(n);
  for (std::size_t k = n; k-- > 0;) {
    digits[k] = index % d;
    index /= d;
  }
  std::vector<std::size_t> moved(n);
  for (std::size_t i = 0; i < n; ++i) moved[pi[i]] = digits[i];
  std::size_t out = 0;
  for (std::size_t k = 0; k < n; ++k) out = out * d + moved[k];
  return out;
}

/// Permutation operator p(pi) on (C^d)^{(x) n}, with
/// p(pi)|psi_1>...|psi_n> = |psi_{pi^-1(1)}>...|psi_{pi^-1(n)}>.
/// Systems are labeled `prefix`1 ... `prefix`n.
inline LabeledOperator permutation_operator(std::size_t n, std::size_t d, const Permutation& pi,
                                            const std::string& prefix = "") {
  if (pi.size() != n || !is_permutation(pi)) throw InvalidArgument("permutation_operator: invalid permutation");
  std::size_t dim = 1;
  for (std::size_t k = 0; k < n; ++k) dim *= d;
  Matrix p = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t x = 0; x < dim; ++x)
    p(static_cast<Eigen::Index>(permute_basis_index(x, n, d, pi)), static_cast<Eigen::Index>(x)) = 1.0;
  Layout layout;
  for (std::size_t k = 0; k < n; ++k) layout.push_back({prefix + std::to_string(k + 1), d});
  return {std::move(p), std::move(layout)};
}

}  // namespace qct
