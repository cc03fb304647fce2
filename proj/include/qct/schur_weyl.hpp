#pragma once

// Young diagrams, standard tableaux, Young's orthogonal representation of
// S_n, and Schur transforms of (C^d)^{(x) n}.
//
// The Schur basis is built from matrix units of the Young orthogonal form,
// so the permutation register P_lambda of every transform carries exactly
// the Young-Yamanouchi basis, independently of d. Two transforms with
// different local dimension therefore agree on p_lambda(pi), which is what
// makes |I_{P_lambda}>> pairings between them meaningful.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qct/error.hpp"
#include "qct/linalg.hpp"
#include "qct/tensor.hpp"

namespace qct {

struct YoungDiagram {
  std::vector<std::size_t> parts;

  std::size_t n() const { return std::accumulate(parts.begin(), parts.end(), std::size_t{0}); }
  std::size_t rows() const { return parts.size(); }
  std::size_t row_length(std::size_t i) const { return i < parts.size() ? parts[i] : 0; }

  std::string str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? "," : "") << parts[i];
    os << ')';
    return os.str();
  }

  friend bool operator==(const YoungDiagram&, const YoungDiagram&) = default;
  friend auto operator<=>(const YoungDiagram&, const YoungDiagram&) = default;
};

/// All partitions of n with at most max_rows rows, lexicographically
/// descending: (n), (n-1,1), ...
inline std::vector<YoungDiagram> partitions(std::size_t n, std::size_t max_rows) {
  std::vector<YoungDiagram> out;
  std::vector<std::size_t> cur;
  auto rec = [&](auto&& self, std::size_t remaining, std::size_t max_part) -> void {
    if (remaining == 0) {
      out.push_back({cur});
      return;
    }
    if (cur.size() == max_rows) return;
    for (std::size_t p = std::min(remaining, max_part); p >= 1; --p) {
      cur.push_back(p);
      self(self, remaining - p, p);
      cur.pop_back();
    }
  };
  if (n == 0) return {YoungDiagram{}};
  rec(rec, n, n);
  return out;
}

/// Hook-length formula.
inline std::size_t dim_sym(const YoungDiagram& lambda) {
  const std::size_t n = lambda.n();
  double num = 1.0;
  for (std::size_t k = 2; k <= n; ++k) num *= static_cast<double>(k);
  double hooks = 1.0;
  for (std::size_t i = 0; i < lambda.rows(); ++i)
    for (std::size_t j = 0; j < lambda.parts[i]; ++j) {
      std::size_t below = 0;
      for (std::size_t r = i + 1; r < lambda.rows() && lambda.parts[r] > j; ++r) ++below;
      hooks *= static_cast<double>(lambda.parts[i] - j - 1 + below + 1);
    }
  return static_cast<std::size_t>(std::llround(num / hooks));
}

/// Weyl dimension formula: prod_{i<j<=d} (l_i - l_j + j - i) / (j - i).
inline std::size_t dim_unitary(const YoungDiagram& lambda, std::size_t d) {
  if (lambda.rows() > d) return 0;
  double num = 1.0;
  double den = 1.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      num *= static_cast<double>(lambda.row_length(i)) - static_cast<double>(lambda.row_length(j)) +
             static_cast<double>(j - i);
      den *= static_cast<double>(j - i);
    }
  return static_cast<std::size_t>(std::llround(num / den));
}

struct StandardTableau {
  YoungDiagram shape;
  std::vector<std::vector<std::size_t>> rows;  // entries 1..n

  std::vector<std::size_t> reading_word() const {
    std::vector<std::size_t> w;
    for (const auto& r : rows) w.insert(w.end(), r.begin(), r.end());
    return w;
  }

  /// (row, column) of entry v.
  std::pair<std::size_t, std::size_t> position(std::size_t v) const {
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows[i].size(); ++j)
        if (rows[i][j] == v) return {i, j};
    throw InvalidArgument("tableau does not contain " + std::to_string(v));
  }
};

/// Standard tableaux of shape lambda, ordered lexicographically by their
/// row-reading words.
inline std::vector<StandardTableau> standard_tableaux(const YoungDiagram& lambda) {
  const std::size_t n = lambda.n();
  std::vector<StandardTableau> out;
  StandardTableau cur{lambda, std::vector<std::vector<std::size_t>>(lambda.rows())};
  auto rec = [&](auto&& self, std::size_t v) -> void {
    if (v > n) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = 0; i < lambda.rows(); ++i) {
      const std::size_t len = cur.rows[i].size();
      if (len >= lambda.parts[i]) continue;
      if (i > 0 && cur.rows[i - 1].size() <= len) continue;
      cur.rows[i].push_back(v);
      self(self, v + 1);
      cur.rows[i].pop_back();
    }
  };
  rec(rec, 1);
  std::sort(out.begin(), out.end(),
            [](const StandardTableau& a, const StandardTableau& b) { return a.reading_word() < b.reading_word(); });
  return out;
}

/// Young's orthogonal form of the adjacent transposition (k, k+1), k in
/// 1..n-1, on the standard-tableau basis of lambda. With axial distance
/// a = c(k+1) - c(k) (content c = column - row):
///   s_k v_T = (1/a) v_T + sqrt(1 - 1/a^2) v_{s_k T}.
inline RealMatrix young_orthogonal_matrix(const YoungDiagram& lambda, std::size_t k,
                                          const std::vector<StandardTableau>& tableaux) {
  const std::size_t n = lambda.n();
  if (k < 1 || k >= n) throw InvalidArgument("young_orthogonal_matrix: k must lie in 1..n-1");
  const auto dim = static_cast<Eigen::Index>(tableaux.size());
  RealMatrix m = RealMatrix::Zero(dim, dim);
  for (Eigen::Index t = 0; t < dim; ++t) {
    const auto& tab = tableaux[static_cast<std::size_t>(t)];
    const auto [r1, c1] = tab.position(k);
    const auto [r2, c2] = tab.position(k + 1);
    const double axial = (static_cast<double>(c2) - static_cast<double>(r2)) -
                         (static_cast<double>(c1) - static_cast<double>(r1));
    m(t, t) = 1.0 / axial;
    if (r1 == r2 || c1 == c2) continue;
    StandardTableau swapped = tab;
    swapped.rows[r1][c1] = k + 1;
    swapped.rows[r2][c2] = k;
    const auto w = swapped.reading_word();
    const auto it = std::find_if(tableaux.begin(), tableaux.end(),
                                 [&](const StandardTableau& s) { return s.reading_word() == w; });
    m(it - tableaux.begin(), t) = std::sqrt(1.0 - 1.0 / (axial * axial));
  }
  return m;
}

inline RealMatrix young_orthogonal_matrix(const YoungDiagram& lambda, std::size_t k) {
  return young_orthogonal_matrix(lambda, k, standard_tableaux(lambda));
}

/// Adjacent transpositions (1-based k) with pi = s_{k_1} s_{k_2} ... s_{k_m}.
inline std::vector<std::size_t> adjacent_word(Permutation pi) {
  std::vector<std::size_t> right;  // pi o s_{right[0]} o s_{right[1]} ... = id
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < pi.size(); ++i)
      if (pi[i] > pi[i + 1]) {
        std::swap(pi[i], pi[i + 1]);
        right.push_back(i + 1);
        changed = true;
      }
  }
  return {right.rbegin(), right.rend()};
}

/// p_lambda(pi) in Young's orthogonal form.
inline RealMatrix young_orthogonal_rep(const YoungDiagram& lambda, const Permutation& pi,
                                       const std::vector<StandardTableau>& tableaux) {
  if (pi.size() != lambda.n() || !is_permutation(pi)) throw InvalidArgument("young_orthogonal_rep: invalid permutation");
  const auto dim = static_cast<Eigen::Index>(tableaux.size());
  RealMatrix out = RealMatrix::Identity(dim, dim);
  for (std::size_t k : adjacent_word(pi)) out = out * young_orthogonal_matrix(lambda, k, tableaux);
  return out;
}

inline RealMatrix young_orthogonal_rep(const YoungDiagram& lambda, const Permutation& pi) {
  return young_orthogonal_rep(lambda, pi, standard_tableaux(lambda));
}

/// All permutations of 0..n-1 in lexicographic order.
inline std::vector<Permutation> symmetric_group(std::size_t n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::vector<Permutation> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

struct SchurBlock {
  YoungDiagram shape;
  std::size_t dim_p = 0;
  std::size_t dim_q = 0;
  std::size_t offset = 0;

  std::size_t index(std::size_t t, std::size_t m) const { return offset + t * dim_q + m; }
};

/// Orthonormal Schur basis of (C^d)^{(x) n}. Column offset + t*dim_q + m of
/// `unitary` is the basis vector |lambda, t, m> in computational
/// coordinates, so unitary^† X unitary is X in the Schur basis and
/// unitary^† p(pi) unitary = (+)_lambda p_lambda(pi) (x) I_Q.
struct SchurTransform {
  std::size_t n = 0;
  std::size_t d = 0;
  Matrix unitary;
  std::vector<SchurBlock> layout;

  std::size_t dim() const { return static_cast<std::size_t>(unitary.rows()); }

  const SchurBlock* find(const YoungDiagram& lambda) const {
    for (const auto& b : layout)
      if (b.shape == lambda) return &b;
    return nullptr;
  }
};

struct SchurLimits {
  std::size_t max_n = 4;
  std::size_t max_dim = 4096;

  friend bool operator==(const SchurLimits&, const SchurLimits&) = default;
};

/// Builds the Schur transform by matrix units
///   e_{t t0} = (dim P / n!) sum_pi [p_lambda(pi)]_{t t0} p(pi):
/// an orthonormal basis {q_m} of range(e_{t0 t0}) spans Q_lambda and
/// |t, m> = e_{t t0} q_m. Permutations preserve the multiset of digits of a
/// basis index, so the work is done orbit by orbit.
inline SchurTransform schur_transform(std::size_t n, std::size_t d, const SchurLimits& limits = {}) {
  if (n == 0 || d == 0) throw InvalidArgument("schur_transform: n and d must be positive");
  if (!(limits == SchurLimits{}))
    std::cerr << "warning: schur_transform size caps overridden (max_n=" << limits.max_n
              << ", max_dim=" << limits.max_dim << ")\n";
  std::size_t dim = 1;
  for (std::size_t k = 0; k < n; ++k) {
    dim *= d;
    if (dim > limits.max_dim || n > limits.max_n)
      throw SizeLimitError("schur_transform(" + std::to_string(n) + ", " + std::to_string(d) +
                           ") exceeds the size caps (n <= " + std::to_string(limits.max_n) +
                           ", d^n <= " + std::to_string(limits.max_dim) + ")");
  }

  const auto group = symmetric_group(n);
  double n_fact = 1.0;
  for (std::size_t k = 2; k <= n; ++k) n_fact *= static_cast<double>(k);

  // image[g][x]: basis index of p(group[g]) |x>
  std::vector<std::vector<std::size_t>> image(group.size(), std::vector<std::size_t>(dim));
  for (std::size_t g = 0; g < group.size(); ++g)
    for (std::size_t x = 0; x < dim; ++x) image[g][x] = permute_basis_index(x, n, d, group[g]);

  // orbits of basis indices, each listed in increasing order
  std::vector<std::vector<std::size_t>> orbits;
  {
    std::vector<bool> seen(dim, false);
    for (std::size_t x = 0; x < dim; ++x) {
      if (seen[x]) continue;
      std::vector<std::size_t> orbit;
      for (std::size_t g = 0; g < group.size(); ++g)
        if (!seen[image[g][x]]) {
          seen[image[g][x]] = true;
          orbit.push_back(image[g][x]);
        }
      std::sort(orbit.begin(), orbit.end());
      orbits.push_back(std::move(orbit));
    }
  }

  SchurTransform st;
  st.n = n;
  st.d = d;
  st.unitary = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::size_t offset = 0;

  for (const auto& lambda : partitions(n, d)) {
    const auto tableaux = standard_tableaux(lambda);
    const std::size_t dim_p = tableaux.size();
    const std::size_t dim_q = dim_unitary(lambda, d);
    // coeff[t][g] = (dim P / n!) [p_lambda(g)]_{t, t0}, t0 = first tableau
    std::vector<std::vector<double>> coeff(dim_p, std::vector<double>(group.size()));
    for (std::size_t g = 0; g < group.size(); ++g) {
      const RealMatrix rep = young_orthogonal_rep(lambda, group[g], tableaux);
      for (std::size_t t = 0; t < dim_p; ++t)
        coeff[t][g] = static_cast<double>(dim_p) / n_fact * rep(static_cast<Eigen::Index>(t), 0);
    }
    auto apply_unit = [&](std::size_t t, const RealVector& v, const std::vector<std::size_t>& support) {
      RealVector out = RealVector::Zero(static_cast<Eigen::Index>(dim));
      for (std::size_t x : support) {
        const double vx = v(static_cast<Eigen::Index>(x));
        if (vx == 0.0) continue;
        for (std::size_t g = 0; g < group.size(); ++g) out(static_cast<Eigen::Index>(image[g][x])) += coeff[t][g] * vx;
      }
      return out;
    };

    std::size_t m = 0;
    for (const auto& orbit : orbits) {
      std::vector<RealVector> q_orbit;
      for (std::size_t x : orbit) {
        RealVector ex = RealVector::Zero(static_cast<Eigen::Index>(dim));
        ex(static_cast<Eigen::Index>(x)) = 1.0;
        RealVector v = apply_unit(0, ex, {x});
        for (int pass = 0; pass < 2; ++pass)
          for (const auto& q : q_orbit) v -= q.dot(v) * q;
        const double norm = v.norm();
        if (norm < 1e-8) continue;
        q_orbit.push_back(v / norm);
      }
      for (const auto& q : q_orbit) {
        if (m >= dim_q) throw ConstructionFault("schur_transform: Q multiplicity exceeds the Weyl dimension");
        for (std::size_t t = 0; t < dim_p; ++t) {
          const RealVector col = apply_unit(t, q, orbit);
          st.unitary.col(static_cast<Eigen::Index>(offset + t * dim_q + m)) = col.cast<cplx>();
        }
        ++m;
      }
    }
    if (m != dim_q)
      throw ConstructionFault("schur_transform: found " + std::to_string(m) + " Q vectors for " + lambda.str() +
                              ", expected " + std::to_string(dim_q));
    st.layout.push_back({lambda, dim_p, dim_q, offset});
    offset += dim_p * dim_q;
  }
  if (offset != dim) throw ConstructionFault("schur_transform: block dimensions do not add up to d^n");
  return st;
}

/// Process-wide memoized transform; the returned reference stays valid.
inline const SchurTransform& cached_schur_transform(std::size_t n, std::size_t d) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<SchurTransform>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n, d}];
  if (!slot) slot = std::make_unique<SchurTransform>(schur_transform(n, d));
  return *slot;
}

/// |I_{P_lambda}>> = sum_t |t>|t> over the Young orthogonal basis
/// (unnormalized, squared norm dim P_lambda).
inline Vector max_entangled_P(const YoungDiagram& lambda) {
  const std::size_t dp = dim_sym(lambda);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dp * dp));
  for (std::size_t t = 0; t < dp; ++t) v(static_cast<Eigen::Index>(t * dp + t)) = 1.0;
  return v;
}

struct PowerComponent {
  YoungDiagram shape;
  /// psi_lambda as a dim Q^{d1}_lambda x dim Q^{d2}_lambda coefficient matrix.
  Matrix coefficients;
};

struct PowerDecomposition {
  std::size_t s = 0;
  std::vector<PowerComponent> components;
  double residual = 0.0;
};

inline constexpr double kPowerDecompositionTol = 1e-9;

/// Decomposes psi^{(x) n} (A systems grouped before B systems) for psi given
/// as its d1 x d2 coefficient matrix, using Schur transforms `sa` (n, d1) and
/// `sb` (n, d2):
///   psi^{(x) n} = (+)_{lambda, rows <= s} |I_{P_lambda}>> (x) |psi_lambda>.
/// Throws ConstructionFault when the reconstruction residual exceeds tol.
inline PowerDecomposition bipartite_power_decompose(const Matrix& psi, std::size_t n, const SchurTransform& sa,
                                                    const SchurTransform& sb, double tol = kPowerDecompositionTol) {
  if (sa.n != n || sb.n != n || static_cast<std::size_t>(psi.rows()) != sa.d ||
      static_cast<std::size_t>(psi.cols()) != sb.d)
    throw DimensionError("bipartite_power_decompose: Schur transforms do not match the state");
  const Matrix power = kron_power(psi, n);
  const Matrix coeff = sa.unitary.adjoint() * power * sb.unitary.conjugate();

  PowerDecomposition out;
  out.s = std::min(sa.d, sb.d);
  Matrix recon = Matrix::Zero(coeff.rows(), coeff.cols());
  for (const auto& lambda : partitions(n, out.s)) {
    const SchurBlock* ba = sa.find(lambda);
    const SchurBlock* bb = sb.find(lambda);
    if (ba == nullptr || bb == nullptr || ba->dim_p != bb->dim_p)
      throw ConstructionFault("bipartite_power_decompose: inconsistent Schur layouts");
    Matrix comp = Matrix::Zero(static_cast<Eigen::Index>(ba->dim_q), static_cast<Eigen::Index>(bb->dim_q));
    for (std::size_t t = 0; t < ba->dim_p; ++t)
      comp += coeff.block(static_cast<Eigen::Index>(ba->index(t, 0)), static_cast<Eigen::Index>(bb->index(t, 0)),
                          comp.rows(), comp.cols());
    comp /= static_cast<double>(ba->dim_p);
    for (std::size_t t = 0; t < ba->dim_p; ++t)
      recon.block(static_cast<Eigen::Index>(ba->index(t, 0)), static_cast<Eigen::Index>(bb->index(t, 0)), comp.rows(),
                  comp.cols()) = comp;
    out.components.push_back({lambda, std::move(comp)});
  }
  out.residual = (coeff - recon).norm();
  const double scale = std::max(1.0, std::pow(psi.norm(), static_cast<double>(n)));
  if (out.residual > tol * scale)
    throw ConstructionFault("bipartite_power_decompose: residual " + std::to_string(out.residual) +
                            " exceeds tolerance (basis convention fault)");
  return out;
}

/// Convenience overload for psi in C^{d1} (x) C^{d2} (index a*d2 + b).
inline PowerDecomposition bipartite_power_decompose(const Vector& psi, std::size_t d1, std::size_t d2, std::size_t n) {
  return bipartite_power_decompose(unvec(psi, static_cast<Eigen::Index>(d1), static_cast<Eigen::Index>(d2)), n,
                                   cached_schur_transform(n, d1), cached_schur_transform(n, d2));
}

}  // namespace qct
