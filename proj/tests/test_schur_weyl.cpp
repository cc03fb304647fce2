#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qct/linalg.hpp"
#include "qct/schur_weyl.hpp"

using namespace qct;

namespace {

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

YoungDiagram yd(std::vector<std::size_t> parts) { return {std::move(parts)}; }

Permutation transposition(std::size_t n, std::size_t k) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), 0);
  std::swap(p[k], p[k + 1]);
  return p;
}

/// The P-register block [t][u] of M in Schur coordinates, read at Q index 0.
RealMatrix p_block(const Matrix& m, const SchurBlock& b) {
  RealMatrix out(b.dim_p, b.dim_p);
  for (std::size_t t = 0; t < b.dim_p; ++t)
    for (std::size_t u = 0; u < b.dim_p; ++u) out(t, u) = m(b.index(t, 0), b.index(u, 0)).real();
  return out;
}

/// Largest deviation of M (Schur coordinates) from (+)_lambda X_lambda (x) I_Q
/// with X_lambda = `expected(b)`.
template <class F>
double p_structure_gap(const Matrix& m, const SchurTransform& st, F expected) {
  Matrix target = Matrix::Zero(m.rows(), m.cols());
  for (const auto& b : st.layout) {
    const RealMatrix x = expected(b);
    for (std::size_t t = 0; t < b.dim_p; ++t)
      for (std::size_t u = 0; u < b.dim_p; ++u)
        for (std::size_t q = 0; q < b.dim_q; ++q) target(b.index(t, q), b.index(u, q)) = x(t, u);
  }
  return max_abs(m - target);
}

}  // namespace

TEST(Partitions, SmallCases) {
  EXPECT_EQ(partitions(3, 2), (std::vector<YoungDiagram>{yd({3}), yd({2, 1})}));
  EXPECT_EQ(partitions(2, 1), (std::vector<YoungDiagram>{yd({2})}));
  EXPECT_EQ(partitions(6, 3).size(), 7u);
}

TEST(Partitions, CountsMatchEnumeration) {
  for (std::size_t n = 1; n <= 7; ++n)
    for (std::size_t rows = 1; rows <= n; ++rows) {
      const auto ps = partitions(n, rows);
      EXPECT_EQ(ps.size(), oracle::count_partitions(n, rows)) << n << "," << rows;
      for (std::size_t i = 1; i < ps.size(); ++i) EXPECT_GT(ps[i - 1], ps[i]);
      for (const auto& p : ps) {
        EXPECT_EQ(p.n(), n);
        EXPECT_LE(p.rows(), rows);
        EXPECT_TRUE(std::is_sorted(p.parts.rbegin(), p.parts.rend()));
      }
    }
}

TEST(Dimensions, Examples) {
  EXPECT_EQ(dim_sym(yd({2, 1})), 2u);
  EXPECT_EQ(dim_unitary(yd({2, 1}), 2), 2u);
  EXPECT_EQ(dim_unitary(yd({2}), 2), 3u);
  EXPECT_EQ(dim_unitary(yd({1, 1, 1}), 2), 0u);
}

TEST(Dimensions, MatchTableauEnumeration) {
  for (std::size_t n = 1; n <= 5; ++n)
    for (const auto& lambda : partitions(n, n)) {
      EXPECT_EQ(dim_sym(lambda), oracle::count_standard_tableaux(lambda.parts)) << lambda.str();
      EXPECT_EQ(standard_tableaux(lambda).size(), dim_sym(lambda));
      for (std::size_t d = 1; d <= 3; ++d)
        EXPECT_EQ(dim_unitary(lambda, d), oracle::count_semistandard_tableaux(lambda.parts, d)) << lambda.str() << d;
    }
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t d = 1; d <= 4; ++d) {
      std::size_t binom = 1;
      for (std::size_t k = 1; k <= n; ++k) binom = binom * (n + d - k) / k;
      EXPECT_EQ(dim_unitary(yd({n}), d), binom);
    }
}

TEST(Tableaux, MonotoneAndOrdered) {
  const auto ts = standard_tableaux(yd({3, 2}));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto& t = ts[i];
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
        if (c > 0) EXPECT_LT(t.rows[r][c - 1], t.rows[r][c]);
        if (r > 0) EXPECT_LT(t.rows[r - 1][c], t.rows[r][c]);
      }
    if (i > 0) EXPECT_LT(ts[i - 1].reading_word(), t.reading_word());
  }
}

TEST(YoungOrthogonal, TrivialAndSignRepresentations) {
  for (std::size_t k = 1; k < 4; ++k) EXPECT_EQ(young_orthogonal_matrix(yd({4}), k)(0, 0), 1.0);
  EXPECT_EQ(young_orthogonal_matrix(yd({1, 1}), 1)(0, 0), -1.0);
}

TEST(YoungOrthogonal, CoxeterRelations) {
  for (std::size_t n = 2; n <= 5; ++n)
    for (const auto& lambda : partitions(n, n)) {
      const auto dp = static_cast<Eigen::Index>(dim_sym(lambda));
      const RealMatrix id = RealMatrix::Identity(dp, dp);
      std::vector<RealMatrix> s;
      for (std::size_t k = 1; k < n; ++k) s.push_back(young_orthogonal_matrix(lambda, k));
      for (std::size_t k = 0; k < s.size(); ++k) {
        EXPECT_LT(max_abs(RealMatrix(s[k] * s[k].transpose()) - id), 1e-14);
        EXPECT_LT(max_abs(RealMatrix(s[k] * s[k]) - id), 1e-14);
        if (k + 1 < s.size())
          EXPECT_LT(max_abs(RealMatrix(s[k] * s[k + 1] * s[k] - s[k + 1] * s[k] * s[k + 1])), 1e-14);
        for (std::size_t l = k + 2; l < s.size(); ++l) EXPECT_LT(max_abs(RealMatrix(s[k] * s[l] - s[l] * s[k])), 1e-14);
      }
    }
}

TEST(YoungOrthogonal, RepresentationIsHomomorphism) {
  for (const auto& lambda : partitions(4, 4)) {
    const auto group = symmetric_group(4);
    for (const auto& a : group)
      for (const auto& b : group) {
        const RealMatrix lhs = young_orthogonal_rep(lambda, a) * young_orthogonal_rep(lambda, b);
        EXPECT_LT(max_abs(RealMatrix(lhs - young_orthogonal_rep(lambda, compose(a, b)))), 1e-13);
      }
  }
}

TEST(SchurTransform, Layouts) {
  const auto st22 = schur_transform(2, 2);
  ASSERT_EQ(st22.layout.size(), 2u);
  EXPECT_EQ(st22.layout[0].shape, yd({2}));
  EXPECT_EQ(st22.layout[0].dim_p, 1u);
  EXPECT_EQ(st22.layout[0].dim_q, 3u);
  EXPECT_EQ(st22.layout[1].shape, yd({1, 1}));
  EXPECT_EQ(st22.layout[1].dim_q, 1u);

  const auto st32 = schur_transform(3, 2);
  ASSERT_EQ(st32.layout.size(), 2u);
  EXPECT_EQ(st32.layout[1].shape, yd({2, 1}));
  EXPECT_EQ(st32.layout[0].dim_q, 4u);
  EXPECT_EQ(st32.layout[1].dim_p, 2u);
  EXPECT_EQ(st32.layout[1].dim_q, 2u);
}

TEST(SchurTransform, SizeCapsAndOverride) {
  EXPECT_THROW(schur_transform(5, 2), SizeLimitError);
  EXPECT_THROW(schur_transform(4, 9), SizeLimitError);
  EXPECT_THROW(schur_transform(0, 2), InvalidArgument);
  const auto st = schur_transform(5, 2, SchurLimits{5, 4096});
  EXPECT_LT(max_abs(Matrix(st.unitary.adjoint() * st.unitary) - Matrix::Identity(32, 32)), 1e-10);
}

class SchurCase : public ::testing::TestWithParam<std::pair<std::size_t, std::size_t>> {};

TEST_P(SchurCase, Invariants) {
  const auto [n, d] = GetParam();
  const SchurTransform st = schur_transform(n, d);
  const auto dim = static_cast<Eigen::Index>(st.dim());
  EXPECT_LT(max_abs(Matrix(st.unitary.adjoint() * st.unitary) - Matrix::Identity(dim, dim)), 1e-10);
  std::size_t total = 0;
  for (const auto& b : st.layout) {
    EXPECT_EQ(b.dim_p, dim_sym(b.shape));
    EXPECT_EQ(b.dim_q, dim_unitary(b.shape, d));
    EXPECT_EQ(b.offset, total);
    total += b.dim_p * b.dim_q;
  }
  EXPECT_EQ(total, oracle::ipow(d, n));

  for (const auto& pi : symmetric_group(n)) {
    const Matrix m = st.unitary.adjoint() * oracle::permutation(n, d, pi) * st.unitary;
    EXPECT_LT(p_structure_gap(m, st, [&](const SchurBlock& b) { return young_orthogonal_rep(b.shape, pi); }), 1e-10);
    EXPECT_LT(max_abs(RealMatrix(m.imag())), 1e-10);
  }

  Rng rng(100 + n * 10 + d);
  for (int k = 0; k < 10; ++k) {
    const Matrix u = kron_power(haar_unitary(static_cast<Eigen::Index>(d), rng), n);
    const Matrix m = st.unitary.adjoint() * u * st.unitary;
    Matrix target = Matrix::Zero(dim, dim);
    for (const auto& b : st.layout) {
      const Matrix q = m.block(b.index(0, 0), b.index(0, 0), b.dim_q, b.dim_q);
      for (std::size_t t = 0; t < b.dim_p; ++t) target.block(b.index(t, 0), b.index(t, 0), b.dim_q, b.dim_q) = q;
    }
    EXPECT_LT(max_abs(m - target), 1e-10);
  }
}

INSTANTIATE_TEST_SUITE_P(Cases, SchurCase,
                         ::testing::Values(std::pair<std::size_t, std::size_t>{2, 2}, std::pair<std::size_t, std::size_t>{2, 3},
                                           std::pair<std::size_t, std::size_t>{3, 2}, std::pair<std::size_t, std::size_t>{3, 4},
                                           std::pair<std::size_t, std::size_t>{2, 4}, std::pair<std::size_t, std::size_t>{4, 2},
                                           std::pair<std::size_t, std::size_t>{3, 3}));

TEST(SchurTransform, PBasisIdenticalAcrossDimensions) {
  for (std::size_t n : {2u, 3u}) {
    const auto& s2 = cached_schur_transform(n, 2);
    const auto& s3 = cached_schur_transform(n, 3);
    for (const auto& pi : symmetric_group(n)) {
      const Matrix m2 = s2.unitary.adjoint() * oracle::permutation(n, 2, pi) * s2.unitary;
      const Matrix m3 = s3.unitary.adjoint() * oracle::permutation(n, 3, pi) * s3.unitary;
      for (const auto& b2 : s2.layout) {
        const SchurBlock* b3 = s3.find(b2.shape);
        ASSERT_NE(b3, nullptr);
        EXPECT_LT(max_abs(RealMatrix(p_block(m2, b2) - p_block(m3, *b3))), 1e-10);
      }
    }
  }
}

TEST(SchurTransform, CacheReturnsStableReference) {
  const SchurTransform& a = cached_schur_transform(2, 2);
  const SchurTransform& b = cached_schur_transform(2, 2);
  EXPECT_EQ(&a, &b);
}

TEST(MaxEntangledP, NormAndInvariance) {
  EXPECT_EQ(max_entangled_P(yd({3})).size(), 1);
  EXPECT_NEAR(max_entangled_P(yd({2, 1})).squaredNorm(), 2.0, 1e-15);
  for (const auto& lambda : partitions(3, 3)) {
    const Vector w = max_entangled_P(lambda);
    for (const auto& pi : symmetric_group(3)) {
      const Matrix p = young_orthogonal_rep(lambda, pi).cast<cplx>();
      EXPECT_LT((kron(Matrix(p.conjugate()), p) * w - w).norm(), 1e-12);
    }
  }
}

TEST(SchurTransform, DiagonalPermutationProjector) {
  // (1/n!) sum_pi p_A(pi) (x) p_B(pi) in the Schur bases of A^n and B^n.
  const std::size_t d1 = 2;
  const std::size_t d2 = 3;
  for (std::size_t n : {2u, 3u}) {
    const auto& sa = cached_schur_transform(n, d1);
    const auto& sb = cached_schur_transform(n, d2);
    const auto group = symmetric_group(n);
    const auto da = static_cast<Eigen::Index>(sa.dim());
    const auto db = static_cast<Eigen::Index>(sb.dim());
    Matrix proj = Matrix::Zero(da * db, da * db);
    for (const auto& pi : group) proj += kron(oracle::permutation(n, d1, pi), oracle::permutation(n, d2, pi));
    proj /= static_cast<double>(group.size());
    const Matrix frame = kron(sa.unitary, sb.unitary);
    const Matrix m = frame.adjoint() * proj * frame;
    Matrix target = Matrix::Zero(da * db, da * db);
    for (const auto& ba : sa.layout) {
      const SchurBlock* bb = sb.find(ba.shape);
      if (bb == nullptr) continue;
      for (std::size_t t = 0; t < ba.dim_p; ++t)
        for (std::size_t u = 0; u < ba.dim_p; ++u)
          for (std::size_t qa = 0; qa < ba.dim_q; ++qa)
            for (std::size_t qb = 0; qb < bb->dim_q; ++qb)
              target(static_cast<Eigen::Index>(ba.index(t, qa)) * db + bb->index(t, qb),
                     static_cast<Eigen::Index>(ba.index(u, qa)) * db + bb->index(u, qb)) = 1.0 / ba.dim_p;
    }
    EXPECT_LT(max_abs(m - target), 1e-10) << n;
  }
}

TEST(PowerDecomposition, ProductStateHasOnlySymmetricComponent) {
  Rng rng(1);
  const Vector a = haar_state(2, rng);
  const Vector b = haar_state(3, rng);
  const auto dec = bipartite_power_decompose(kron(a, b), 2, 3, 3);
  for (const auto& c : dec.components) {
    if (c.shape == yd({3}))
      EXPECT_NEAR(c.coefficients.squaredNorm(), 1.0, 1e-12);
    else
      EXPECT_LT(c.coefficients.norm(), 1e-12) << c.shape.str();
  }
}

TEST(PowerDecomposition, NormBookkeepingAndReconstruction) {
  Rng rng(2);
  for (int k = 0; k < 5; ++k) {
    const Vector psi = haar_state(6, rng);
    const auto dec = bipartite_power_decompose(psi, 2, 3, 3);
    EXPECT_EQ(dec.s, 2u);
    EXPECT_LE(dec.residual, 1e-9);
    double total = 0.0;
    for (const auto& c : dec.components) total += static_cast<double>(dim_sym(c.shape)) * c.coefficients.squaredNorm();
    EXPECT_NEAR(total, 1.0, 1e-10);

    // explicit reconstruction in computational coordinates, A systems first
    const auto& sa = cached_schur_transform(3, 2);
    const auto& sb = cached_schur_transform(3, 3);
    const auto db = static_cast<Eigen::Index>(sb.dim());
    Vector schur = Vector::Zero(static_cast<Eigen::Index>(sa.dim()) * db);
    for (const auto& c : dec.components) {
      const SchurBlock* ba = sa.find(c.shape);
      const SchurBlock* bb = sb.find(c.shape);
      for (std::size_t t = 0; t < ba->dim_p; ++t)
        for (std::size_t qa = 0; qa < ba->dim_q; ++qa)
          for (std::size_t qb = 0; qb < bb->dim_q; ++qb)
            schur(static_cast<Eigen::Index>(ba->index(t, qa)) * db + bb->index(t, qb)) = c.coefficients(qa, qb);
    }
    const Vector recon = kron(sa.unitary, sb.unitary) * schur;
    // psi^{(x) 3} with A1 A2 A3 B1 B2 B3 ordering
    Vector direct(recon.size());
    const std::vector<std::size_t> dims{2, 3, 2, 3, 2, 3};
    const std::vector<std::size_t> grouped{2, 2, 2, 3, 3, 3};
    for (std::size_t x = 0; x < static_cast<std::size_t>(recon.size()); ++x) {
      const auto g = oracle::digits(x, grouped);
      cplx v = 1.0;
      for (std::size_t j = 0; j < 3; ++j) v *= psi(static_cast<Eigen::Index>(g[j] * 3 + g[3 + j]));
      direct(static_cast<Eigen::Index>(x)) = v;
    }
    EXPECT_LT((recon - direct).norm(), 1e-9);
  }
}

TEST(PowerDecomposition, MismatchedTransformsThrow) {
  const Matrix psi = Matrix::Identity(2, 2) / std::sqrt(2.0);
  EXPECT_THROW(bipartite_power_decompose(psi, 2, cached_schur_transform(2, 2), cached_schur_transform(3, 2)),
               DimensionError);
}
