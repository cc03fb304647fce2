#include <gtest/gtest.h>

#include "qct/twirl.hpp"

using namespace qct;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

const std::vector<std::string> kAnc2{"k1", "k2"};
const Layout kLayout2{{"S1", 2}, {"k1", 2}, {"S2", 2}, {"k2", 2}};

LabeledOperator random_operator(const Layout& l, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(total_dim(l));
  return {ginibre(d, d, rng), l};
}

Matrix conjugate_anc(const LabeledOperator& x, const Matrix& w) {
  // W on every ancilla, identity on the rest
  Matrix op = Matrix::Identity(1, 1);
  for (const auto& s : x.systems())
    op = kron(op, s.label[0] == 'k' ? w : Matrix(Matrix::Identity(static_cast<Eigen::Index>(s.dim),
                                                                   static_cast<Eigen::Index>(s.dim))));
  return op * x.matrix() * op.adjoint();
}

}  // namespace

TEST(ExactTwirl, SingleCopyIsPartialTraceTimesMaximallyMixed) {
  Rng rng(1);
  const LabeledOperator x = random_operator({{"S", 3}, {"k1", 2}}, rng);
  const auto out = exact_twirl(x, {"k1"}, 2, 1);
  const Matrix expect = kron(partial_trace(x, {"k1"}).matrix(), Matrix::Identity(2, 2) / 2.0);
  EXPECT_LT(max_abs(out.matrix() - expect), 1e-12);
  EXPECT_EQ(out.systems(), x.systems());
}

TEST(ExactTwirl, PermutationOperatorIsFixed) {
  Rng rng(2);
  const Matrix s = ginibre(2, 2, rng);
  for (std::size_t n : {2u, 3u}) {
    const auto p = permutation_operator(n, 2, n == 2 ? Permutation{1, 0} : Permutation{1, 2, 0}, "k");
    const auto x = kron(LabeledOperator(s, {{"S", 2}}), p);
    std::vector<std::string> anc;
    for (std::size_t j = 1; j <= n; ++j) anc.push_back("k" + std::to_string(j));
    EXPECT_LT(max_abs(exact_twirl(x, anc, 2, n).matrix() - x.matrix()), 1e-12);
  }
}

TEST(ExactTwirl, ProjectionTraceHermiticityInvariance) {
  Rng rng(3);
  for (int k = 0; k < 5; ++k) {
    const LabeledOperator x = random_operator(kLayout2, rng);
    const auto once = exact_twirl(x, kAnc2, 2, 2);
    EXPECT_LT(max_abs(exact_twirl(once, kAnc2, 2, 2).matrix() - once.matrix()), 1e-11);
    EXPECT_LT(std::abs(once.matrix().trace() - x.matrix().trace()), 1e-11);
    const Matrix w = haar_unitary(2, rng);
    EXPECT_LT(max_abs(conjugate_anc(once, w) - once.matrix()), 1e-10);

    const Matrix h = x.matrix() * x.matrix().adjoint();
    const auto th = exact_twirl(LabeledOperator(h, kLayout2), kAnc2, 2, 2).matrix();
    EXPECT_LT(max_abs(th - th.adjoint()), 1e-11);
    EXPECT_GT(min_eigenvalue(th), -1e-9);
  }
}

TEST(ExactTwirl, ThreeAncillasOfDimensionThree) {
  Rng rng(4);
  const Layout l{{"k1", 3}, {"S", 2}, {"k2", 3}, {"k3", 3}};
  const LabeledOperator x = random_operator(l, rng);
  const std::vector<std::string> anc{"k1", "k2", "k3"};
  const auto out = exact_twirl(x, anc, 3, 3);
  const Matrix w = haar_unitary(3, rng);
  EXPECT_LT(max_abs(conjugate_anc(out, w) - out.matrix()), 1e-10);
  EXPECT_LT(max_abs(exact_twirl(out, anc, 3, 3).matrix() - out.matrix()), 1e-10);
}

TEST(ExactTwirl, MatchesMonteCarlo) {
  Rng rng(5);
  const LabeledOperator x = random_operator(kLayout2, rng);
  const auto exact = exact_twirl(x, kAnc2, 2, 2);
  const auto mc = mc_twirl(x, kAnc2, 2, 2, 20000, rng);
  const Matrix diff = exact.matrix() - mc.mean.matrix();
  for (Eigen::Index i = 0; i < diff.rows(); ++i)
    for (Eigen::Index j = 0; j < diff.cols(); ++j)
      EXPECT_LE(std::abs(diff(i, j)), std::max(5.0 * mc.std_error(i, j), 1e-10)) << i << "," << j;
}

TEST(ExactTwirl, LayoutErrors) {
  Rng rng(6);
  const LabeledOperator x = random_operator(kLayout2, rng);
  EXPECT_THROW(exact_twirl(x, {"k1"}, 2, 2), InvalidArgument);
  EXPECT_THROW(exact_twirl(x, {"k1", "zz"}, 2, 2), LabelError);
  EXPECT_THROW(exact_twirl(x, {"k1", "S1"}, 3, 2), DimensionError);
  EXPECT_THROW(exact_twirl(x, kAnc2, 2, 2, cached_schur_transform(2, 3)), DimensionError);
}

TEST(McTwirl, IdentityIsFixed) {
  Rng rng(7);
  const auto x = LabeledOperator::identity(kLayout2);
  const auto mc = mc_twirl(x, kAnc2, 2, 2, 50, rng);
  EXPECT_LT(max_abs(mc.mean.matrix() - x.matrix()), 1e-12);
}

TEST(McTwirl, StandardErrorScaling) {
  Rng rng(8);
  const LabeledOperator x = random_operator({{"S", 2}, {"k1", 2}, {"k2", 2}}, rng);
  const auto small = mc_twirl(x, kAnc2, 2, 2, 1000, rng);
  const auto large = mc_twirl(x, kAnc2, 2, 2, 4000, rng);
  const double ratio = small.std_error.mean() / large.std_error.mean();
  EXPECT_GE(ratio, 1.6);
  EXPECT_LE(ratio, 2.5);
}

TEST(McTwirl, SeededReproducibility) {
  Rng src(9);
  const LabeledOperator x = random_operator({{"S", 2}, {"k1", 2}}, src);
  Rng a(77), b(77);
  const auto ma = mc_twirl(x, {"k1"}, 2, 1, 100, a);
  const auto mb = mc_twirl(x, {"k1"}, 2, 1, 100, b);
  EXPECT_EQ(max_abs(ma.mean.matrix() - mb.mean.matrix()), 0.0);
}
