#pragma once

// Dense complex linear-algebra helpers shared by every module.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <random>

#include "qct/error.hpp"
#include "qct/random.hpp"

namespace qct {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline Matrix kron_power(const Matrix& a, std::size_t n) {
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t k = 0; k < n; ++k) out = kron(out, a);
  return out;
}

inline Vector kron_power(const Vector& a, std::size_t n) {
  Vector out = Vector::Ones(1);
  for (std::size_t k = 0; k < n; ++k) out = kron(out, a);
  return out;
}

inline Matrix hermitian_part(const Matrix& x) { return (x + x.adjoint()) / 2.0; }

/// Smallest eigenvalue of the Hermitian part of `x`.
inline double min_eigenvalue(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline bool is_psd(const Matrix& x, double tol) { return min_eigenvalue(x) >= -tol; }

/// Square root of a PSD matrix; tiny negative eigenvalues are clipped to zero.
inline Matrix psd_sqrt(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(x));
  RealVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

/// Moore-Penrose pseudo-inverse of a Hermitian matrix. Eigenvalues with
/// magnitude below `rel_cutoff * max|eigenvalue|` are treated as zero.
inline Matrix hermitian_pinv(const Matrix& x, double rel_cutoff) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(x));
  const RealVector& ev = es.eigenvalues();
  const double cutoff = rel_cutoff * ev.cwiseAbs().maxCoeff();
  RealVector inv(ev.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k) inv(k) = std::abs(ev(k)) > cutoff ? 1.0 / ev(k) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

inline Matrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return g;
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of diag(R)
/// pushed back into Q.
inline Matrix haar_unitary(Eigen::Index d, Rng& rng) {
  Matrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < d; ++k) {
    const double mag = std::abs(r(k, k));
    const cplx phase = mag > 0.0 ? r(k, k) / mag : cplx(1.0);
    q.col(k) *= phase;
  }
  return q;
}

inline Vector haar_state(Eigen::Index d, Rng& rng) {
  Vector v = ginibre(d, 1, rng).col(0);
  return v / v.norm();
}

/// Random density matrix W W^† / tr(W W^†) with W a d x d Ginibre matrix.
inline Matrix random_density(Eigen::Index d, Rng& rng) {
  Matrix w = ginibre(d, d, rng);
  Matrix rho = w * w.adjoint();
  return rho / rho.trace().real();
}

inline double uniform_phase_angle(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  return u(rng);
}

}  // namespace qct
