#pragma once

// Norms and distances for states, isometries and channels.
//
// Trace distances carry the factor 1/2 (values in [0, 1]); the diamond
// distance ||A - B||_<> does not (values in [0, 2]).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>

#include "qct/channels.hpp"
#include "qct/error.hpp"
#include "qct/linalg.hpp"
#include "qct/random.hpp"

namespace qct {

inline double trace_norm(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  return Eigen::BDCSVD<Matrix>(x).singularValues().sum();
}

inline double op_norm(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  return Eigen::BDCSVD<Matrix>(x).singularValues()(0);
}

/// (1/2) ||rho - sigma||_1
inline double trace_distance(const Matrix& rho, const Matrix& sigma) { return 0.5 * trace_norm(rho - sigma); }

/// |tr(U^† W) / d|^2 for isometries on C^d.
inline double entanglement_fidelity(const Matrix& u, const Matrix& w) {
  if (u.rows() != w.rows() || u.cols() != w.cols()) throw DimensionError("entanglement_fidelity: shape mismatch");
  return std::norm((u.adjoint() * w).trace() / static_cast<double>(u.cols()));
}

/// Choi state C / d_in.
inline Matrix choi_state(const QuantumChannel& ch) { return choi(ch).matrix() / static_cast<double>(ch.d_in()); }

/// (1/2) || C_A / d - C_B / d ||_1
inline double choi_distance(const QuantumChannel& a, const QuantumChannel& b) {
  if (a.d_in() != b.d_in() || a.d_out() != b.d_out()) throw DimensionError("choi_distance: channel shapes differ");
  return trace_distance(choi_state(a), choi_state(b));
}

namespace detail {

/// (Delta (x) I)(|psi><psi|) with Delta = A - B, psi on (in, ref).
inline Matrix difference_output(const QuantumChannel& a, const QuantumChannel& b, const Vector& psi) {
  const auto ref = static_cast<Eigen::Index>(a.d_in());
  const Matrix id = Matrix::Identity(ref, ref);
  const auto dim = static_cast<Eigen::Index>(a.d_out()) * ref;
  Matrix y = Matrix::Zero(dim, dim);
  for (const auto& e : a.kraus()) {
    const Vector v = kron(e, id) * psi;
    y += v * v.adjoint();
  }
  for (const auto& e : b.kraus()) {
    const Vector v = kron(e, id) * psi;
    y -= v * v.adjoint();
  }
  return y;
}

/// (Delta^† (x) I)(H) for H on (out, ref).
inline Matrix difference_adjoint(const QuantumChannel& a, const QuantumChannel& b, const Matrix& h) {
  const auto ref = static_cast<Eigen::Index>(a.d_in());
  const Matrix id = Matrix::Identity(ref, ref);
  Matrix g = Matrix::Zero(static_cast<Eigen::Index>(a.d_in()) * ref, static_cast<Eigen::Index>(a.d_in()) * ref);
  for (const auto& e : a.kraus()) {
    const Matrix k = kron(e, id);
    g += k.adjoint() * h * k;
  }
  for (const auto& e : b.kraus()) {
    const Matrix k = kron(e, id);
    g -= k.adjoint() * h * k;
  }
  return g;
}

}  // namespace detail

struct DiamondOptions {
  std::size_t restarts = 32;
  std::size_t iterations = 200;
  double tol = 1e-9;
};

struct DiamondEstimate {
  /// Achieved value of ||(Delta (x) I)(psi)||_1 for the best input found.
  double value = 0.0;
  /// `value` is always a lower bound on the diamond distance.
  bool lower_bound = true;
  /// 2 ||V - e^{i theta} W||_op when both channels are isometries.
  std::optional<double> upper_bound;
};

/// Upper bound 2 ||V - e^{i theta} W||_op with the phase theta aligning
/// tr(W^† V).
inline double isometry_op_bound(const Matrix& v, const Matrix& w) {
  const cplx overlap = (w.adjoint() * v).trace();
  const cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx(1.0);
  return 2.0 * op_norm(v - phase * w);
}

/// ||V . V^† - W . W^†||_<> = 2 sqrt(1 - nu^2), nu the distance from 0 to the
/// numerical range of V^† W, found as max_theta lambda_min(Herm(e^{-i theta} V^† W))
/// on a grid with golden-section refinement. An under-estimated nu only
/// raises the result, so the value is an upper bound; it is capped by
/// isometry_op_bound.
inline double isometry_diamond_distance(const Matrix& v, const Matrix& w) {
  if (v.rows() != w.rows() || v.cols() != w.cols()) throw DimensionError("isometry_diamond_distance: shape mismatch");
  const Matrix m = v.adjoint() * w;
  auto support = [&](double theta) { return min_eigenvalue(std::exp(cplx(0.0, -theta)) * m); };
  constexpr int kGrid = 720;
  const double step = 2.0 * std::numbers::pi / kGrid;
  double best_theta = 0.0;
  double best = support(0.0);
  for (int g = 1; g < kGrid; ++g) {
    const double f = support(g * step);
    if (f > best) {
      best = f;
      best_theta = g * step;
    }
  }
  double lo = best_theta - step;
  double hi = best_theta + step;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 80; ++it) {
    const double x1 = hi - ratio * (hi - lo);
    const double x2 = lo + ratio * (hi - lo);
    if (support(x1) < support(x2))
      lo = x1;
    else
      hi = x2;
  }
  best = std::max(best, support(0.5 * (lo + hi)));
  const double nu = std::clamp(best, 0.0, 1.0);
  return std::min(2.0 * std::sqrt(std::max(0.0, 1.0 - nu * nu)), isometry_op_bound(v, w));
}

/// See-saw estimate of ||A - B||_<>: alternate the Helstrom observable
/// sign(Y) for fixed input with the top eigenvector of (Delta^† (x) I)(H) for
/// fixed observable. Restart 0 uses the maximally entangled input, the rest
/// Haar-random inputs from `rng`.
inline DiamondEstimate diamond_distance(const QuantumChannel& a, const QuantumChannel& b, Rng& rng,
                                        const DiamondOptions& opt = {}) {
  if (a.d_in() != b.d_in() || a.d_out() != b.d_out()) throw DimensionError("diamond_distance: channel shapes differ");
  if (opt.restarts == 0) throw InvalidArgument("diamond_distance: need at least one restart");
  const auto d = static_cast<Eigen::Index>(a.d_in());
  DiamondEstimate est;
  for (std::size_t start = 0; start < opt.restarts; ++start) {
    Vector psi = start == 0 ? Vector(vec_flatten(Matrix::Identity(d, d)) / std::sqrt(static_cast<double>(d)))
                            : haar_state(d * d, rng);
    double prev = -1.0;
    for (std::size_t it = 0; it < opt.iterations; ++it) {
      const Matrix y = detail::difference_output(a, b, psi);
      if ((y - y.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
        throw InvalidArgument("diamond_distance: difference map does not preserve Hermiticity");
      Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(y));
      const double val = es.eigenvalues().cwiseAbs().sum();
      est.value = std::max(est.value, val);
      if (val - prev < opt.tol) break;
      prev = val;
      RealVector sign(es.eigenvalues().size());
      for (Eigen::Index k = 0; k < sign.size(); ++k) sign(k) = es.eigenvalues()(k) >= 0.0 ? 1.0 : -1.0;
      const Matrix h = es.eigenvectors() * sign.asDiagonal() * es.eigenvectors().adjoint();
      Eigen::SelfAdjointEigenSolver<Matrix> top(hermitian_part(detail::difference_adjoint(a, b, h)));
      psi = top.eigenvectors().col(top.eigenvalues().size() - 1);
    }
  }
  if (a.kraus_count() == 1 && b.kraus_count() == 1)
    est.upper_bound = isometry_op_bound(a.kraus().front(), b.kraus().front());
  return est;
}

}  // namespace qct
