#pragma once

// Isometry tomography from parallel queries, and channel tomography through
// a Haar-random dilation.
//
// Column estimates come from a pure-state tomography oracle model that
// returns phi sqrt(1 - eps) v + sqrt(eps) w (phi a uniform phase, w a Haar
// vector orthogonal to v, eps = eps_max * Uniform[0, 1]). Weak tomography
// recovers V up to unknown column phases; a second run on V F (F the DFT)
// followed by median phase alignment removes them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "qct/channels.hpp"
#include "qct/error.hpp"
#include "qct/linalg.hpp"
#include "qct/metrics.hpp"
#include "qct/random.hpp"

namespace qct {

/// Calibrated with tools/qct_calibrate (see README). eps_max = c_copies d / copies.
inline constexpr double kDefaultCCopies = 1.0;
/// N = c_total d1 d2 / eps^2 total queries.
inline constexpr double kDefaultCTotal = 12.0;

struct StateTomoModel {
  /// Copies consumed per estimated state.
  std::size_t copies = 0;
  double c_copies = kDefaultCCopies;
  /// Exact oracle (eps_max = 0).
  bool noiseless = false;

  double eps_max(std::size_t d) const {
    if (noiseless) return 0.0;
    if (copies == 0) return 1.0;
    return std::clamp(c_copies * static_cast<double>(d) / static_cast<double>(copies), 0.0, 1.0);
  }
};

struct OracleDraw {
  Vector state;
  double eps = 0.0;
  cplx phase = 1.0;
};

inline OracleDraw pure_state_oracle(const Vector& v, double eps_max, Rng& rng) {
  if (std::abs(v.norm() - 1.0) > 1e-10) throw InvalidArgument("pure_state_oracle: input is not a unit vector");
  if (eps_max < 0.0 || eps_max > 1.0) throw InvalidArgument("pure_state_oracle: eps_max must lie in [0, 1]");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  OracleDraw out;
  out.phase = std::exp(cplx(0.0, uniform_phase_angle(rng)));
  out.eps = eps_max * unit(rng);
  if (v.size() == 1 || out.eps == 0.0) {
    out.eps = 0.0;
    out.state = out.phase * v;
    return out;
  }
  Vector w = haar_state(v.size(), rng);
  w -= v * v.dot(w);
  w /= w.norm();
  out.state = out.phase * std::sqrt(1.0 - out.eps) * v + std::sqrt(out.eps) * w;
  out.state /= out.state.norm();
  return out;
}

struct IsometryEstimate {
  Matrix v_hat;
  std::size_t queries = 0;
  /// Raw column estimates (before the SVD snap), weak runs only.
  Matrix v_tilde;
  /// diag(phi_j) used by phase alignment, full runs only.
  Matrix phase;
  Matrix phi3;
};

/// Closest isometry in operator norm: U W^† from the thin SVD U S W^†.
inline Matrix snap_to_isometry(const Matrix& x) {
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// Estimates V up to right multiplication by a diagonal phase matrix, one
/// oracle call (model.copies queries) per column.
inline IsometryEstimate weak_isometry_tomo(const Matrix& v, const StateTomoModel& model, Rng& rng) {
  const auto d1 = v.cols();
  const auto d2 = v.rows();
  const double eps_max = model.eps_max(static_cast<std::size_t>(d2));
  IsometryEstimate est;
  est.v_tilde.resize(d2, d1);
  for (Eigen::Index j = 0; j < d1; ++j) est.v_tilde.col(j) = pure_state_oracle(v.col(j), eps_max, rng).state;
  est.v_hat = snap_to_isometry(est.v_tilde);
  est.queries = static_cast<std::size_t>(d1) * model.copies;
  return est;
}

/// F[k][j] = exp(2 pi i k j / d) / sqrt(d).
inline Matrix dft(std::size_t d) {
  if (d == 0) throw InvalidArgument("dft: dimension must be positive");
  const auto n = static_cast<Eigen::Index>(d);
  Matrix f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index j = 0; j < n; ++j)
      f(k, j) = scale * std::exp(cplx(0.0, 2.0 * std::numbers::pi * static_cast<double>((k * j) % n) /
                                               static_cast<double>(d)));
  return f;
}

namespace detail {
inline double lower_median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return xs[(xs.size() - 1) / 2];
}
}  // namespace detail

/// Combines v1 ~ V Phi1 and v2 ~ V F Phi2 into an estimate of V up to a
/// global phase: Phi3 = (v1^† v2) / F entrywise, phi_j from medians of
/// Phi3[k][j] / Phi3[k][0] over rows with |Phi3[k][0]| >= 1 / (4 sqrt d1),
/// result v2 Phi^† F^†.
inline IsometryEstimate phase_align(const Matrix& v1, const Matrix& v2, const Matrix& f) {
  const Eigen::Index d1 = v1.cols();
  if (v2.cols() != d1 || v1.rows() != v2.rows() || f.rows() != d1 || f.cols() != d1)
    throw DimensionError("phase_align: shapes do not match");
  IsometryEstimate est;
  est.phi3 = (v1.adjoint() * v2).cwiseQuotient(f);
  const double keep = 1.0 / (4.0 * std::sqrt(static_cast<double>(d1)));
  std::vector<Eigen::Index> rows;
  for (Eigen::Index k = 0; k < d1; ++k)
    if (std::abs(est.phi3(k, 0)) >= keep) rows.push_back(k);
  if (rows.empty()) throw DegeneratePhaseError("phase_align: no row passes the reference-magnitude test");
  est.phase = Matrix::Zero(d1, d1);
  for (Eigen::Index j = 0; j < d1; ++j) {
    std::vector<double> re;
    std::vector<double> im;
    for (Eigen::Index k : rows) {
      const cplx ratio = est.phi3(k, j) / est.phi3(k, 0);
      re.push_back(ratio.real());
      im.push_back(ratio.imag());
    }
    const cplx z(detail::lower_median(re), detail::lower_median(im));
    if (std::abs(z) < 1e-12)
      throw DegeneratePhaseError("phase_align: median phase of column " + std::to_string(j) + " vanishes");
    est.phase(j, j) = z / std::abs(z);
  }
  est.v_hat = v2 * est.phase.adjoint() * f.adjoint();
  return est;
}

/// Total queries N = ceil(c_total d1 d2 / eps^2).
inline std::size_t tomography_queries(std::size_t d1, std::size_t d2, double eps, double c_total = kDefaultCTotal) {
  if (!(eps > 0.0)) throw InvalidArgument("tomography_queries: eps must be positive");
  return static_cast<std::size_t>(std::ceil(c_total * static_cast<double>(d1 * d2) / (eps * eps)));
}

/// Full isometry tomography with a budget of `total_queries`: two weak runs
/// (on V and on V F) of total_queries / (2 d1) copies per column, then phase
/// alignment. `noiseless` selects the exact oracle.
inline IsometryEstimate isometry_tomography_budget(const Isometry& v, std::size_t total_queries, Rng& rng,
                                                   double c_copies = kDefaultCCopies, bool noiseless = false) {
  const std::size_t d1 = v.d_in();
  const Matrix f = dft(d1);
  StateTomoModel model;
  model.copies = total_queries / (2 * d1);
  model.c_copies = c_copies;
  model.noiseless = noiseless;
  if (model.copies == 0 && !noiseless) throw InvalidArgument("isometry_tomography: query budget below 2 d1");
  const IsometryEstimate run1 = weak_isometry_tomo(v.matrix(), model, rng);
  const IsometryEstimate run2 = weak_isometry_tomo(v.matrix() * f, model, rng);
  IsometryEstimate est = phase_align(run1.v_hat, run2.v_hat, f);
  est.queries = run1.queries + run2.queries;
  return est;
}

/// Isometry tomography to diamond accuracy eps with
/// N = c_total d1 d2 / eps^2 queries.
inline IsometryEstimate isometry_tomography(const Isometry& v, double eps, Rng& rng, double c_total = kDefaultCTotal,
                                            double c_copies = kDefaultCCopies) {
  return isometry_tomography_budget(v, tomography_queries(v.d_in(), v.d_out(), eps, c_total), rng, c_copies);
}

struct ChannelTomographyResult {
  QuantumChannel estimate;
  /// Sampled dilation W and its estimate.
  Isometry dilation;
  Isometry dilation_estimate;
  std::size_t queries = 0;
};

/// Samples W ~ Dilation_r(ch), runs isometry tomography on W in
/// ISO(d1, r d2) with N = c_total d1 r d2 / eps^2 queries and returns
/// Contract_r(W-hat).
inline ChannelTomographyResult channel_tomography_budget(const QuantumChannel& ch, std::size_t r,
                                                         std::size_t total_queries, Rng& rng,
                                                         double c_copies = kDefaultCCopies) {
  Isometry w = sample_random_dilation(ch, r, rng);
  IsometryEstimate est = isometry_tomography_budget(w, total_queries, rng, c_copies);
  Isometry w_hat(snap_to_isometry(est.v_hat));
  return {contract(w_hat, r), std::move(w), std::move(w_hat), est.queries};
}

inline ChannelTomographyResult channel_tomography(const QuantumChannel& ch, std::size_t r, double eps, Rng& rng,
                                                  double c_total = kDefaultCTotal, double c_copies = kDefaultCCopies) {
  return channel_tomography_budget(ch, r, tomography_queries(ch.d_in(), r * ch.d_out(), eps, c_total), rng,
                                   c_copies);
}

struct ContractedChoi {
  QuantumChannel channel;
  /// Choi state C / d_in of Contract_r(W_est).
  Matrix choi_state;
  /// With a reference isometry: (1/2)||C_est/d - C_true/d||_1 and its bound
  /// sqrt(1 - F_ent(W_est, W_true)).
  std::optional<double> distance;
  std::optional<double> bound;
};

/// Choi-mode reduction: contracts an estimated dilation (or unitary) and,
/// when `truth` is given, reports the Choi-state distance with its
/// entanglement-fidelity bound.
inline ContractedChoi contract_choi_estimate(const Matrix& w_est, std::size_t r, const Matrix* truth = nullptr) {
  const QuantumChannel ch = contract(Isometry(w_est), r);
  ContractedChoi out{ch, choi_state(ch), std::nullopt, std::nullopt};
  if (truth != nullptr) {
    out.distance = trace_distance(out.choi_state, choi_state(contract(Isometry(*truth), r)));
    out.bound = std::sqrt(std::max(0.0, 1.0 - entanglement_fidelity(*truth, w_est)));
  }
  return out;
}

/// State-mode reduction: tr_anc |psi><psi| for psi on C^r (x) C^rest, the
/// ancilla leading.
inline Matrix contract_state_estimate(const Vector& psi, std::size_t r) {
  if (r == 0 || static_cast<std::size_t>(psi.size()) % r != 0)
    throw DimensionError("contract_state_estimate: ancilla dimension does not divide the state dimension");
  const auto rest = psi.size() / static_cast<Eigen::Index>(r);
  const Vector unit = psi / psi.norm();
  Matrix out = Matrix::Zero(rest, rest);
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(r); ++k) {
    const Vector block = unit.segment(k * rest, rest);
    out += block * block.adjoint();
  }
  return out;
}

}  // namespace qct
