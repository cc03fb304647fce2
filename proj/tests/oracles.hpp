#pragma once

// Brute-force reference implementations used only by the tests. None of
// these call into the library routines they check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t out = 1;
  while (e-- > 0) out *= b;
  return out;
}

/// Entrywise Kronecker product.
inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

inline std::vector<std::size_t> digits(std::size_t index, const std::vector<std::size_t>& dims) {
  std::vector<std::size_t> out(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    out[k] = index % dims[k];
    index /= dims[k];
  }
  return out;
}

inline std::size_t undigits(const std::vector<std::size_t>& ds, const std::vector<std::size_t>& dims) {
  std::size_t out = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) out = out * dims[k] + ds[k];
  return out;
}

/// Partial trace over the factors flagged in `traced`, by explicit sums
/// over digit strings.
inline Mat partial_trace(const Mat& x, const std::vector<std::size_t>& dims, const std::vector<bool>& traced) {
  std::vector<std::size_t> keep_dims;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (!traced[k]) keep_dims.push_back(dims[k]);
  std::size_t kd = 1;
  for (auto d : keep_dims) kd *= d;
  Mat out = Mat::Zero(static_cast<Eigen::Index>(kd), static_cast<Eigen::Index>(kd));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const auto di = digits(static_cast<std::size_t>(i), dims);
      const auto dj = digits(static_cast<std::size_t>(j), dims);
      bool diag = true;
      std::vector<std::size_t> ki;
      std::vector<std::size_t> kj;
      for (std::size_t k = 0; k < dims.size(); ++k) {
        if (traced[k]) {
          diag = diag && di[k] == dj[k];
        } else {
          ki.push_back(di[k]);
          kj.push_back(dj[k]);
        }
      }
      if (diag)
        out(static_cast<Eigen::Index>(undigits(ki, keep_dims)), static_cast<Eigen::Index>(undigits(kj, keep_dims))) +=
            x(i, j);
    }
  return out;
}

/// Partial transpose on the flagged factors.
inline Mat partial_transpose(const Mat& x, const std::vector<std::size_t>& dims, const std::vector<bool>& flip) {
  Mat out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      auto di = digits(static_cast<std::size_t>(i), dims);
      auto dj = digits(static_cast<std::size_t>(j), dims);
      for (std::size_t k = 0; k < dims.size(); ++k)
        if (flip[k]) std::swap(di[k], dj[k]);
      out(static_cast<Eigen::Index>(undigits(di, dims)), static_cast<Eigen::Index>(undigits(dj, dims))) = x(i, j);
    }
  return out;
}

/// Permutation operator built from product basis vectors: slot i of the
/// input lands in slot pi[i] of the output.
inline Mat permutation(std::size_t n, std::size_t d, const std::vector<std::size_t>& pi) {
  const std::size_t dim = ipow(d, n);
  Mat out = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const std::vector<std::size_t> dims(n, d);
  for (std::size_t x = 0; x < dim; ++x) {
    const auto in = digits(x, dims);
    std::vector<std::size_t> moved(n);
    for (std::size_t i = 0; i < n; ++i) moved[pi[i]] = in[i];
    out(static_cast<Eigen::Index>(undigits(moved, dims)), static_cast<Eigen::Index>(x)) = 1.0;
  }
  return out;
}

/// Number of partitions of n with at most `rows` parts, by counting weakly
/// decreasing sequences.
inline std::size_t count_partitions(std::size_t n, std::size_t rows) {
  std::function<std::size_t(std::size_t, std::size_t, std::size_t)> rec = [&](std::size_t left, std::size_t max_part,
                                                                              std::size_t slots) -> std::size_t {
    if (left == 0) return 1;
    if (slots == 0) return 0;
    std::size_t total = 0;
    for (std::size_t p = 1; p <= std::min(left, max_part); ++p) total += rec(left - p, p, slots - 1);
    return total;
  };
  return rec(n, n, rows);
}

/// Fillings of the diagram with values in [0, alphabet) checked cell by
/// cell: rows weakly (standard: strictly) increasing, columns strictly.
inline std::size_t count_fillings(const std::vector<std::size_t>& shape, std::size_t alphabet, bool standard) {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t i = 0; i < shape.size(); ++i)
    for (std::size_t j = 0; j < shape[i]; ++j) cells.push_back({i, j});
  const std::size_t n = cells.size();
  std::vector<std::vector<std::size_t>> fill(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i) fill[i].assign(shape[i], 0);
  const std::size_t combos = ipow(alphabet, n);
  std::size_t count = 0;
  for (std::size_t code = 0; code < combos; ++code) {
    std::size_t c = code;
    std::vector<bool> used(alphabet, false);
    bool ok = true;
    for (const auto& [i, j] : cells) {
      fill[i][j] = c % alphabet;
      c /= alphabet;
      if (standard) {
        if (used[fill[i][j]]) ok = false;
        used[fill[i][j]] = true;
      }
    }
    if (!ok) continue;
    for (const auto& [i, j] : cells) {
      if (j > 0 && (standard ? fill[i][j - 1] >= fill[i][j] : fill[i][j - 1] > fill[i][j])) ok = false;
      if (i > 0 && fill[i - 1][j] >= fill[i][j]) ok = false;
    }
    count += ok ? 1 : 0;
  }
  return count;
}

inline std::size_t count_standard_tableaux(const std::vector<std::size_t>& shape) {
  std::size_t n = 0;
  for (auto p : shape) n += p;
  return count_fillings(shape, n, true);
}

inline std::size_t count_semistandard_tableaux(const std::vector<std::size_t>& shape, std::size_t d) {
  return count_fillings(shape, d, false);
}

/// (1/2)-free trace norm by Hermitian eigenvalues.
inline double hermitian_trace_norm(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es((h + h.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

/// max over a grid of pure inputs sqrt(p)|u0>|0> + sqrt(1-p)|u1>|1> (u0,u1
/// an orthonormal qubit basis parametrized by Bloch angles and a relative
/// phase) of the Helstrom value ||((A - B) (x) I)(psi)||_1 for qubit
/// channels given by Kraus lists.
inline double qubit_diamond_grid(const std::vector<Mat>& ka, const std::vector<Mat>& kb, int steps = 24) {
  double best = 0.0;
  const double pi = std::numbers::pi;
  for (int a = 0; a <= steps; ++a)
    for (int b = 0; b < 2 * steps; ++b)
      for (int c = 0; c <= steps; ++c) {
        const double theta = pi * a / steps;
        const double phi = pi * b / steps;
        const double p = static_cast<double>(c) / steps;
        Vec u0(2);
        u0 << std::cos(theta / 2), std::exp(cplx(0, phi)) * std::sin(theta / 2);
        Vec u1(2);
        u1 << -std::exp(cplx(0, -phi)) * std::sin(theta / 2), std::cos(theta / 2);
        Vec e0(2);
        e0 << 1, 0;
        Vec e1(2);
        e1 << 0, 1;
        Vec psi = std::sqrt(p) * kron(u0, e0) + std::sqrt(1 - p) * kron(u1, e1);
        Mat rho = psi * psi.adjoint();
        Mat y = Mat::Zero(4, 4);
        const Mat id = Mat::Identity(2, 2);
        for (const auto& k : ka) y += kron(k, id) * rho * kron(k, id).adjoint();
        for (const auto& k : kb) y -= kron(k, id) * rho * kron(k, id).adjoint();
        best = std::max(best, hermitian_trace_norm(y));
      }
  return best;
}

/// Kraus list of the composition second o first.
inline std::vector<Mat> compose_kraus(const std::vector<Mat>& second, const std::vector<Mat>& first) {
  std::vector<Mat> out;
  for (const auto& s : second)
    for (const auto& f : first) out.push_back(s * f);
  return out;
}

}  // namespace oracle
