#pragma once

// Numeric JSON encoding shared by the channel and tester file formats:
// a matrix is a list of rows, each row a list of [re, im] pairs.

#include <nlohmann/json.hpp>
#include <string>

#include "qct/error.hpp"
#include "qct/linalg.hpp"
#include "qct/tensor.hpp"

namespace qct::json_io {

using json = nlohmann::ordered_json;

inline json encode(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix decode_matrix(const json& j) {
  if (!j.is_array() || j.empty()) throw InvalidArgument("matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw InvalidArgument("matrix rows must all have the same length");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const json& e = row.at(static_cast<std::size_t>(k));
      if (!e.is_array() || e.size() != 2) throw InvalidArgument("matrix entries must be [re, im] pairs");
      m(i, k) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

inline json encode(const Layout& layout) {
  json out = json::array();
  for (const auto& s : layout) out.push_back(json::array({s.label, s.dim}));
  return out;
}

inline Layout decode_layout(const json& j) {
  Layout out;
  for (const auto& e : j) out.push_back({e.at(0).get<std::string>(), e.at(1).get<std::size_t>()});
  return out;
}

}  // namespace qct::json_io
