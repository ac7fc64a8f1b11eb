#pragma once

#include <span>
#include <vector>

#include "maschine/error.hpp"
#include "maschine/ids.hpp"
#include "maschine/model.hpp"

namespace maschine {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double x = a[k] - b[k];
    s += x * x;
  }
  return s;
}

/// Stacks the embedding rows of `ids` (all columns, so ComplEx rows keep
/// both real and imaginary parts).
template <class Real>
Matrix entity_matrix(const BasicParams<Real>& p, std::span<const EntityId> ids) {
  Matrix m(ids.size(), p.width());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (index_of(ids[i]) >= p.num_entities) throw UsageError("entity id out of range for these parameters");
    const auto src = p.entity(index_of(ids[i]));
    for (std::size_t k = 0; k < m.cols; ++k) m(i, k) = double(src[k]);
  }
  return m;
}

} // namespace maschine
