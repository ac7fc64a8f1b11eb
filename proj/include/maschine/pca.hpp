#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "maschine/error.hpp"
#include "maschine/matrix.hpp"
#include "maschine/random.hpp"

namespace maschine {

struct PCAOptions {
  double tolerance = 1e-9;
  int max_iterations = 100000;
};

struct PCAResult {
  Matrix coords;                              // N x 2
  std::array<std::vector<double>, 2> components; // unit loadings, zero if absent
  std::array<double, 2> variances{};          // eigenvalues, descending
  std::vector<double> mean;
};

namespace detail {

inline double normalize(std::vector<double>& v) {
  double n = 0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0)
    for (double& x : v) x /= n;
  return n;
}

/// Dominant eigenpair of a symmetric PSD matrix by power iteration,
/// kept orthogonal to the unit vectors in `against`.
inline double power_iteration(const Matrix& c, std::vector<double>& v, const PCAOptions& opt,
                              std::span<const std::vector<double>> against = {}) {
  const std::size_t d = c.rows;
  Rng rng(0x5ca1ab1e);
  v.assign(d, 0.0);
  const auto project_out = [&](std::vector<double>& u) {
    for (const auto& a : against) {
      double dot = 0;
      for (std::size_t i = 0; i < d; ++i) dot += a[i] * u[i];
      for (std::size_t i = 0; i < d; ++i) u[i] -= dot * a[i];
    }
  };
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  project_out(v);
  normalize(v);
  std::vector<double> w(d);
  for (int it = 0; it < opt.max_iterations; ++it) {
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < d; ++j) s += c(i, j) * v[j];
      w[i] = s;
    }
    project_out(w);
    if (normalize(w) == 0) {
      v.assign(d, 0.0);
      return 0.0;
    }
    double delta = 0;
    for (std::size_t i = 0; i < d; ++i) delta = std::max(delta, std::abs(w[i] - v[i]));
    v.swap(w);
    if (delta < opt.tolerance) break;
  }
  double lambda = 0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) lambda += v[i] * c(i, j) * v[j];
  return lambda;
}

} // namespace detail

/// Projects mean-centred rows onto the top two covariance eigenvectors,
/// found by power iteration with deflation. Each component's first
/// nonzero loading is made positive. Rank-deficient data yields zero
/// components and zero coordinates on the missing axes.
inline PCAResult pca_2d(const Matrix& x, const PCAOptions& opt = {}) {
  if (x.rows < 2) throw UsageError("pca needs at least 2 points");
  const std::size_t n = x.rows, d = x.cols;
  PCAResult out;
  out.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out.mean[j] += x(i, j);
  for (double& m : out.mean) m /= static_cast<double>(n);

  Matrix cov(d, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a) {
      const double xa = x(i, a) - out.mean[a];
      if (xa == 0) continue;
      for (std::size_t b = 0; b < d; ++b) cov(a, b) += xa * (x(i, b) - out.mean[b]);
    }
  for (double& v : cov.data) v /= static_cast<double>(n - 1);

  double trace = 0;
  for (std::size_t a = 0; a < d; ++a) trace += cov(a, a);
  const double floor = 1e-12 * std::max(trace, 1e-300);

  for (std::size_t k = 0; k < 2; ++k) {
    auto& v = out.components[k];
    const auto found = std::span<const std::vector<double>>(out.components.data(), k);
    double lambda = d > 0 ? detail::power_iteration(cov, v, opt, found) : 0.0;
    if (lambda <= floor) {
      v.assign(d, 0.0);
      lambda = 0;
    }
    for (double& l : v)
      if (std::abs(l) > 1e-12) {
        if (l < 0)
          for (double& y : v) y = -y;
        break;
      }
    out.variances[k] = lambda;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) cov(a, b) -= lambda * v[a] * v[b];
  }

  out.coords = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < 2; ++k) {
      double s = 0;
      for (std::size_t j = 0; j < d; ++j) s += (x(i, j) - out.mean[j]) * out.components[k][j];
      out.coords(i, k) = s;
    }
  return out;
}

} // namespace maschine
