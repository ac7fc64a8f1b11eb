#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "maschine/error.hpp"
#include "maschine/matrix.hpp"
#include "maschine/model.hpp"
#include "maschine/random.hpp"
#include "maschine/schema.hpp"

namespace maschine {

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
  double tolerance = 1e-4; // relative inertia change
};

struct KMeansResult {
  std::vector<int> labels;
  Matrix centroids;
  double inertia = 0;
  int iterations = 0;
  int restart = 0;                  // index of the winning restart
  std::vector<double> inertia_trace; // winning restart, one value per assignment step
};

namespace detail {

inline std::size_t nearest(const Matrix& centroids, std::span<const double> x, double& dist) {
  std::size_t best = 0;
  dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows; ++c) {
    const double d = squared_distance(x, centroids.row(c));
    if (d < dist) {
      dist = d;
      best = c;
    }
  }
  return best;
}

inline Matrix kmeans_plus_plus(const Matrix& x, std::size_t k, Rng& rng) {
  Matrix c(k, x.cols);
  std::vector<double> d2(x.rows, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.below(x.rows);
  for (std::size_t j = 0; j < k; ++j) {
    std::copy_n(x.row(pick).begin(), x.cols, c.row(j).begin());
    double total = 0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      d2[i] = std::min(d2[i], squared_distance(x.row(i), c.row(j)));
      total += d2[i];
    }
    if (j + 1 == k) break;
    if (total <= 0) {
      pick = rng.below(x.rows);
      continue;
    }
    double u = rng.uniform01() * total;
    pick = x.rows - 1;
    for (std::size_t i = 0; i < x.rows; ++i) {
      u -= d2[i];
      if (u < 0 && d2[i] > 0) {
        pick = i;
        break;
      }
    }
  }
  return c;
}

inline KMeansResult lloyd(const Matrix& x, Matrix centroids, const KMeansOptions& opt) {
  const std::size_t n = x.rows, k = centroids.rows, d = x.cols;
  KMeansResult r;
  r.labels.assign(n, 0);
  std::vector<double> dist(n);
  std::vector<std::size_t> counts(k);
  double prev = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= opt.max_iterations; ++it) {
    double inertia = 0;
    for (std::size_t i = 0; i < n; ++i) {
      r.labels[i] = static_cast<int>(nearest(centroids, x.row(i), dist[i]));
      inertia += dist[i];
    }
    std::fill(counts.begin(), counts.end(), 0);
    for (int l : r.labels) ++counts[static_cast<std::size_t>(l)];
    // Empty cluster: move the point farthest from its centroid into it.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (dist[i] > dist[far] && counts[static_cast<std::size_t>(r.labels[i])] > 1) far = i;
      if (counts[static_cast<std::size_t>(r.labels[far])] <= 1) continue;
      --counts[static_cast<std::size_t>(r.labels[far])];
      inertia -= dist[far];
      dist[far] = 0;
      r.labels[far] = static_cast<int>(c);
      counts[c] = 1;
    }
    r.inertia_trace.push_back(inertia);
    r.inertia = inertia;
    r.iterations = it;

    Matrix next(k, d);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = next.row(static_cast<std::size_t>(r.labels[i]));
      const auto src = x.row(i);
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        std::copy_n(centroids.row(c).begin(), d, next.row(c).begin());
        continue;
      }
      for (auto& v : next.row(c)) v /= static_cast<double>(counts[c]);
    }
    centroids = std::move(next);

    const bool converged = inertia == 0 || (std::isfinite(prev) && (prev - inertia) <= opt.tolerance * prev);
    prev = inertia;
    if (converged) break;
  }
  // Final inertia against the updated centroids.
  double inertia = 0;
  for (std::size_t i = 0; i < n; ++i) inertia += squared_distance(x.row(i), centroids.row(static_cast<std::size_t>(r.labels[i])));
  r.inertia = std::min(r.inertia, inertia);
  r.centroids = std::move(centroids);
  return r;
}

} // namespace detail

/// Lloyd's algorithm with k-means++ seeding. The restart with the lowest
/// inertia wins; ties go to the earlier restart.
inline KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, const KMeansOptions& opt = {}) {
  if (x.cols == 0) throw UsageError("kmeans: points need at least one dimension");
  if (k == 0 || k > x.rows) throw UsageError("kmeans: need 1 <= k <= number of points");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < std::max(1, opt.restarts); ++restart) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
    auto r = detail::lloyd(x, detail::kmeans_plus_plus(x, k, rng), opt);
    r.restart = restart;
    if (r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Agreement metrics

struct ClusterReport {
  double ari = 0;
  double nmi = 0;
  double ami = 0;
  double v_measure = 0;
  double fowlkes_mallows = 0;
  double homogeneity = 0;
  double completeness = 0;
};

/// Label-count table between two partitions of the same points.
struct Contingency {
  std::size_t n = 0;
  std::vector<std::size_t> row_sums; // truth classes
  std::vector<std::size_t> col_sums; // predicted clusters
  std::vector<std::vector<std::size_t>> cells;

  Contingency(std::span<const int> truth, std::span<const int> pred) : n(truth.size()) {
    std::map<int, std::size_t> ti, pi;
    for (int t : truth) ti.emplace(t, ti.size());
    for (int p : pred) pi.emplace(p, pi.size());
    row_sums.assign(ti.size(), 0);
    col_sums.assign(pi.size(), 0);
    cells.assign(ti.size(), std::vector<std::size_t>(pi.size(), 0));
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = ti[truth[i]], b = pi[pred[i]];
      ++cells[a][b];
      ++row_sums[a];
      ++col_sums[b];
    }
  }
};

namespace detail {

inline double entropy(std::span<const std::size_t> sums, std::size_t n) {
  double h = 0;
  for (auto s : sums)
    if (s > 0) {
      const double p = static_cast<double>(s) / static_cast<double>(n);
      h -= p * std::log(p);
    }
  return h;
}

inline double pairs(double x) { return x * (x - 1) / 2; }

/// Expected mutual information under the hypergeometric model of random
/// labelings with fixed cluster sizes.
inline double expected_mutual_information(const Contingency& t) {
  const double n = static_cast<double>(t.n);
  const double lg_n = std::lgamma(n + 1);
  double emi = 0;
  for (auto ai : t.row_sums) {
    for (auto bj : t.col_sums) {
      const double a = static_cast<double>(ai), b = static_cast<double>(bj);
      const double fixed = std::lgamma(a + 1) + std::lgamma(b + 1) + std::lgamma(n - a + 1) + std::lgamma(n - b + 1) - lg_n;
      const auto lo = static_cast<std::size_t>(std::max(1.0, a + b - n));
      const auto hi = std::min(ai, bj);
      for (std::size_t nij = lo; nij <= hi; ++nij) {
        const double v = static_cast<double>(nij);
        const double log_p = fixed - std::lgamma(v + 1) - std::lgamma(a - v + 1) - std::lgamma(b - v + 1) -
                             std::lgamma(n - a - b + v + 1);
        emi += (v / n) * std::log(n * v / (a * b)) * std::exp(log_p);
      }
    }
  }
  return emi;
}

} // namespace detail

/// ARI, NMI and AMI (arithmetic-mean normalization), V-measure, homogeneity,
/// completeness and Fowlkes-Mallows, all with natural logarithms.
///
/// Degenerate cases: when both partitions are a single cluster, or both put
/// every point in its own cluster, the partitions agree and ARI, NMI, AMI
/// and FM are 1. Homogeneity (completeness) is 1 when the truth (predicted)
/// partition has a single cluster.
inline ClusterReport clustering_metrics(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw UsageError("clustering_metrics: label vectors differ in length");
  if (pred.empty()) throw UsageError("clustering_metrics: empty label vectors");

  const Contingency t(truth, pred);
  const double n = static_cast<double>(t.n);
  const std::size_t kc = t.row_sums.size(), kk = t.col_sums.size();
  const bool trivial = (kc == 1 && kk == 1) || (kc == t.n && kk == t.n);

  double sum_cells = 0, sum_sq_cells = 0;
  for (const auto& row : t.cells)
    for (auto c : row) {
      sum_cells += detail::pairs(static_cast<double>(c));
      sum_sq_cells += static_cast<double>(c) * static_cast<double>(c);
    }
  double sum_rows = 0, sum_sq_rows = 0;
  for (auto a : t.row_sums) {
    sum_rows += detail::pairs(static_cast<double>(a));
    sum_sq_rows += static_cast<double>(a) * static_cast<double>(a);
  }
  double sum_cols = 0, sum_sq_cols = 0;
  for (auto b : t.col_sums) {
    sum_cols += detail::pairs(static_cast<double>(b));
    sum_sq_cols += static_cast<double>(b) * static_cast<double>(b);
  }

  ClusterReport r;
  const double expected = t.n > 1 ? sum_rows * sum_cols / detail::pairs(n) : 0.0;
  const double max_index = (sum_rows + sum_cols) / 2;
  r.ari = max_index == expected ? 1.0 : (sum_cells - expected) / (max_index - expected);

  double mi = 0;
  for (std::size_t i = 0; i < kc; ++i)
    for (std::size_t j = 0; j < kk; ++j) {
      const auto c = t.cells[i][j];
      if (c == 0) continue;
      const double v = static_cast<double>(c);
      mi += (v / n) * std::log(n * v / (static_cast<double>(t.row_sums[i]) * static_cast<double>(t.col_sums[j])));
    }
  mi = std::max(mi, 0.0);
  const double h_true = detail::entropy(t.row_sums, t.n);
  const double h_pred = detail::entropy(t.col_sums, t.n);

  r.homogeneity = h_true == 0 ? 1.0 : mi / h_true;
  r.completeness = h_pred == 0 ? 1.0 : mi / h_pred;
  r.v_measure = r.homogeneity + r.completeness == 0
                    ? 0.0
                    : 2 * r.homogeneity * r.completeness / (r.homogeneity + r.completeness);

  const double mean_h = (h_true + h_pred) / 2;
  if (trivial) {
    r.nmi = 1.0;
    r.ami = 1.0;
  } else {
    r.nmi = mean_h == 0 ? 0.0 : mi / mean_h;
    const double emi = detail::expected_mutual_information(t);
    r.ami = (mi - emi) / (mean_h - emi);
  }

  // Pair precision = tk / pk, recall = tk / qk.
  const double tk = sum_sq_cells - n, pk = sum_sq_cols - n, qk = sum_sq_rows - n;
  if (pk == 0 && qk == 0)
    r.fowlkes_mallows = 1.0;
  else
    r.fowlkes_mallows = tk == 0 ? 0.0 : std::sqrt(tk / pk) * std::sqrt(tk / qk);
  return r;
}

// ---------------------------------------------------------------------------
// Entity clustering against most-generic classes

struct EntityClusteringResult {
  ClusterReport report;
  std::size_t entities = 0;     // evaluated
  std::size_t classes = 0;      // k
  std::size_t multi_root = 0;   // excluded: several most-generic classes
  std::size_t untyped = 0;      // excluded: no type
  std::vector<EntityId> ids;
  std::vector<int> truth;       // class id per evaluated entity
  std::vector<int> predicted;
};

/// Ground truth is each entity's single most-generic class; entities with
/// several (or none) are left out. k equals the number of remaining classes.
template <class Real>
EntityClusteringResult entity_clustering_eval(const BasicParams<Real>& params, const Schema& schema,
                                              std::uint64_t seed, const KMeansOptions& opt = {}) {
  EntityClusteringResult out;
  std::set<int> classes;
  for (std::size_t i = 0; i < params.num_entities; ++i) {
    const auto e = id_at<EntityId>(i);
    const auto roots = most_generic_classes(e, schema);
    if (roots.empty()) {
      ++out.untyped;
      continue;
    }
    if (roots.size() > 1) {
      ++out.multi_root;
      continue;
    }
    out.ids.push_back(e);
    out.truth.push_back(static_cast<int>(index_of(*roots.begin())));
    classes.insert(out.truth.back());
  }
  if (classes.size() < 2)
    throw DataError("entity clustering needs at least 2 most-generic classes, found " + std::to_string(classes.size()));
  out.entities = out.ids.size();
  out.classes = classes.size();
  const Matrix x = entity_matrix(params, out.ids);
  const auto km = kmeans(x, out.classes, seed, opt);
  out.predicted = km.labels;
  out.report = clustering_metrics(out.predicted, out.truth);
  return out;
}

} // namespace maschine
