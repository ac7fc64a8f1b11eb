#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "maschine/error.hpp"
#include "maschine/matrix.hpp"
#include "maschine/random.hpp"

namespace maschine {

/// k nearest neighbours by Euclidean distance, majority vote. Distance ties
/// prefer the lower training index; vote ties the lower label.
inline std::vector<int> knn_predict(const Matrix& train_x, std::span<const int> train_y, const Matrix& test_x,
                                    std::size_t k = 5) {
  if (train_x.rows != train_y.size()) throw UsageError("knn: feature and label counts differ");
  if (train_x.rows == 0 || k == 0) throw UsageError("knn: needs training points and k >= 1");
  if (test_x.rows > 0 && test_x.cols != train_x.cols) throw UsageError("knn: feature widths differ");
  k = std::min(k, train_x.rows);
  std::vector<int> out(test_x.rows);
  std::vector<std::pair<double, std::size_t>> d(train_x.rows);
  for (std::size_t i = 0; i < test_x.rows; ++i) {
    for (std::size_t j = 0; j < train_x.rows; ++j) d[j] = {squared_distance(test_x.row(i), train_x.row(j)), j};
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    std::map<int, std::size_t> votes;
    for (std::size_t j = 0; j < k; ++j) ++votes[train_y[d[j].second]];
    int best = votes.begin()->first;
    std::size_t most = 0;
    for (auto [label, n] : votes)
      if (n > most) {
        most = n;
        best = label;
      }
    out[i] = best;
  }
  return out;
}

struct LogRegOptions {
  int iterations = 500;
  double learning_rate = 0.1;
  double l2 = 1e-4;
};

/// Multinomial logistic regression fit by full-batch gradient descent on
/// mean cross-entropy plus (l2 / 2) * |W|^2. Biases are not penalized.
class LogisticRegression {
public:
  LogisticRegression() = default;

  LogisticRegression(const Matrix& x, std::span<const int> y, const LogRegOptions& opt = {}) { fit(x, y, opt); }

  void fit(const Matrix& x, std::span<const int> y, const LogRegOptions& opt = {}) {
    if (x.rows != y.size()) throw UsageError("logistic regression: feature and label counts differ");
    const std::set<int> distinct(y.begin(), y.end());
    labels_.assign(distinct.begin(), distinct.end());
    if (labels_.size() < 2) throw UsageError("logistic regression: needs at least 2 classes in training labels");
    const std::size_t n = x.rows, d = x.cols, c = labels_.size();
    std::vector<std::size_t> yi(n);
    for (std::size_t i = 0; i < n; ++i)
      yi[i] = static_cast<std::size_t>(std::lower_bound(labels_.begin(), labels_.end(), y[i]) - labels_.begin());

    w_ = Matrix(c, d);
    b_.assign(c, 0.0);
    Matrix gw(c, d);
    std::vector<double> gb(c), p(c);
    for (int it = 0; it < opt.iterations; ++it) {
      std::fill(gw.data.begin(), gw.data.end(), 0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        probabilities(x.row(i), p);
        p[yi[i]] -= 1.0;
        for (std::size_t k = 0; k < c; ++k) {
          gb[k] += p[k];
          auto g = gw.row(k);
          const auto xi = x.row(i);
          for (std::size_t j = 0; j < d; ++j) g[j] += p[k] * xi[j];
        }
      }
      const double inv = 1.0 / static_cast<double>(n);
      for (std::size_t k = 0; k < c; ++k) {
        b_[k] -= opt.learning_rate * gb[k] * inv;
        for (std::size_t j = 0; j < d; ++j) w_(k, j) -= opt.learning_rate * (gw(k, j) * inv + opt.l2 * w_(k, j));
      }
    }
  }

  std::vector<int> predict(const Matrix& x) const {
    if (labels_.empty()) throw UsageError("logistic regression: predict before fit");
    if (x.rows > 0 && x.cols != w_.cols) throw UsageError("logistic regression: feature widths differ");
    std::vector<int> out(x.rows);
    std::vector<double> p(labels_.size());
    for (std::size_t i = 0; i < x.rows; ++i) {
      probabilities(x.row(i), p);
      out[i] = labels_[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())];
    }
    return out;
  }

  const std::vector<int>& labels() const { return labels_; }

private:
  void probabilities(std::span<const double> xi, std::vector<double>& p) const {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < labels_.size(); ++k) {
      double s = b_[k];
      const auto w = w_.row(k);
      for (std::size_t j = 0; j < xi.size(); ++j) s += w[j] * xi[j];
      p[k] = s;
      top = std::max(top, s);
    }
    double z = 0;
    for (auto& v : p) z += (v = std::exp(v - top));
    for (auto& v : p) v /= z;
  }

  std::vector<int> labels_;
  Matrix w_;
  std::vector<double> b_;
};

/// Macro-averaged F1 over every label seen in either vector. A label that is
/// never predicted contributes F = 0.
inline double macro_f1(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) throw UsageError("macro_f1: label vectors differ in length");
  if (truth.empty()) throw UsageError("macro_f1: empty label vectors");
  std::set<int> labels(truth.begin(), truth.end());
  labels.insert(pred.begin(), pred.end());
  double sum = 0;
  for (int l : labels) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (pred[i] == l && truth[i] == l) ++tp;
      else if (pred[i] == l) ++fp;
      else if (truth[i] == l) ++fn;
    }
    if (tp > 0) sum += 2.0 * double(tp) / double(2 * tp + fp + fn);
  }
  return sum / static_cast<double>(labels.size());
}

struct NCReport {
  std::map<std::string, double> f1; // per classifier
  std::string best;
  double best_f1 = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t unseen_test_labels = 0; // test labels absent from training
};

/// Fits both classifiers and reports macro-F1 for each; the best one wins,
/// ties going to the first in name order.
inline NCReport nc_eval(const Matrix& train_x, std::span<const int> train_y, const Matrix& test_x,
                        std::span<const int> test_y, const LogRegOptions& opt = {}, std::size_t k = 5) {
  if (std::set<int>(train_y.begin(), train_y.end()).size() < 2)
    throw UsageError("node classification needs at least 2 classes in the training labels");
  if (test_x.rows != test_y.size()) throw UsageError("node classification: test feature and label counts differ");
  NCReport rep;
  rep.train_size = train_x.rows;
  rep.test_size = test_x.rows;
  const std::set<int> seen(train_y.begin(), train_y.end());
  for (int l : std::set<int>(test_y.begin(), test_y.end()))
    if (!seen.contains(l)) ++rep.unseen_test_labels;

  rep.f1["knn"] = macro_f1(test_y, knn_predict(train_x, train_y, test_x, k));
  rep.f1["logreg"] = macro_f1(test_y, LogisticRegression(train_x, train_y, opt).predict(test_x));
  for (const auto& [name, f] : rep.f1)
    if (rep.best.empty() || f > rep.best_f1) {
      rep.best = name;
      rep.best_f1 = f;
    }
  return rep;
}

/// Stratified split of row indices: within each label, a shuffled
/// round(test_fraction * count) rows go to test, keeping at least one row
/// in train.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

inline Split stratified_split(std::span<const int> labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0 && test_fraction < 1)) throw UsageError("test fraction must be in (0, 1)");
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(i);
  Rng rng(seed);
  Split s;
  for (auto& [label, rows] : by_label) {
    rng.shuffle(rows.begin(), rows.end());
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
    n_test = std::min(n_test, rows.size() - 1);
    s.test.insert(s.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.insert(s.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

} // namespace maschine
