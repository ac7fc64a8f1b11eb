#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maschine/error.hpp"
#include "maschine/graph.hpp"
#include "maschine/link_prediction.hpp"
#include "maschine/model.hpp"
#include "maschine/protograph.hpp"
#include "maschine/random.hpp"
#include "maschine/schema.hpp"

namespace maschine {

/// V trains on the KG from random vectors; P1/P2 pre-train on the
/// corresponding protograph first.
enum class Setting { vanilla, p1, p2 };

inline std::string_view to_string(Setting s) {
  switch (s) {
  case Setting::vanilla: return "V";
  case Setting::p1: return "P1";
  case Setting::p2: return "P2";
  }
  return "?";
}

inline Setting parse_setting(std::string_view s) {
  if (s == "V" || s == "v" || s == "vanilla") return Setting::vanilla;
  if (s == "P1" || s == "p1") return Setting::p1;
  if (s == "P2" || s == "p2") return Setting::p2;
  throw UsageError("unknown setting '" + std::string(s) + "' (expected V, P1 or P2)");
}

enum class OptimizerKind { adam, sgd };

inline std::string_view to_string(OptimizerKind o) { return o == OptimizerKind::adam ? "adam" : "sgd"; }

inline OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd") return OptimizerKind::sgd;
  throw UsageError("unknown optimizer '" + std::string(s) + "'");
}

enum class LossKind { margin_ranking, softplus, one_to_n_bce };

/// Each model keeps the loss it was introduced with.
constexpr LossKind loss_for(ModelKind m) {
  switch (m) {
  case ModelKind::transe:
  case ModelKind::distmult: return LossKind::margin_ranking;
  case ModelKind::complex: return LossKind::softplus;
  case ModelKind::tucker: return LossKind::one_to_n_bce;
  }
  return LossKind::margin_ranking;
}

struct TrainConfig {
  ModelKind model = ModelKind::transe;
  Setting setting = Setting::vanilla;
  std::size_t dim = 100;
  int epochs_kg = 400;
  int epochs_proto = 200;
  int eval_every = 10;
  std::size_t batch_size = 512;
  double learning_rate = 1e-3;
  int negatives_per_positive = 1;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::uint64_t seed = 0;
  double margin = 1.0;
  double label_smoothing = 0.1;
  int transe_norm = 2;
  /// Project TransE entity vectors back onto the unit sphere after each
  /// update, as the original TransE training procedure does.
  bool transe_unit_entities = true;
  unsigned threads = 1;

  void validate() const {
    if (dim == 0) throw UsageError("dim must be positive");
    if (epochs_kg < 0 || epochs_proto < 0) throw UsageError("epoch counts must be non-negative");
    if (eval_every <= 0) throw UsageError("eval_every must be positive");
    if (epochs_kg % eval_every != 0)
      throw UsageError("eval_every (" + std::to_string(eval_every) + ") must divide epochs_kg (" +
                       std::to_string(epochs_kg) + ")");
    if (batch_size == 0) throw UsageError("batch_size must be positive");
    if (negatives_per_positive <= 0) throw UsageError("negatives_per_positive must be positive");
    if (!(learning_rate > 0)) throw UsageError("learning_rate must be positive");
    if (transe_norm != 1 && transe_norm != 2) throw UsageError("transe_norm must be 1 or 2");
    if (label_smoothing < 0 || label_smoothing >= 1) throw UsageError("label_smoothing must be in [0, 1)");
  }
};

// ---------------------------------------------------------------------------
// Negative sampling

/// Replaces head or tail (fair coin) with a uniformly drawn entity, redrawing
/// until the result differs from the input.
inline Triple sample_negative(const Triple& t, std::size_t num_entities, Rng& rng) {
  if (num_entities < 2) throw UsageError("negative sampling needs at least two entities");
  Triple out = t;
  if (rng.coin()) {
    do out.head = id_at<EntityId>(rng.below(num_entities));
    while (out.head == t.head);
  } else {
    do out.tail = id_at<EntityId>(rng.below(num_entities));
    while (out.tail == t.tail);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gradient accumulation

/// Dense gradient storage shaped like the parameters, with a record of the
/// rows written since the last clear().
template <class Real>
class GradientBuffer {
public:
  explicit GradientBuffer(const BasicParams<Real>& p)
      : width_(p.width()), entities_(p.entities.size()), relations_(p.relations.size()), core_(p.core.size()),
        entity_mark_(p.num_entities, 0), relation_mark_(p.relation_rows(), 0) {}

  std::span<Real> entity(std::size_t i) {
    if (!entity_mark_[i]) {
      entity_mark_[i] = 1;
      touched_entities_.push_back(i);
    }
    return {entities_.data() + i * width_, width_};
  }

  std::span<Real> relation(std::size_t r) {
    if (!relation_mark_[r]) {
      relation_mark_[r] = 1;
      touched_relations_.push_back(r);
    }
    return {relations_.data() + r * width_, width_};
  }

  std::span<Real> core() {
    core_touched_ = !core_.empty();
    return core_;
  }

  std::span<const Real> entity_row(std::size_t i) const { return {entities_.data() + i * width_, width_}; }
  std::span<const Real> relation_row(std::size_t r) const { return {relations_.data() + r * width_, width_}; }
  std::span<const Real> core_values() const { return core_; }

  const std::vector<std::size_t>& touched_entities() const { return touched_entities_; }
  const std::vector<std::size_t>& touched_relations() const { return touched_relations_; }
  bool core_touched() const { return core_touched_; }

  void clear() {
    for (auto i : touched_entities_) {
      std::fill_n(entities_.begin() + i * width_, width_, Real(0));
      entity_mark_[i] = 0;
    }
    for (auto r : touched_relations_) {
      std::fill_n(relations_.begin() + r * width_, width_, Real(0));
      relation_mark_[r] = 0;
    }
    if (core_touched_) std::fill(core_.begin(), core_.end(), Real(0));
    touched_entities_.clear();
    touched_relations_.clear();
    core_touched_ = false;
  }

private:
  std::size_t width_;
  std::vector<Real> entities_, relations_, core_;
  std::vector<char> entity_mark_, relation_mark_;
  std::vector<std::size_t> touched_entities_, touched_relations_;
  bool core_touched_ = false;
};

/// Adds upstream * d score(h, r, t) into the buffer.
template <class Real>
void add_score_grad(const BasicParams<Real>& p, const Triple& t, Real upstream, GradientBuffer<Real>& g) {
  const std::size_t r = index_of(t.relation);
  // Touch the tail after the head so h == t accumulates into one row.
  auto gh = g.entity(index_of(t.head));
  auto gr = g.relation(r);
  auto gt = g.entity(index_of(t.tail));
  std::span<Real> gc = p.kind == ModelKind::tucker ? g.core() : std::span<Real>{};
  accumulate_score_grad<Real, Real, Real>(p, p.entity(index_of(t.head)), p.relation(r), p.entity(index_of(t.tail)),
                                          upstream, gh, gr, gt, gc);
}

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Binary cross-entropy of logit `s` against soft target `y`. Minimal at
/// sigmoid(s) = y, where it equals the binary entropy of y.
inline double soft_bce(double s, double y) { return y * softplus(-s) + (1 - y) * softplus(s); }

// ---------------------------------------------------------------------------
// Losses. Each returns the batch-mean loss and adds its gradient into `g`.

/// mean over pairs of max(0, margin + s(neg) - s(pos)). Negative j is paired
/// with positive j / (neg.size() / pos.size()).
template <class Real>
double margin_loss_and_grads(const BasicParams<Real>& p, std::span<const Triple> pos, std::span<const Triple> neg,
                             double margin, GradientBuffer<Real>& g) {
  if (pos.empty() || neg.empty() || neg.size() % pos.size() != 0)
    throw UsageError("margin loss: negatives must be a nonzero multiple of positives");
  const std::size_t per = neg.size() / pos.size();
  const Real scale = Real(1.0 / static_cast<double>(neg.size()));
  double total = 0;
  for (std::size_t j = 0; j < neg.size(); ++j) {
    const Triple& tp = pos[j / per];
    const double sp = score<Real>(p, tp);
    const double sn = score<Real>(p, neg[j]);
    const double l = margin + sn - sp;
    if (l <= 0) continue;
    total += l;
    add_score_grad(p, neg[j], scale, g);
    add_score_grad(p, tp, Real(-scale), g);
  }
  return total / static_cast<double>(neg.size());
}

/// mean over all triples of log(1 + exp(-y s)), y = +1 for positives and
/// -1 for negatives.
template <class Real>
double softplus_loss_and_grads(const BasicParams<Real>& p, std::span<const Triple> pos, std::span<const Triple> neg,
                               GradientBuffer<Real>& g) {
  const std::size_t n = pos.size() + neg.size();
  if (n == 0) throw UsageError("softplus loss: empty batch");
  const double inv = 1.0 / static_cast<double>(n);
  double total = 0;
  auto term = [&](const Triple& t, double y) {
    const double s = score<Real>(p, t);
    total += softplus(-y * s);
    // d/ds log(1 + exp(-y s)) = -y sigmoid(-y s)
    add_score_grad(p, t, Real(-y * sigmoid(-y * s) * inv), g);
  };
  for (const auto& t : pos) term(t, 1.0);
  for (const auto& t : neg) term(t, -1.0);
  return total * inv;
}

/// A 1-N training query: subject, relation row (possibly reciprocal) and the
/// sorted set of true objects.
struct OneToNQuery {
  EntityId subject{};
  std::size_t relation = 0;
  std::vector<EntityId> objects;
};

/// Builds (h, r) -> tails queries plus reciprocal (t, r^-1) -> heads
/// queries when the params carry reciprocal relations. Sorted by key.
template <class Real>
std::vector<OneToNQuery> build_one_to_n_queries(std::span<const Triple> train, const BasicParams<Real>& p) {
  std::map<std::pair<std::size_t, std::size_t>, std::vector<EntityId>> groups;
  for (const auto& t : train) {
    groups[{index_of(t.head), index_of(t.relation)}].push_back(t.tail);
    if (p.reciprocal) groups[{index_of(t.tail), p.inverse(index_of(t.relation))}].push_back(t.head);
  }
  std::vector<OneToNQuery> out;
  out.reserve(groups.size());
  for (auto& [key, objs] : groups) {
    std::sort(objs.begin(), objs.end());
    objs.erase(std::unique(objs.begin(), objs.end()), objs.end());
    out.push_back({id_at<EntityId>(key.first), key.second, std::move(objs)});
  }
  return out;
}

/// Binary cross-entropy of every entity as a candidate object, with targets
/// (1 - smoothing) * y + smoothing / N. Mean over queries and candidates.
template <class Real>
double one_to_n_loss_and_grads(const BasicParams<Real>& p, std::span<const OneToNQuery> queries, double smoothing,
                               GradientBuffer<Real>& g) {
  if (queries.empty()) throw UsageError("1-N loss: empty batch");
  const std::size_t n = p.num_entities;
  const std::size_t w = p.width();
  const double inv = 1.0 / (static_cast<double>(n) * static_cast<double>(queries.size()));
  const double off = smoothing / static_cast<double>(n);
  const double on = 1.0 - smoothing + off;
  const bool linear = linear_in_tail(p.kind);

  std::vector<Real> scores(n);
  std::vector<Real> q(w);
  std::vector<Real> direction(w); // sum_i g_i e_i
  std::vector<Real> sink(w);
  std::vector<char> is_true(n, 0);
  double total = 0;

  for (const auto& query : queries) {
    if (linear) {
      tail_query_vector<Real>(p, query.subject, query.relation, std::span<Real>(q));
      for (std::size_t i = 0; i < n; ++i) scores[i] = kernel::dot<Real, Real>(p.entity(i), std::span<const Real>(q));
    } else {
      score_all_tails<Real>(p, query.subject, query.relation, std::span<Real>(scores));
    }
    for (EntityId o : query.objects) is_true[index_of(o)] = 1;
    std::fill(direction.begin(), direction.end(), Real(0));

    for (std::size_t i = 0; i < n; ++i) {
      const double s = scores[i];
      const double y = is_true[i] ? on : off;
      total += soft_bce(s, y);
      const Real gi = Real((sigmoid(s) - y) * inv);
      if (linear) {
        // d s_i / d e_i = q; the (h, r, core) part is folded into `direction`.
        auto ge = g.entity(i);
        const auto ei = p.entity(i);
        for (std::size_t k = 0; k < w; ++k) {
          ge[k] += gi * q[k];
          direction[k] += gi * ei[k];
        }
      } else {
        add_score_grad(p, {query.subject, id_at<RelationId>(query.relation), id_at<EntityId>(i)}, gi, g);
      }
    }
    if (linear) {
      // Linearity in the tail: sum_i g_i ds_i/d(h, r, W) = ds/d(h, r, W) at t = direction.
      auto gh = g.entity(index_of(query.subject));
      auto gr = g.relation(query.relation);
      std::span<Real> gc = p.kind == ModelKind::tucker ? g.core() : std::span<Real>{};
      accumulate_score_grad<Real, Real, Real>(p, p.entity(index_of(query.subject)), p.relation(query.relation),
                                              std::span<const Real>(direction), Real(1), gh, gr,
                                              std::span<Real>(sink), gc);
    }
    for (EntityId o : query.objects) is_true[index_of(o)] = 0;
  }
  return total * inv;
}

// ---------------------------------------------------------------------------
// Optimizer

/// Adam (beta1 0.9, beta2 0.999, eps 1e-8) or plain SGD. Only rows present in
/// the gradient buffer are updated; bias correction uses the global step.
template <class Real>
class Optimizer {
public:
  Optimizer(const BasicParams<Real>& p, OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {
    if (kind_ == OptimizerKind::adam) {
      m_e_.assign(p.entities.size(), 0);
      v_e_.assign(p.entities.size(), 0);
      m_r_.assign(p.relations.size(), 0);
      v_r_.assign(p.relations.size(), 0);
      m_c_.assign(p.core.size(), 0);
      v_c_.assign(p.core.size(), 0);
    }
  }

  void step(BasicParams<Real>& p, const GradientBuffer<Real>& g) {
    ++t_;
    const std::size_t w = p.width();
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    auto update = [&](std::span<Real> x, std::span<const Real> grad, Real* m, Real* v) {
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double gk = grad[k];
        if (kind_ == OptimizerKind::sgd) {
          x[k] = Real(x[k] - lr_ * gk);
          continue;
        }
        m[k] = Real(kBeta1 * m[k] + (1 - kBeta1) * gk);
        v[k] = Real(kBeta2 * v[k] + (1 - kBeta2) * gk * gk);
        const double mh = m[k] / c1;
        const double vh = v[k] / c2;
        x[k] = Real(x[k] - lr_ * mh / (std::sqrt(vh) + kEps));
      }
    };
    const bool adam = kind_ == OptimizerKind::adam;
    for (auto i : g.touched_entities())
      update(p.entity(i), g.entity_row(i), adam ? m_e_.data() + i * w : nullptr, adam ? v_e_.data() + i * w : nullptr);
    for (auto r : g.touched_relations())
      update(p.relation(r), g.relation_row(r), adam ? m_r_.data() + r * w : nullptr,
             adam ? v_r_.data() + r * w : nullptr);
    if (g.core_touched()) update(p.core, g.core_values(), adam ? m_c_.data() : nullptr, adam ? v_c_.data() : nullptr);
  }

private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  OptimizerKind kind_;
  double lr_;
  std::uint64_t t_ = 0;
  std::vector<Real> m_e_, v_e_, m_r_, v_r_, m_c_, v_c_;
};

// ---------------------------------------------------------------------------
// Training loop

template <class Real>
struct TrainResult {
  BasicParams<Real> best;  // best validation MRR, or the final params without validation
  int best_epoch = 0;
  double best_valid_mrr = 0;
  bool validated = false;
  BasicParams<Real> final_params;
  std::vector<double> epoch_loss;                // index e holds epoch e+1
  std::vector<std::pair<int, double>> validation; // (epoch, filtered MRR)
};

struct TrainHooks {
  std::function<void(int epoch, double loss)> on_epoch;
  std::function<void(int epoch, double mrr)> on_validation;
};

/// Runs `epochs` epochs over g.train starting from `params`.
///
/// Negative-sampling models shuffle the triples each epoch and pair each
/// positive with `negatives_per_positive` corruptions; TuckER trains 1-N over
/// (subject, relation) queries including reciprocals. When g.valid is
/// nonempty, filtered MRR is measured every `eval_every` epochs and the best
/// params are kept (earliest wins ties).
template <class Real>
TrainResult<Real> train(const GraphView& g, int epochs, const TrainConfig& cfg, BasicParams<Real> params,
                        std::uint64_t stream_seed, const TrainHooks* hooks = nullptr) {
  if (params.num_entities != g.num_entities || params.num_relations != g.num_relations)
    throw UsageError("train: parameter shape does not match the graph");
  TrainResult<Real> result;
  if (epochs <= 0) {
    result.best = params;
    result.final_params = std::move(params);
    return result;
  }
  if (g.train.empty()) throw UsageError("train: no training triples");

  Rng rng(stream_seed);
  Optimizer<Real> opt(params, cfg.optimizer, cfg.learning_rate);
  GradientBuffer<Real> grads(params);
  const LossKind loss = loss_for(params.kind);
  const bool unit_entities = params.kind == ModelKind::transe && cfg.transe_unit_entities;
  if (unit_entities)
    for (std::size_t i = 0; i < params.num_entities; ++i) normalize_row(params.entity(i));

  std::optional<FilterIndex> filter;
  if (!g.valid.empty()) filter.emplace(g);

  std::vector<OneToNQuery> queries;
  if (loss == LossKind::one_to_n_bce) queries = build_one_to_n_queries(g.train, params);
  const std::size_t units = loss == LossKind::one_to_n_bce ? queries.size() : g.train.size();
  std::vector<std::size_t> order(units);
  for (std::size_t i = 0; i < units; ++i) order[i] = i;

  std::vector<Triple> pos, neg;
  std::vector<OneToNQuery> qbatch;
  const std::size_t per = static_cast<std::size_t>(cfg.negatives_per_positive);

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double epoch_total = 0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < units; start += cfg.batch_size, ++batch_no) {
      const std::size_t end = std::min(units, start + cfg.batch_size);
      double l = 0;
      if (loss == LossKind::one_to_n_bce) {
        qbatch.clear();
        for (std::size_t i = start; i < end; ++i) qbatch.push_back(queries[order[i]]);
        l = one_to_n_loss_and_grads<Real>(params, qbatch, cfg.label_smoothing, grads);
      } else {
        pos.clear();
        neg.clear();
        for (std::size_t i = start; i < end; ++i) {
          pos.push_back(g.train[order[i]]);
          for (std::size_t k = 0; k < per; ++k) neg.push_back(sample_negative(pos.back(), g.num_entities, rng));
        }
        l = loss == LossKind::margin_ranking ? margin_loss_and_grads<Real>(params, pos, neg, cfg.margin, grads)
                                             : softplus_loss_and_grads<Real>(params, pos, neg, grads);
      }
      if (!std::isfinite(l))
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_no));
      epoch_total += l * static_cast<double>(end - start);
      opt.step(params, grads);
      if (unit_entities)
        for (auto i : grads.touched_entities()) normalize_row(params.entity(i));
      grads.clear();
    }
    const double epoch_loss = epoch_total / static_cast<double>(units);
    result.epoch_loss.push_back(epoch_loss);
    if (hooks && hooks->on_epoch) hooks->on_epoch(epoch, epoch_loss);

    if (filter && (epoch % cfg.eval_every == 0 || epoch == epochs)) {
      const double m = filtered_mrr(params, g.valid, *filter, cfg.threads);
      result.validation.emplace_back(epoch, m);
      if (hooks && hooks->on_validation) hooks->on_validation(epoch, m);
      if (!result.validated || m > result.best_valid_mrr) {
        result.validated = true;
        result.best_valid_mrr = m;
        result.best_epoch = epoch;
        result.best = params;
      }
    }
  }
  if (!params.all_finite()) throw NumericalError("non-finite parameters after training");
  if (!result.validated) {
    result.best = params;
    result.best_epoch = epochs;
  }
  result.final_params = std::move(params);
  return result;
}

// ---------------------------------------------------------------------------
// Transfer

struct TransferReport {
  std::size_t copied = 0;   // one protograph class
  std::size_t averaged = 0; // several protograph classes
  std::size_t random = 0;   // untyped, or no mapped class in the protograph
  std::vector<EntityId> flagged;
};

/// Initializes KG parameters from protograph parameters.
///
/// Each entity takes the vector of its mapped class, or the mean over its
/// mapped classes that are protograph nodes. Entities with none get a fresh
/// Xavier-uniform row drawn from `seed` and are flagged. Relation rows and
/// the core tensor are copied as is.
template <class Real>
BasicParams<Real> transfer(const BasicParams<Real>& proto, const Protograph& pg, const MappingDictionary& mapping,
                           std::size_t num_entities, std::uint64_t seed, TransferReport* report = nullptr) {
  if (proto.num_entities != pg.nodes().size())
    throw DataError("transfer: protograph params have " + std::to_string(proto.num_entities) + " rows but the " +
                    "protograph has " + std::to_string(pg.nodes().size()) + " nodes");
  if (proto.num_relations != pg.num_relations())
    throw DataError("transfer: relation count mismatch between params and protograph");
  if (proto.entities.size() != proto.num_entities * proto.width() ||
      proto.relations.size() != proto.relation_rows() * proto.width())
    throw DataError("transfer: parameter dimensions are inconsistent");

  BasicParams<Real> out;
  out.kind = proto.kind;
  out.dim = proto.dim;
  out.num_entities = num_entities;
  out.num_relations = proto.num_relations;
  out.reciprocal = proto.reciprocal;
  out.transe_norm = proto.transe_norm;
  out.relations = proto.relations;
  out.core = proto.core;
  out.entities.assign(num_entities * out.width(), Real(0));

  TransferReport rep;
  Rng rng(seed);
  std::vector<double> acc(out.width());
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < num_entities; ++i) {
    const auto e = id_at<EntityId>(i);
    rows.clear();
    if (auto it = mapping.mapped.find(e); it != mapping.mapped.end())
      for (ClassId c : it->second)
        if (auto row = pg.row_of(c)) rows.push_back(*row);
    auto dst = out.entity(i);
    if (rows.empty()) {
      init_row<Real>(dst, out.dim, rng);
      ++rep.random;
      rep.flagged.push_back(e);
      continue;
    }
    if (rows.size() == 1) {
      const auto src = proto.entity(rows[0]);
      std::copy(src.begin(), src.end(), dst.begin());
      ++rep.copied;
      continue;
    }
    std::fill(acc.begin(), acc.end(), 0.0);
    for (auto row : rows) {
      const auto src = proto.entity(row);
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += double(src[k]);
    }
    for (std::size_t k = 0; k < acc.size(); ++k) dst[k] = Real(acc[k] / static_cast<double>(rows.size()));
    ++rep.averaged;
  }
  if (report) *report = std::move(rep);
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

struct StageRecord {
  std::string name;
  double seconds = 0;
};

struct MaschineResult {
  TrainResult<float> kg;
  std::vector<StageRecord> stages;
  std::size_t proto_nodes = 0;
  std::size_t proto_triples = 0;
  std::vector<double> proto_epoch_loss;
  TransferReport transfer;
};

namespace seeds {
inline constexpr std::uint64_t kg_init = 1;
inline constexpr std::uint64_t proto_init = 2;
inline constexpr std::uint64_t transfer_fill = 3;
inline constexpr std::uint64_t kg_stream = 4;
inline constexpr std::uint64_t proto_stream = 5;
} // namespace seeds

/// V: random init, then train on the KG. P1/P2: build the protograph,
/// pre-train on it, transfer to the KG, then train on the KG. Protograph
/// parameters are dropped once transferred.
inline MaschineResult run_maschine(const KnowledgeGraph& kg, const Schema& schema, const TrainConfig& cfg,
                                   const TrainHooks* kg_hooks = nullptr, const TrainHooks* proto_hooks = nullptr) {
  cfg.validate();
  MaschineResult out;
  using clock = std::chrono::steady_clock;
  auto timed = [&](std::string name, auto&& fn) {
    const auto t0 = clock::now();
    fn();
    out.stages.push_back({std::move(name), std::chrono::duration<double>(clock::now() - t0).count()});
  };

  const GraphView view = kg.view();
  ModelParams init;
  if (cfg.setting == Setting::vanilla) {
    timed("init", [&] {
      init = init_params(cfg.model, view.num_entities, view.num_relations, cfg.dim, derive_seed(cfg.seed, seeds::kg_init));
      init.transe_norm = cfg.transe_norm;
    });
  } else {
    Protograph pg;
    timed("build-proto", [&] {
      pg = build_protograph(cfg.setting == Setting::p1 ? Heuristic::p1 : Heuristic::p2, schema, view.num_relations);
    });
    if (pg.triples().empty()) throw UsageError("protograph is empty; the schema declares no domain/range pairs");
    out.proto_nodes = pg.nodes().size();
    out.proto_triples = pg.triples().size();

    ModelParams proto;
    timed("train-proto", [&] {
      auto p0 = init_params(cfg.model, pg.nodes().size(), view.num_relations, cfg.dim,
                            derive_seed(cfg.seed, seeds::proto_init));
      p0.transe_norm = cfg.transe_norm;
      auto res = train(pg.view(), cfg.epochs_proto, cfg, std::move(p0), derive_seed(cfg.seed, seeds::proto_stream),
                       proto_hooks);
      out.proto_epoch_loss = std::move(res.epoch_loss);
      proto = std::move(res.final_params);
    });
    timed("transfer", [&] {
      const auto mapping = build_mapping(kg, schema);
      init = transfer(proto, pg, mapping, view.num_entities, derive_seed(cfg.seed, seeds::transfer_fill), &out.transfer);
    });
  }
  timed("train-kg", [&] {
    out.kg = train(view, cfg.epochs_kg, cfg, std::move(init), derive_seed(cfg.seed, seeds::kg_stream), kg_hooks);
  });
  return out;
}

} // namespace maschine
