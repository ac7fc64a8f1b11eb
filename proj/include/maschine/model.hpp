#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maschine/error.hpp"
#include "maschine/ids.hpp"
#include "maschine/random.hpp"

namespace maschine {

enum class ModelKind { transe, distmult, complex, tucker };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
  case ModelKind::transe: return "TransE";
  case ModelKind::distmult: return "DistMult";
  case ModelKind::complex: return "ComplEx";
  case ModelKind::tucker: return "TuckER";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "transe") return ModelKind::transe;
  if (lower == "distmult") return ModelKind::distmult;
  if (lower == "complex") return ModelKind::complex;
  if (lower == "tucker") return ModelKind::tucker;
  throw UsageError("unknown model '" + std::string(s) + "'");
}

/// Embedding parameter store shared by all models.
///
/// Row-major entity and relation matrices. ComplEx rows hold 2*dim values
/// with real and imaginary parts interleaved (re0, im0, re1, im1, ...).
/// With `reciprocal` set, the relation matrix carries a second block of
/// inverse relations: row r + num_relations answers (t, r^-1, ?) queries.
template <class Real>
struct BasicParams {
  ModelKind kind = ModelKind::transe;
  std::size_t dim = 0;
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;
  bool reciprocal = false;
  int transe_norm = 2;
  std::vector<Real> entities;
  std::vector<Real> relations;
  std::vector<Real> core; // dim^3, TuckER only, index (a*dim + b)*dim + c

  std::size_t width() const noexcept { return kind == ModelKind::complex ? 2 * dim : dim; }
  std::size_t relation_rows() const noexcept { return reciprocal ? 2 * num_relations : num_relations; }

  std::span<Real> entity(std::size_t i) { return {entities.data() + i * width(), width()}; }
  std::span<const Real> entity(std::size_t i) const { return {entities.data() + i * width(), width()}; }
  std::span<Real> relation(std::size_t r) { return {relations.data() + r * width(), width()}; }
  std::span<const Real> relation(std::size_t r) const { return {relations.data() + r * width(), width()}; }

  std::size_t inverse(std::size_t r) const noexcept { return r + num_relations; }

  template <class To>
  BasicParams<To> cast() const {
    BasicParams<To> out;
    out.kind = kind;
    out.dim = dim;
    out.num_entities = num_entities;
    out.num_relations = num_relations;
    out.reciprocal = reciprocal;
    out.transe_norm = transe_norm;
    out.entities.assign(entities.begin(), entities.end());
    out.relations.assign(relations.begin(), relations.end());
    out.core.assign(core.begin(), core.end());
    return out;
  }

  bool all_finite() const {
    auto finite = [](const std::vector<Real>& v) {
      return std::all_of(v.begin(), v.end(), [](Real x) { return std::isfinite(x); });
    };
    return finite(entities) && finite(relations) && finite(core);
  }

  friend bool operator==(const BasicParams&, const BasicParams&) = default;
};

using ModelParams = BasicParams<float>;

/// Xavier-uniform bound shared by entity and relation entries.
inline double init_bound(std::size_t dim) { return std::sqrt(6.0 / (2.0 * static_cast<double>(dim))); }

template <class Real>
void init_row(std::span<Real> row, std::size_t dim, Rng& rng) {
  const double b = init_bound(dim);
  for (auto& x : row) x = static_cast<Real>(rng.uniform(-b, b));
}

template <class Real>
void normalize_row(std::span<Real> row) {
  double n = 0;
  for (Real x : row) n += double(x) * double(x);
  n = std::sqrt(n);
  if (n > 0)
    for (auto& x : row) x = static_cast<Real>(x / n);
}

/// Xavier-uniform entity and relation entries; TransE relations are then
/// L2-normalized; the TuckER core is uniform in [-1, 1]. TuckER gets
/// reciprocal relations for 1-N training.
template <class Real = float>
BasicParams<Real> init_params(ModelKind kind, std::size_t num_entities, std::size_t num_relations,
                              std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw UsageError("embedding dimension must be positive");
  BasicParams<Real> p;
  p.kind = kind;
  p.dim = dim;
  p.num_entities = num_entities;
  p.num_relations = num_relations;
  p.reciprocal = kind == ModelKind::tucker;
  p.entities.resize(num_entities * p.width());
  p.relations.resize(p.relation_rows() * p.width());
  if (kind == ModelKind::tucker) p.core.resize(dim * dim * dim);

  Rng rng(seed);
  init_row<Real>(p.entities, dim, rng);
  init_row<Real>(p.relations, dim, rng);
  if (kind == ModelKind::transe)
    for (std::size_t r = 0; r < p.relation_rows(); ++r) normalize_row(p.relation(r));
  for (auto& w : p.core) w = static_cast<Real>(rng.uniform(-1.0, 1.0));
  return p;
}

// ---------------------------------------------------------------------------
// Scoring. Higher is more plausible for every model.

namespace kernel {

template <class Acc, class Real>
Acc transe(std::span<const Real> h, std::span<const Real> r, std::span<const Real> t, int norm) {
  Acc s = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Acc x = Acc(h[i]) + Acc(r[i]) - Acc(t[i]);
    s += norm == 1 ? std::abs(x) : x * x;
  }
  return norm == 1 ? -s : -std::sqrt(s);
}

template <class Acc, class Real>
Acc distmult(std::span<const Real> h, std::span<const Real> r, std::span<const Real> t) {
  Acc s = 0;
  // h * t first, so swapping head and tail gives a bit-identical score.
  for (std::size_t i = 0; i < h.size(); ++i) s += Acc(h[i]) * Acc(t[i]) * Acc(r[i]);
  return s;
}

/// Re(<h, r, conj(t)>) over interleaved complex rows.
template <class Acc, class Real>
Acc complex(std::span<const Real> h, std::span<const Real> r, std::span<const Real> t) {
  Acc s = 0;
  for (std::size_t k = 0; k < h.size(); k += 2) {
    const Acc a = h[k], b = h[k + 1], c = r[k], d = r[k + 1], e = t[k], f = t[k + 1];
    s += a * c * e + b * c * f + a * d * f - b * d * e;
  }
  return s;
}

/// v_c = sum_ab W[a,b,c] h_a r_b
template <class Acc, class Real>
void tucker_contract_hr(std::span<const Real> core, std::span<const Real> h, std::span<const Real> r,
                        std::span<Acc> v) {
  const std::size_t d = h.size();
  std::fill(v.begin(), v.end(), Acc(0));
  for (std::size_t a = 0; a < d; ++a) {
    const Acc ha = h[a];
    for (std::size_t b = 0; b < d; ++b) {
      const Acc hr = ha * Acc(r[b]);
      const Real* w = core.data() + (a * d + b) * d;
      for (std::size_t c = 0; c < d; ++c) v[c] += hr * Acc(w[c]);
    }
  }
}

/// u_a = sum_bc W[a,b,c] r_b t_c
template <class Acc, class Real>
void tucker_contract_rt(std::span<const Real> core, std::span<const Real> r, std::span<const Real> t,
                        std::span<Acc> u) {
  const std::size_t d = r.size();
  for (std::size_t a = 0; a < d; ++a) {
    Acc s = 0;
    for (std::size_t b = 0; b < d; ++b) {
      const Real* w = core.data() + (a * d + b) * d;
      Acc inner = 0;
      for (std::size_t c = 0; c < d; ++c) inner += Acc(w[c]) * Acc(t[c]);
      s += Acc(r[b]) * inner;
    }
    u[a] = s;
  }
}

template <class Acc, class Real>
Acc tucker(std::span<const Real> core, std::span<const Real> h, std::span<const Real> r,
           std::span<const Real> t) {
  std::vector<Acc> v(h.size());
  tucker_contract_hr<Acc, Real>(core, h, r, v);
  Acc s = 0;
  for (std::size_t c = 0; c < t.size(); ++c) s += v[c] * Acc(t[c]);
  return s;
}

template <class Acc, class Real>
Acc dot(std::span<const Real> x, std::span<const Acc> y) {
  Acc s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += Acc(x[i]) * y[i];
  return s;
}

} // namespace kernel

/// Score of (h, r, t). `r` may index the reciprocal block.
template <class Acc = double, class Real>
Acc score(const BasicParams<Real>& p, EntityId h, std::size_t r, EntityId t) {
  const auto eh = p.entity(index_of(h));
  const auto wr = p.relation(r);
  const auto et = p.entity(index_of(t));
  switch (p.kind) {
  case ModelKind::transe: return kernel::transe<Acc, Real>(eh, wr, et, p.transe_norm);
  case ModelKind::distmult: return kernel::distmult<Acc, Real>(eh, wr, et);
  case ModelKind::complex: return kernel::complex<Acc, Real>(eh, wr, et);
  case ModelKind::tucker: return kernel::tucker<Acc, Real>(p.core, eh, wr, et);
  }
  return Acc(0);
}

template <class Acc = double, class Real>
Acc score(const BasicParams<Real>& p, const Triple& tr) {
  return score<Acc>(p, tr.head, index_of(tr.relation), tr.tail);
}

/// True for models whose score is linear in the tail: score(h, r, t) = <t, q(h, r)>.
constexpr bool linear_in_tail(ModelKind k) { return k != ModelKind::transe; }

/// The vector q with score(h, r, t) = <e_t, q>, for linear_in_tail models.
template <class Acc, class Real>
void tail_query_vector(const BasicParams<Real>& p, EntityId h, std::size_t r, std::span<Acc> q) {
  const std::size_t w = p.width();
  const auto eh = p.entity(index_of(h));
  const auto wr = p.relation(r);
  switch (p.kind) {
  case ModelKind::distmult:
    for (std::size_t k = 0; k < w; ++k) q[k] = Acc(eh[k]) * Acc(wr[k]);
    return;
  case ModelKind::complex:
    // Re(q conj(t)) with q = h r, so the weight on (e, f) is (Re q, Im q).
    for (std::size_t k = 0; k < w; k += 2) {
      const Acc a = eh[k], b = eh[k + 1], c = wr[k], d = wr[k + 1];
      q[k] = a * c - b * d;
      q[k + 1] = b * c + a * d;
    }
    return;
  case ModelKind::tucker:
    kernel::tucker_contract_hr<Acc, Real>(p.core, eh, wr, q);
    return;
  case ModelKind::transe:
    break;
  }
  throw UsageError("tail_query_vector: TransE is not linear in the tail");
}

/// out[i] = score(h, r, i) for every entity i.
template <class Acc = double, class Real>
void score_all_tails(const BasicParams<Real>& p, EntityId h, std::size_t r, std::span<Acc> out) {
  const std::size_t n = p.num_entities;
  const std::size_t w = p.width();
  std::vector<Acc> q(w);
  if (p.kind == ModelKind::transe) {
    const auto eh = p.entity(index_of(h));
    const auto wr = p.relation(r);
    for (std::size_t k = 0; k < w; ++k) q[k] = Acc(eh[k]) + Acc(wr[k]);
    for (std::size_t i = 0; i < n; ++i) {
      const auto e = p.entity(i);
      Acc s = 0;
      for (std::size_t k = 0; k < w; ++k) {
        const Acc x = q[k] - Acc(e[k]);
        s += p.transe_norm == 1 ? std::abs(x) : x * x;
      }
      out[i] = p.transe_norm == 1 ? -s : -std::sqrt(s);
    }
    return;
  }
  tail_query_vector<Acc>(p, h, r, std::span<Acc>(q));
  for (std::size_t i = 0; i < n; ++i) out[i] = kernel::dot<Acc, Real>(p.entity(i), q);
}

/// out[i] = score(i, r, t) for every entity i, by the scoring formula itself.
template <class Acc = double, class Real>
void score_all_heads(const BasicParams<Real>& p, std::size_t r, EntityId t, std::span<Acc> out) {
  const std::size_t n = p.num_entities;
  const std::size_t w = p.width();
  const auto wr = p.relation(r);
  const auto et = p.entity(index_of(t));
  std::vector<Acc> q(w);
  switch (p.kind) {
  case ModelKind::transe:
    // -|e_i - (t - r)|
    for (std::size_t k = 0; k < w; ++k) q[k] = Acc(et[k]) - Acc(wr[k]);
    for (std::size_t i = 0; i < n; ++i) {
      const auto e = p.entity(i);
      Acc s = 0;
      for (std::size_t k = 0; k < w; ++k) {
        const Acc x = Acc(e[k]) - q[k];
        s += p.transe_norm == 1 ? std::abs(x) : x * x;
      }
      out[i] = p.transe_norm == 1 ? -s : -std::sqrt(s);
    }
    return;
  case ModelKind::distmult:
    for (std::size_t k = 0; k < w; ++k) q[k] = Acc(wr[k]) * Acc(et[k]);
    break;
  case ModelKind::complex:
    for (std::size_t k = 0; k < w; k += 2) {
      const Acc c = wr[k], d = wr[k + 1], e = et[k], f = et[k + 1];
      q[k] = c * e + d * f;
      q[k + 1] = c * f - d * e;
    }
    break;
  case ModelKind::tucker:
    kernel::tucker_contract_rt<Acc, Real>(p.core, wr, et, q);
    break;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = kernel::dot<Acc, Real>(p.entity(i), q);
}

/// Candidate scores for a (?, r, t) query as the model answers it: through
/// the reciprocal relation (t, r^-1, ?) when the params carry one,
/// otherwise by the scoring formula.
template <class Acc = double, class Real>
void score_head_query(const BasicParams<Real>& p, std::size_t r, EntityId t, std::span<Acc> out) {
  if (p.reciprocal)
    score_all_tails<Acc>(p, t, p.inverse(r), out);
  else
    score_all_heads<Acc>(p, r, t, out);
}

/// Scalar counterpart of score_head_query for candidate head `h`.
template <class Acc = double, class Real>
Acc head_query_score(const BasicParams<Real>& p, EntityId h, std::size_t r, EntityId t) {
  return p.reciprocal ? score<Acc>(p, t, p.inverse(r), h) : score<Acc>(p, h, r, t);
}

// ---------------------------------------------------------------------------
// Gradients of the score.

/// Adds upstream * d score / d(h, r, t, core) into the given rows.
/// `gh` and `gt` may alias when h == t. `gcore` is ignored unless TuckER.
template <class Acc, class Real, class Out>
void accumulate_score_grad(const BasicParams<Real>& p, std::span<const Real> eh, std::span<const Real> wr,
                           std::span<const Real> et, Acc upstream, std::span<Out> gh, std::span<Out> gr,
                           std::span<Out> gt, std::span<Out> gcore) {
  const std::size_t w = p.width();
  switch (p.kind) {
  case ModelKind::transe: {
    std::vector<Acc> x(w);
    Acc n = 0;
    for (std::size_t k = 0; k < w; ++k) {
      x[k] = Acc(eh[k]) + Acc(wr[k]) - Acc(et[k]);
      n += p.transe_norm == 1 ? std::abs(x[k]) : x[k] * x[k];
    }
    if (p.transe_norm == 2) {
      n = std::sqrt(n);
      // Subgradient 0 at the kink.
      if (n == Acc(0)) return;
      for (std::size_t k = 0; k < w; ++k) {
        const Acc g = upstream * x[k] / n;
        gh[k] -= Out(g);
        gr[k] -= Out(g);
        gt[k] += Out(g);
      }
    } else {
      for (std::size_t k = 0; k < w; ++k) {
        const Acc sgn = x[k] > 0 ? Acc(1) : (x[k] < 0 ? Acc(-1) : Acc(0));
        const Acc g = upstream * sgn;
        gh[k] -= Out(g);
        gr[k] -= Out(g);
        gt[k] += Out(g);
      }
    }
    return;
  }
  case ModelKind::distmult:
    for (std::size_t k = 0; k < w; ++k) {
      const Acc a = eh[k], b = wr[k], c = et[k];
      gh[k] += Out(upstream * b * c);
      gr[k] += Out(upstream * a * c);
      gt[k] += Out(upstream * a * b);
    }
    return;
  case ModelKind::complex:
    for (std::size_t k = 0; k < w; k += 2) {
      const Acc a = eh[k], b = eh[k + 1], c = wr[k], d = wr[k + 1], e = et[k], f = et[k + 1];
      gh[k] += Out(upstream * (c * e + d * f));
      gh[k + 1] += Out(upstream * (c * f - d * e));
      gr[k] += Out(upstream * (a * e + b * f));
      gr[k + 1] += Out(upstream * (a * f - b * e));
      gt[k] += Out(upstream * (a * c - b * d));
      gt[k + 1] += Out(upstream * (b * c + a * d));
    }
    return;
  case ModelKind::tucker: {
    const std::size_t d = p.dim;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        const Real* wab = p.core.data() + (a * d + b) * d;
        Out* gwab = gcore.data() + (a * d + b) * d;
        Acc wt = 0; // sum_c W[a,b,c] t_c
        for (std::size_t c = 0; c < d; ++c) wt += Acc(wab[c]) * Acc(et[c]);
        const Acc hr = Acc(eh[a]) * Acc(wr[b]);
        gh[a] += Out(upstream * Acc(wr[b]) * wt);
        gr[b] += Out(upstream * Acc(eh[a]) * wt);
        for (std::size_t c = 0; c < d; ++c) {
          gt[c] += Out(upstream * hr * Acc(wab[c]));
          gwab[c] += Out(upstream * hr * Acc(et[c]));
        }
      }
    }
    return;
  }
  }
}

/// Gradient of score(h, r, t) restricted to the rows it touches.
template <class Real>
struct TripleGradient {
  EntityId head{};
  std::size_t relation = 0;
  EntityId tail{};
  std::vector<Real> d_head;
  std::vector<Real> d_relation;
  std::vector<Real> d_tail;
  std::vector<Real> d_core; // TuckER only
};

/// Gradient of upstream * score(h, r, t). When h == t the head and tail
/// parts are reported separately; their sum is the row gradient.
template <class Real>
TripleGradient<Real> grad(const BasicParams<Real>& p, EntityId h, std::size_t r, EntityId t, Real upstream) {
  TripleGradient<Real> g{h, r, t, std::vector<Real>(p.width()), std::vector<Real>(p.width()),
                         std::vector<Real>(p.width()), {}};
  if (p.kind == ModelKind::tucker) g.d_core.assign(p.core.size(), Real(0));
  accumulate_score_grad<Real, Real, Real>(p, p.entity(index_of(h)), p.relation(r), p.entity(index_of(t)),
                                          upstream, std::span<Real>(g.d_head), std::span<Real>(g.d_relation),
                                          std::span<Real>(g.d_tail), std::span<Real>(g.d_core));
  return g;
}

} // namespace maschine
