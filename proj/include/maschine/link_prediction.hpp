#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "maschine/error.hpp"
#include "maschine/graph.hpp"
#include "maschine/model.hpp"
#include "maschine/schema.hpp"

namespace maschine {

/// Known answers per (h, r) and per (r, t), used to filter ranks.
class FilterIndex {
public:
  FilterIndex() = default;

  explicit FilterIndex(std::initializer_list<std::span<const Triple>> splits) {
    for (auto split : splits) add(split);
    finish();
  }

  explicit FilterIndex(const GraphView& g) : FilterIndex({g.train, g.valid, g.test}) {}

  std::span<const EntityId> known_tails(EntityId h, RelationId r) const { return lookup(tails_, key(h, r)); }
  std::span<const EntityId> known_heads(RelationId r, EntityId t) const { return lookup(heads_, key(t, r)); }

private:
  using Map = std::unordered_map<std::uint64_t, std::vector<EntityId>>;

  static std::uint64_t key(EntityId e, RelationId r) {
    return (std::uint64_t{index_of(e)} << 32) | std::uint64_t{index_of(r)};
  }

  static std::span<const EntityId> lookup(const Map& m, std::uint64_t k) {
    if (auto it = m.find(k); it != m.end()) return it->second;
    return {};
  }

  void add(std::span<const Triple> split) {
    for (const auto& t : split) {
      tails_[key(t.head, t.relation)].push_back(t.tail);
      heads_[key(t.tail, t.relation)].push_back(t.head);
    }
  }

  void finish() {
    for (Map* m : {&tails_, &heads_})
      for (auto& [k, v] : *m) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      }
  }

  Map tails_;
  Map heads_;
};

/// Realistic rank: 1 + #strictly better + floor(#other ties / 2), over
/// candidates not excluded. `excluded[i]` marks filtered entities; the
/// target itself is never excluded.
inline std::size_t realistic_rank(std::span<const double> scores, std::size_t target,
                                  std::span<const char> excluded) {
  const double s = scores[target];
  std::size_t greater = 0;
  std::size_t ties = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == target || excluded[i]) continue;
    if (scores[i] > s)
      ++greater;
    else if (scores[i] == s)
      ++ties;
  }
  return 1 + greater + ties / 2;
}

/// The k best non-excluded candidates, best first; ties go to the lower id.
inline std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k, std::span<const char> excluded) {
  std::vector<std::size_t> best;
  best.reserve(k + 1);
  auto better = [&](std::size_t a, std::size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); };
  for (std::size_t i = 0; i < scores.size() && k > 0; ++i) {
    if (excluded[i]) continue;
    if (best.size() == k && !better(i, best.back())) continue;
    auto pos = std::upper_bound(best.begin(), best.end(), i, better);
    best.insert(pos, i);
    if (best.size() > k) best.pop_back();
  }
  return best;
}

inline double mrr(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw UsageError("MRR of an empty rank list");
  double s = 0;
  for (auto r : ranks) s += 1.0 / static_cast<double>(r);
  return s / static_cast<double>(ranks.size());
}

inline double hits_at_k(std::span<const std::size_t> ranks, std::size_t k) {
  if (ranks.empty()) throw UsageError("Hits@K of an empty rank list");
  const auto n = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
  return static_cast<double>(n) / static_cast<double>(ranks.size());
}

struct RankResult {
  std::size_t head_rank = 0;
  std::size_t tail_rank = 0;
  /// Filtered top-K candidates per side, best first (K = largest requested).
  std::vector<std::size_t> head_top;
  std::vector<std::size_t> tail_top;
};

struct LPReport {
  double mrr = 0;
  double hits1 = 0, hits3 = 0, hits10 = 0;
  double sem1 = 0, sem3 = 0, sem10 = 0;
  std::size_t num_triples = 0;
  std::size_t sem_head_queries = 0; // triples whose relation has a domain
  std::size_t sem_tail_queries = 0; // triples whose relation has a range
};

/// Scores every candidate for both sides of each triple and returns
/// filtered realistic ranks with filtered top-K lists.
template <class Real>
class Ranker {
public:
  Ranker(const BasicParams<Real>& params, const FilterIndex& filter) : p_(params), filter_(filter) {}

  RankResult rank(const Triple& tr, std::size_t top = 0) const {
    Scratch s(p_.num_entities);
    return rank(tr, top, s);
  }

  std::vector<RankResult> rank_all(std::span<const Triple> triples, std::size_t top, unsigned threads = 1) const {
    std::vector<RankResult> out(triples.size());
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, triples.size()))));
    if (threads == 1) {
      Scratch s(p_.num_entities);
      for (std::size_t i = 0; i < triples.size(); ++i) out[i] = rank(triples[i], top, s);
      return out;
    }
    // Strided split; each slot is written by exactly one worker.
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w)
      workers.emplace_back([&, w] {
        Scratch s(p_.num_entities);
        for (std::size_t i = w; i < triples.size(); i += threads) out[i] = rank(triples[i], top, s);
      });
    return out;
  }

private:
  struct Scratch {
    explicit Scratch(std::size_t n) : scores(n), excluded(n, 0) {}
    std::vector<double> scores;
    std::vector<char> excluded;
  };

  RankResult rank(const Triple& tr, std::size_t top, Scratch& s) const {
    RankResult out;
    const auto side = [&](std::span<const EntityId> known, EntityId target, std::size_t& rank,
                          std::vector<std::size_t>& best) {
      for (EntityId e : known) s.excluded[index_of(e)] = 1;
      s.excluded[index_of(target)] = 0;
      rank = realistic_rank(s.scores, index_of(target), s.excluded);
      if (top > 0) best = top_k(s.scores, top, s.excluded);
      for (EntityId e : known) s.excluded[index_of(e)] = 0;
    };
    score_all_tails<double>(p_, tr.head, index_of(tr.relation), std::span<double>(s.scores));
    side(filter_.known_tails(tr.head, tr.relation), tr.tail, out.tail_rank, out.tail_top);
    score_head_query<double>(p_, index_of(tr.relation), tr.tail, std::span<double>(s.scores));
    side(filter_.known_heads(tr.relation, tr.tail), tr.head, out.head_rank, out.head_top);
    return out;
  }

  const BasicParams<Real>& p_;
  const FilterIndex& filter_;
};

/// Filtered realistic (head rank, tail rank) of one triple.
template <class Real>
std::pair<std::size_t, std::size_t> rank(const BasicParams<Real>& params, const Triple& tr, const FilterIndex& filter) {
  auto r = Ranker<Real>(params, filter).rank(tr);
  return {r.head_rank, r.tail_rank};
}

/// Fraction of the k best filtered candidates whose type is compatible with
/// the relation's domain (head side) or range (tail side), macro-averaged
/// over the two sides. Sides whose relation lacks the axiom are skipped.
/// Returns {value, head queries, tail queries}.
struct SemResult {
  double value = 0;
  std::size_t head_queries = 0;
  std::size_t tail_queries = 0;
};

inline SemResult sem_at_k(std::span<const Triple> triples, std::span<const RankResult> ranked, const Schema& schema,
                          std::size_t k) {
  double head_sum = 0, tail_sum = 0;
  SemResult out;
  auto valid_share = [&](const std::vector<std::size_t>& top, ClassId c) {
    const std::size_t n = std::min(k, top.size());
    if (n == 0) return 0.0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (schema.has_type(id_at<EntityId>(top[i]), c)) ++ok;
    return static_cast<double>(ok) / static_cast<double>(n);
  };
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto r = triples[i].relation;
    if (auto d = schema.domain(r)) {
      head_sum += valid_share(ranked[i].head_top, *d);
      ++out.head_queries;
    }
    if (auto g = schema.range(r)) {
      tail_sum += valid_share(ranked[i].tail_top, *g);
      ++out.tail_queries;
    }
  }
  double sides = 0;
  if (out.head_queries) {
    out.value += head_sum / static_cast<double>(out.head_queries);
    sides += 1;
  }
  if (out.tail_queries) {
    out.value += tail_sum / static_cast<double>(out.tail_queries);
    sides += 1;
  }
  if (sides > 0) out.value /= sides;
  return out;
}

/// Pools head and tail ranks of every triple.
inline std::vector<std::size_t> pooled_ranks(std::span<const RankResult> ranked) {
  std::vector<std::size_t> out;
  out.reserve(ranked.size() * 2);
  for (const auto& r : ranked) {
    out.push_back(r.head_rank);
    out.push_back(r.tail_rank);
  }
  return out;
}

/// Full link prediction report. `schema` may be null, in which case Sem@K
/// values stay zero.
template <class Real>
LPReport evaluate_link_prediction(const BasicParams<Real>& params, std::span<const Triple> triples,
                                  const FilterIndex& filter, const Schema* schema, unsigned threads = 1) {
  if (triples.empty()) throw UsageError("link prediction on an empty triple set");
  const auto ranked = Ranker<Real>(params, filter).rank_all(triples, schema ? 10 : 0, threads);
  const auto ranks = pooled_ranks(ranked);
  LPReport rep;
  rep.num_triples = triples.size();
  rep.mrr = mrr(ranks);
  rep.hits1 = hits_at_k(ranks, 1);
  rep.hits3 = hits_at_k(ranks, 3);
  rep.hits10 = hits_at_k(ranks, 10);
  if (schema) {
    const auto s1 = sem_at_k(triples, ranked, *schema, 1);
    rep.sem1 = s1.value;
    rep.sem3 = sem_at_k(triples, ranked, *schema, 3).value;
    rep.sem10 = sem_at_k(triples, ranked, *schema, 10).value;
    rep.sem_head_queries = s1.head_queries;
    rep.sem_tail_queries = s1.tail_queries;
  }
  return rep;
}

/// Filtered MRR only; used for checkpoint selection.
template <class Real>
double filtered_mrr(const BasicParams<Real>& params, std::span<const Triple> triples, const FilterIndex& filter,
                    unsigned threads = 1) {
  const auto ranked = Ranker<Real>(params, filter).rank_all(triples, 0, threads);
  const auto ranks = pooled_ranks(ranked);
  return mrr(ranks);
}

} // namespace maschine
