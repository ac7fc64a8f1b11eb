#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maschine/error.hpp"
#include "maschine/ids.hpp"

namespace maschine {

using SubclassEdge = std::pair<ClassId, ClassId>; // (child, parent)

/// Returns one subclass cycle as a closed path (first == last), or empty.
inline std::vector<ClassId> find_subclass_cycle(std::size_t num_classes,
                                                const std::set<SubclassEdge>& edges) {
  std::vector<std::vector<ClassId>> parents(num_classes);
  for (const auto& [child, parent] : edges) parents[index_of(child)].push_back(parent);

  enum class Mark : unsigned char { fresh, active, done };
  std::vector<Mark> mark(num_classes, Mark::fresh);
  std::vector<ClassId> path;

  // Iterative DFS; path mirrors the active stack.
  for (std::size_t root = 0; root < num_classes; ++root) {
    if (mark[root] != Mark::fresh) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    mark[root] = Mark::active;
    path.assign(1, id_at<ClassId>(root));
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < parents[node].size()) {
        const std::size_t p = index_of(parents[node][next++]);
        if (mark[p] == Mark::active) {
          auto from = std::find(path.begin(), path.end(), id_at<ClassId>(p));
          std::vector<ClassId> cycle(from, path.end());
          cycle.push_back(id_at<ClassId>(p));
          return cycle;
        }
        if (mark[p] == Mark::fresh) {
          mark[p] = Mark::active;
          stack.emplace_back(p, 0);
          path.push_back(id_at<ClassId>(p));
        }
      } else {
        mark[node] = Mark::done;
        stack.pop_back();
        path.pop_back();
      }
    }
  }
  return {};
}

/// RDFS axioms: one domain and one range per relation, a subclass DAG over
/// class ids, and asserted entity types. Immutable once constructed.
class Schema {
public:
  Schema() = default;

  Schema(std::size_t num_classes, std::map<RelationId, ClassId> domains,
         std::map<RelationId, ClassId> ranges, std::set<SubclassEdge> subclass_edges,
         std::map<EntityId, std::set<ClassId>> types)
      : num_classes_(num_classes), domains_(std::move(domains)), ranges_(std::move(ranges)),
        edges_(std::move(subclass_edges)), types_(std::move(types)) {
    auto check = [this](ClassId c) {
      if (index_of(c) >= num_classes_)
        throw DataError("schema references class id " + std::to_string(index_of(c)) +
                        " outside [0, " + std::to_string(num_classes_) + ")");
    };
    for (const auto& [r, c] : domains_) check(c);
    for (const auto& [r, c] : ranges_) check(c);
    for (const auto& [a, b] : edges_) {
      check(a);
      check(b);
    }
    for (const auto& [e, cs] : types_)
      for (ClassId c : cs) check(c);

    if (auto cycle = find_subclass_cycle(num_classes_, edges_); !cycle.empty()) {
      std::string msg = "subClassOf cycle among class ids:";
      for (ClassId c : cycle) msg += " " + std::to_string(index_of(c));
      throw DataError(msg);
    }

    parents_.resize(num_classes_);
    children_.resize(num_classes_);
    for (const auto& [child, parent] : edges_) {
      parents_[index_of(child)].push_back(parent);
      children_[index_of(parent)].push_back(child);
    }
    for (auto& v : children_) std::sort(v.begin(), v.end());

    superclasses_.resize(num_classes_);
    for (std::size_t c = 0; c < num_classes_; ++c) {
      std::set<ClassId> seen{id_at<ClassId>(c)};
      std::vector<ClassId> frontier{id_at<ClassId>(c)};
      while (!frontier.empty()) {
        const ClassId cur = frontier.back();
        frontier.pop_back();
        for (ClassId p : parents_[index_of(cur)])
          if (seen.insert(p).second) frontier.push_back(p);
      }
      superclasses_[c].assign(seen.begin(), seen.end());
    }
  }

  std::size_t num_classes() const noexcept { return num_classes_; }

  std::optional<ClassId> domain(RelationId r) const {
    if (auto it = domains_.find(r); it != domains_.end()) return it->second;
    return std::nullopt;
  }
  std::optional<ClassId> range(RelationId r) const {
    if (auto it = ranges_.find(r); it != ranges_.end()) return it->second;
    return std::nullopt;
  }

  const std::map<RelationId, ClassId>& domains() const noexcept { return domains_; }
  const std::map<RelationId, ClassId>& ranges() const noexcept { return ranges_; }
  const std::set<SubclassEdge>& subclass_edges() const noexcept { return edges_; }
  const std::map<EntityId, std::set<ClassId>>& all_types() const noexcept { return types_; }

  std::span<const ClassId> direct_parents(ClassId c) const {
    require(c);
    return parents_[index_of(c)];
  }
  /// Sorted by id.
  std::span<const ClassId> direct_children(ClassId c) const {
    require(c);
    return children_[index_of(c)];
  }

  /// Reflexive-transitive superclasses, sorted by id.
  std::span<const ClassId> superclasses(ClassId c) const {
    require(c);
    return superclasses_[index_of(c)];
  }

  /// True iff `sub` equals `super` or reaches it through subClassOf.
  bool is_subclass_of(ClassId sub, ClassId super) const {
    auto sup = superclasses(sub);
    return std::binary_search(sup.begin(), sup.end(), super);
  }

  bool is_root(ClassId c) const { return direct_parents(c).empty(); }

  const std::set<ClassId>& types(EntityId e) const {
    static const std::set<ClassId> empty;
    if (auto it = types_.find(e); it != types_.end()) return it->second;
    return empty;
  }

  bool is_typed(EntityId e) const { return !types(e).empty(); }

  /// True iff some asserted type of `e` is `c` or one of its subclasses.
  bool has_type(EntityId e, ClassId c) const {
    for (ClassId t : types(e))
      if (is_subclass_of(t, c)) return true;
    return false;
  }

private:
  void require(ClassId c) const {
    if (index_of(c) >= num_classes_)
      throw UsageError("unknown class id " + std::to_string(index_of(c)));
  }

  std::size_t num_classes_ = 0;
  std::map<RelationId, ClassId> domains_;
  std::map<RelationId, ClassId> ranges_;
  std::set<SubclassEdge> edges_;
  std::map<EntityId, std::set<ClassId>> types_;
  std::vector<std::vector<ClassId>> parents_;
  std::vector<std::vector<ClassId>> children_;
  std::vector<std::vector<ClassId>> superclasses_;
};

inline std::set<ClassId> transitive_superclasses(ClassId c, const Schema& s) {
  auto sup = s.superclasses(c);
  return {sup.begin(), sup.end()};
}

/// Asserted types of `e` that have no strict subclass also asserted for `e`.
/// Empty for untyped entities; callers decide what that means.
inline std::set<ClassId> most_specific_classes(EntityId e, const Schema& s) {
  const auto& asserted = s.types(e);
  std::set<ClassId> out;
  for (ClassId a : asserted) {
    const bool dominated = std::any_of(asserted.begin(), asserted.end(), [&](ClassId b) {
      return b != a && s.is_subclass_of(b, a);
    });
    if (!dominated) out.insert(a);
  }
  return out;
}

/// Root classes reachable upward from any asserted type of `e`.
inline std::set<ClassId> most_generic_classes(EntityId e, const Schema& s) {
  std::set<ClassId> out;
  for (ClassId t : s.types(e))
    for (ClassId c : s.superclasses(t))
      if (s.is_root(c)) out.insert(c);
  return out;
}

} // namespace maschine
