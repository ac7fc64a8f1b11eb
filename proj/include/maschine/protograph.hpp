#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "maschine/error.hpp"
#include "maschine/graph.hpp"
#include "maschine/schema.hpp"

namespace maschine {

enum class Heuristic { p1, p2 };

inline std::string_view to_string(Heuristic h) { return h == Heuristic::p1 ? "p1" : "p2"; }

inline Heuristic parse_heuristic(std::string_view s) {
  if (s == "p1" || s == "P1") return Heuristic::p1;
  if (s == "p2" || s == "P2") return Heuristic::p2;
  throw UsageError("unknown heuristic '" + std::string(s) + "' (expected p1 or p2)");
}

struct ProtoTriple {
  ClassId head{};
  RelationId relation{};
  ClassId tail{};

  friend constexpr bool operator==(const ProtoTriple&, const ProtoTriple&) = default;
  friend constexpr auto operator<=>(const ProtoTriple&, const ProtoTriple&) = default;
};

/// Schema-derived graph whose nodes are classes and whose relations are the
/// knowledge graph's relations.
///
/// Nodes are the classes occurring in at least one triple, sorted by class
/// id; a node's position is its embedding row.
class Protograph {
public:
  Protograph() = default;

  Protograph(std::set<ProtoTriple> triples, std::size_t num_relations)
      : triples_(std::move(triples)), num_relations_(num_relations) {
    std::set<ClassId> nodes;
    for (const auto& t : triples_) {
      nodes.insert(t.head);
      nodes.insert(t.tail);
    }
    nodes_.assign(nodes.begin(), nodes.end());
    train_.reserve(triples_.size());
    for (const auto& t : triples_)
      train_.push_back({id_at<EntityId>(*row_of(t.head)), t.relation, id_at<EntityId>(*row_of(t.tail))});
  }

  const std::set<ProtoTriple>& triples() const noexcept { return triples_; }
  std::span<const ClassId> nodes() const noexcept { return nodes_; }
  std::size_t num_relations() const noexcept { return num_relations_; }

  std::optional<std::size_t> row_of(ClassId c) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), c);
    if (it == nodes_.end() || *it != c) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
  }

  ClassId class_at(std::size_t row) const { return nodes_.at(row); }

  /// Triples re-indexed by node row, in sorted protograph order. There is
  /// no validation or test split.
  GraphView view() const noexcept { return {nodes_.size(), num_relations_, train_, {}, {}}; }

private:
  std::set<ProtoTriple> triples_;
  std::vector<ClassId> nodes_;
  std::vector<Triple> train_;
  std::size_t num_relations_ = 0;
};

/// One triple (domain, r, range) per relation declaring both.
inline Protograph build_p1(const Schema& s, std::size_t num_relations) {
  std::set<ProtoTriple> out;
  for (const auto& [r, dom] : s.domains()) {
    if (index_of(r) >= num_relations) continue;
    if (auto rng = s.range(r)) out.insert({dom, r, *rng});
  }
  return Protograph(std::move(out), num_relations);
}

/// P1 plus, per relation, one triple for each direct subclass of the domain
/// (range kept fixed) and one for each direct subclass of the range (domain
/// kept fixed). Both sides are never substituted at once.
inline Protograph build_p2(const Schema& s, std::size_t num_relations) {
  std::set<ProtoTriple> out;
  for (const auto& [r, dom] : s.domains()) {
    if (index_of(r) >= num_relations) continue;
    const auto rng = s.range(r);
    if (!rng) continue;
    out.insert({dom, r, *rng});
    for (ClassId sub : s.direct_children(dom)) out.insert({sub, r, *rng});
    for (ClassId sub : s.direct_children(*rng)) out.insert({dom, r, sub});
  }
  return Protograph(std::move(out), num_relations);
}

inline Protograph build_protograph(Heuristic h, const Schema& s, std::size_t num_relations) {
  return h == Heuristic::p1 ? build_p1(s, num_relations) : build_p2(s, num_relations);
}

/// KG entity -> its most specific classes.
struct MappingDictionary {
  std::map<EntityId, std::set<ClassId>> mapped;
  std::set<EntityId> untyped;
};

inline MappingDictionary build_mapping(std::size_t num_entities, const Schema& s) {
  MappingDictionary m;
  for (std::size_t i = 0; i < num_entities; ++i) {
    const auto e = id_at<EntityId>(i);
    auto classes = most_specific_classes(e, s);
    if (classes.empty())
      m.untyped.insert(e);
    else
      m.mapped.emplace(e, std::move(classes));
  }
  return m;
}

inline MappingDictionary build_mapping(const KnowledgeGraph& kg, const Schema& s) {
  return build_mapping(kg.vocab.entities.size(), s);
}

/// Writes the protograph as tab-separated triples over class names.
inline void save_protograph(std::ostream& out, const Protograph& p, const Vocabulary& vocab) {
  for (const auto& t : p.triples())
    out << vocab.classes.name(t.head) << '\t' << vocab.relations.name(t.relation) << '\t'
        << vocab.classes.name(t.tail) << '\n';
}

/// One line per entity in id order: the entity name followed by its mapped
/// class names. Untyped entities appear alone on their line.
inline void save_mapping(std::ostream& out, const MappingDictionary& m, const Vocabulary& vocab) {
  for (std::size_t i = 0; i < vocab.entities.size(); ++i) {
    const auto e = id_at<EntityId>(i);
    out << vocab.entities.name(e);
    if (auto it = m.mapped.find(e); it != m.mapped.end())
      for (ClassId c : it->second) out << '\t' << vocab.classes.name(c);
    out << '\n';
  }
}

} // namespace maschine
