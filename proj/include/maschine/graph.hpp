#pragma once

#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "maschine/error.hpp"
#include "maschine/ids.hpp"
#include "maschine/vocabulary.hpp"

namespace maschine {

/// Non-owning view of the triples a trainer or evaluator works on.
///
/// Entity ids index rows of an embedding matrix. For a knowledge graph those
/// are instance entities; for a protograph they are protograph nodes.
struct GraphView {
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;
  std::span<const Triple> train;
  std::span<const Triple> valid;
  std::span<const Triple> test;
};

struct KnowledgeGraph {
  Vocabulary vocab;
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;

  std::size_t num_triples() const noexcept { return train.size() + valid.size() + test.size(); }

  GraphView view() const noexcept {
    return {vocab.entities.size(), vocab.relations.size(), train, valid, test};
  }

  /// Throws DataError if an id is out of range or the splits share a triple.
  void validate() const {
    auto check_ids = [this](const std::vector<Triple>& split, const char* name) {
      for (const auto& t : split) {
        if (!vocab.entities.contains(t.head) || !vocab.entities.contains(t.tail) ||
            !vocab.relations.contains(t.relation))
          throw DataError(std::string("triple with unknown id in ") + name + " split");
      }
    };
    check_ids(train, "train");
    check_ids(valid, "valid");
    check_ids(test, "test");

    std::unordered_set<Triple> seen(train.begin(), train.end());
    auto check_disjoint = [&](const std::vector<Triple>& split, const char* name) {
      std::unordered_set<Triple> mine(split.begin(), split.end());
      for (const auto& t : mine) {
        if (seen.contains(t))
          throw DataError(std::string(name) + " split shares triple (" +
                          vocab.entities.name(t.head) + ", " + vocab.relations.name(t.relation) +
                          ", " + vocab.entities.name(t.tail) + ") with an earlier split");
      }
      seen.insert(mine.begin(), mine.end());
    };
    check_disjoint(valid, "valid");
    check_disjoint(test, "test");
  }
};

} // namespace maschine
