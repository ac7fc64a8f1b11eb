#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "maschine/error.hpp"
#include "maschine/ids.hpp"

namespace maschine {

/// Bijective name <-> dense id table. Ids are assigned in first-seen order.
template <class Id>
class Interner {
public:
  Id intern(std::string_view name) {
    if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
    const Id id = id_at<Id>(names_.size());
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return id;
  }

  std::optional<Id> find(std::string_view name) const {
    if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
    return std::nullopt;
  }

  Id at(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw DataError("unknown name '" + std::string(name) + "'");
  }

  const std::string& name(Id id) const {
    if (!contains(id)) throw UsageError("id " + std::to_string(index_of(id)) + " out of range");
    return names_[index_of(id)];
  }

  bool contains(Id id) const noexcept { return index_of(id) < names_.size(); }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Id> index_;
};

struct Vocabulary {
  Interner<EntityId> entities;
  Interner<RelationId> relations;
  Interner<ClassId> classes;

  /// FNV-1a over entity and relation names in id order.
  std::uint64_t hash() const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::string_view s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
      h ^= 0xff;
      h *= 0x100000001b3ULL;
    };
    mix("entities");
    for (const auto& n : entities.names()) mix(n);
    mix("relations");
    for (const auto& n : relations.names()) mix(n);
    return h;
  }
};

} // namespace maschine
