#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace maschine {

// Distinct id spaces. Instance entities and schema classes never mix.
enum class EntityId : std::uint32_t {};
enum class RelationId : std::uint32_t {};
enum class ClassId : std::uint32_t {};

template <class Id>
constexpr std::size_t index_of(Id id) noexcept {
  return static_cast<std::size_t>(id);
}

template <class Id>
constexpr Id id_at(std::size_t i) noexcept {
  return static_cast<Id>(static_cast<std::uint32_t>(i));
}

struct Triple {
  EntityId head{};
  RelationId relation{};
  EntityId tail{};

  friend constexpr bool operator==(const Triple&, const Triple&) = default;
  friend constexpr auto operator<=>(const Triple&, const Triple&) = default;
};

/// Packs a triple into one 64-bit key (21 bits per field).
constexpr std::uint64_t pack(const Triple& t) noexcept {
  return (std::uint64_t{index_of(t.head)} << 42) | (std::uint64_t{index_of(t.relation)} << 21) |
         std::uint64_t{index_of(t.tail)};
}

inline constexpr std::size_t kMaxPackedId = (std::size_t{1} << 21) - 1;

} // namespace maschine

template <>
struct std::hash<maschine::Triple> {
  std::size_t operator()(const maschine::Triple& t) const noexcept {
    return std::hash<std::uint64_t>{}(maschine::pack(t));
  }
};
