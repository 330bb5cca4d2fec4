// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace kecr {

/// Dense index with a tag so entity and relation ids cannot be mixed up.
template <typename Tag>
struct StrongId {
  std::uint32_t value = 0;

  constexpr StrongId() = default;
  constexpr explicit StrongId(std::uint32_t v) : value(v) {}

  constexpr std::size_t index() const { return value; }
  constexpr auto operator<=>(const StrongId&) const = default;
};

template <typename Tag>
std::ostream& operator<<(std::ostream& os, StrongId<Tag> id) {
  return os << id.value;
}

struct EntityTag {};
struct RelationTag {};

using EntityId = StrongId<EntityTag>;
using RelationId = StrongId<RelationTag>;

}  // namespace kecr

template <typename Tag>
struct std::hash<kecr::StrongId<Tag>> {
  std::size_t operator()(kecr::StrongId<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
