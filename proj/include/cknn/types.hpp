#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>

namespace cknn {

/// Dense interned identifier. The tag keeps session and item ids apart.
template <class Tag>
struct Id {
  static constexpr std::uint32_t kInvalid = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t value = kInvalid;

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}

  [[nodiscard]] constexpr bool valid() const { return value != kInvalid; }
  static constexpr Id invalid() { return Id{}; }

  friend constexpr auto operator<=>(Id, Id) = default;
};

using SessionId = Id<struct SessionTag>;
using ItemId = Id<struct ItemTag>;

/// Integer time units (epoch seconds or abstract ticks).
using Timestamp = std::int64_t;

/// One (session, item, timestamp) click record.
struct Interaction {
  SessionId session;
  ItemId item;
  Timestamp timestamp = 0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

/// Entry of an item's posting list: a session that clicked the item, and when.
struct SessionPosting {
  SessionId session;
  Timestamp timestamp = 0;

  friend bool operator==(const SessionPosting&, const SessionPosting&) = default;
};

/// Entry of a session's posting list.
struct ItemPosting {
  ItemId item;
  Timestamp timestamp = 0;

  friend bool operator==(const ItemPosting&, const ItemPosting&) = default;
};

}  // namespace cknn

template <class Tag>
struct std::hash<cknn::Id<Tag>> {
  std::size_t operator()(cknn::Id<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
