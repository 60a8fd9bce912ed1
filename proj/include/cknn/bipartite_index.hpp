#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cknn/id_dictionary.hpp"
#include "cknn/types.hpp"

namespace cknn {

/// Immutable session-item bipartite network.
///
/// Holds the two inverted maps (session -> items, item -> sessions) in CSR
/// form. Both posting lists are sorted by timestamp ascending, so the most
/// recent entries of a key are a suffix. Repeated (session, item) pairs are
/// collapsed to one edge carrying the earliest timestamp; timestamp ties are
/// ordered by the interned id of the other endpoint.
///
/// Ids are dense but the index may be sparse in them (e.g. when built from
/// the training part of a split whose dictionary also covers test sessions).
/// A key with degree zero is absent.
class BipartiteIndex {
 public:
  BipartiteIndex() = default;

  /// Throws Error{kEmptyDataset} on empty input and Error{kInvalidArgument}
  /// on negative timestamps or invalid ids.
  static BipartiteIndex build(std::span<const Interaction> interactions);

  [[nodiscard]] std::span<const SessionPosting> sessions_of_item(ItemId item) const;
  [[nodiscard]] std::span<const ItemPosting> items_of_session(SessionId session) const;
  /// Items of a session sorted by item id; used for set intersection.
  [[nodiscard]] std::span<const ItemId> item_set_of_session(SessionId session) const;

  [[nodiscard]] std::uint32_t session_degree(SessionId session) const;
  [[nodiscard]] std::uint32_t item_degree(ItemId item) const;
  [[nodiscard]] bool contains(SessionId session) const { return session_degree(session) > 0; }
  [[nodiscard]] bool contains(ItemId item) const { return item_degree(item) > 0; }

  /// Number of sessions / items with at least one edge (m and n).
  [[nodiscard]] std::size_t num_sessions() const { return num_sessions_; }
  [[nodiscard]] std::size_t num_items() const { return num_items_; }
  [[nodiscard]] std::size_t num_edges() const { return session_items_.size(); }

  /// Id-space capacity: one past the largest id in use.
  [[nodiscard]] std::size_t session_capacity() const {
    return session_offsets_.empty() ? 0 : session_offsets_.size() - 1;
  }
  [[nodiscard]] std::size_t item_capacity() const {
    return item_offsets_.empty() ? 0 : item_offsets_.size() - 1;
  }

  /// Ids of all present items, ascending.
  [[nodiscard]] std::vector<ItemId> items() const;
  /// Ids of all present sessions, ascending.
  [[nodiscard]] std::vector<SessionId> sessions() const;

  void write(std::ostream& out) const;
  static BipartiteIndex read(std::istream& in);

  friend bool operator==(const BipartiteIndex&, const BipartiteIndex&) = default;

 private:
  std::vector<std::uint64_t> session_offsets_;
  std::vector<ItemPosting> session_items_;
  std::vector<ItemId> session_item_set_;
  std::vector<std::uint64_t> item_offsets_;
  std::vector<SessionPosting> item_sessions_;
  std::size_t num_sessions_ = 0;
  std::size_t num_items_ = 0;
};

/// Index plus the dictionaries that map its ids back to external names.
struct IndexSnapshot {
  BipartiteIndex index;
  IdDictionary sessions;
  IdDictionary items;
};

/// Versioned binary snapshot. Layout: magic "CKNNIDX1", format version,
/// both dictionaries, then the two posting-list maps.
void write_snapshot(std::ostream& out, const IndexSnapshot& snapshot);
IndexSnapshot read_snapshot(std::istream& in);

}  // namespace cknn
