#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "cknn/bipartite_index.hpp"
#include "cknn/types.hpp"

namespace cknn {

enum class Strategy { kOriginal, kEpcs, kEpcsr };

/// Accepts "original", "epcs", "epcsr" (case-insensitive).
Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy strategy);

/// Hardware-independent cost of a selection step.
struct WorkCounters {
  std::uint64_t examined = 0;  ///< posting entries read
  std::uint64_t sorted = 0;    ///< entries fed to a recency sort / selection

  WorkCounters& operator+=(const WorkCounters& o) {
    examined += o.examined;
    sorted += o.sorted;
    return *this;
  }
  friend bool operator==(const WorkCounters&, const WorkCounters&) = default;
};

/// Recency order over candidates: later timestamp first, then larger
/// session id (the order of a reversed posting-list suffix).
inline bool more_recent(const SessionPosting& a, const SessionPosting& b) {
  return a.timestamp != b.timestamp ? a.timestamp > b.timestamp : a.session > b.session;
}

/// Recent session set RC(x). entries hold (session, relevance timestamp),
/// where the relevance timestamp is the session's latest click on any item
/// of the current session.
struct CandidateSet {
  std::vector<SessionPosting> entries;
  Strategy strategy = Strategy::kOriginal;
  WorkCounters work;
};

/// Per-item posting lists RL_i of the current session, as views into the
/// index. The excluded session (the current session itself, if it is in the
/// index) is skipped by every consumer.
class RelevantSessions {
 public:
  struct Entry {
    ItemId item;
    std::span<const SessionPosting> postings;
  };

  RelevantSessions(const BipartiteIndex& index, std::vector<Entry> entries, std::optional<SessionId> exclude)
      : index_(&index), entries_(std::move(entries)), exclude_(exclude) {}

  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
  [[nodiscard]] const Entry* find(ItemId item) const;
  [[nodiscard]] std::optional<SessionId> excluded() const { return exclude_; }
  [[nodiscard]] bool is_excluded(SessionId s) const { return exclude_ && *exclude_ == s; }
  [[nodiscard]] const BipartiteIndex& index() const { return *index_; }

  /// RL_i with the excluded session removed (materialized).
  [[nodiscard]] std::vector<SessionPosting> postings_of(ItemId item) const;
  /// RL(x): union of all lists, one entry per session with its latest
  /// timestamp, ordered most recent first.
  [[nodiscard]] std::vector<SessionPosting> union_sessions() const;

 private:
  const BipartiteIndex* index_;
  std::vector<Entry> entries_;
  std::optional<SessionId> exclude_;
};

/// One entry per distinct item, in first-click order. Unknown items map to
/// empty lists.
RelevantSessions relevant_sessions(const BipartiteIndex& index, std::span<const ItemId> items,
                                   std::optional<SessionId> exclude = std::nullopt);

/// The evolving current session with cached per-item recent sets.
class SessionState {
 public:
  explicit SessionState(std::optional<SessionId> own_session = std::nullopt, std::uint64_t rng_seed = 0)
      : own_session_(own_session), rng_seed_(rng_seed) {}

  /// Appends the click and caches the min(k_recent, |RL|) most recent
  /// sessions of the item, most recent first. Re-clicking an item replaces
  /// its cache. Adds the entries read to `work` when given.
  void advance(const BipartiteIndex& index, ItemId item, std::size_t k_recent, WorkCounters* work = nullptr);

  [[nodiscard]] const std::vector<ItemId>& items() const { return items_; }
  /// Distinct clicked items in first-click order.
  [[nodiscard]] const std::vector<ItemId>& distinct_items() const { return distinct_; }
  [[nodiscard]] bool empty() const { return items_.empty(); }
  [[nodiscard]] ItemId last_item() const { return items_.back(); }

  [[nodiscard]] const std::vector<SessionPosting>* recent_of(ItemId item) const;

  [[nodiscard]] std::optional<SessionId> own_session() const { return own_session_; }
  [[nodiscard]] std::uint64_t rng_seed() const { return rng_seed_; }
  void set_rng_seed(std::uint64_t seed) { rng_seed_ = seed; }

 private:
  std::vector<ItemId> items_;
  std::vector<ItemId> distinct_;
  std::vector<std::pair<ItemId, std::vector<SessionPosting>>> recent_;
  std::optional<SessionId> own_session_;
  std::uint64_t rng_seed_;
};

/// The k_recent most recent sessions of RL(x).
CandidateSet select_original(const RelevantSessions& rl, std::size_t k_recent);

/// Reserves ceil(k_recent / |x|) slots for the last click's most recent
/// sessions and fills the rest with the most recent sessions of the other
/// clicks (read from the state's caches).
CandidateSet select_epcs(const SessionState& state, const RelevantSessions& rl, std::size_t k_recent);

/// As select_epcs, but the non-last slots are a seeded uniform sample without
/// replacement from the other clicks' cached recent sets.
CandidateSet select_epcsr(const SessionState& state, const RelevantSessions& rl, std::size_t k_recent);

CandidateSet select_candidates(Strategy strategy, const SessionState& state, const RelevantSessions& rl,
                               std::size_t k_recent);

/// ceil(k_recent / |x|) with |x| the number of distinct clicked items.
std::size_t last_click_quota(std::size_t k_recent, std::size_t distinct_items);

}  // namespace cknn
