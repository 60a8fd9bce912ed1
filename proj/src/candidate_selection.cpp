#include "cknn/candidate_selection.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "cknn/error.hpp"
#include "cknn/rng.hpp"

namespace cknn {

Strategy parse_strategy(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "original") return Strategy::kOriginal;
  if (lower == "epcs") return Strategy::kEpcs;
  if (lower == "epcsr") return Strategy::kEpcsr;
  throw Error(ErrorKind::kInvalidArgument, "unknown strategy '" + std::string(name) + "' (expected original, epcs or epcsr)");
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kOriginal: return "original";
    case Strategy::kEpcs: return "epcs";
    case Strategy::kEpcsr: return "epcsr";
  }
  return "?";
}

std::size_t last_click_quota(std::size_t k_recent, std::size_t distinct_items) {
  if (distinct_items == 0) return 0;
  return (k_recent + distinct_items - 1) / distinct_items;
}

const RelevantSessions::Entry* RelevantSessions::find(ItemId item) const {
  for (const auto& e : entries_) {
    if (e.item == item) return &e;
  }
  return nullptr;
}

std::vector<SessionPosting> RelevantSessions::postings_of(ItemId item) const {
  std::vector<SessionPosting> out;
  if (const auto* e = find(item)) {
    out.reserve(e->postings.size());
    for (const auto& p : e->postings) {
      if (!is_excluded(p.session)) out.push_back(p);
    }
  }
  return out;
}

std::vector<SessionPosting> RelevantSessions::union_sessions() const {
  std::unordered_map<SessionId, Timestamp> latest;
  for (const auto& e : entries_) {
    for (const auto& p : e.postings) {
      if (is_excluded(p.session)) continue;
      auto [it, inserted] = latest.try_emplace(p.session, p.timestamp);
      if (!inserted) it->second = std::max(it->second, p.timestamp);
    }
  }
  std::vector<SessionPosting> out;
  out.reserve(latest.size());
  for (const auto& [s, ts] : latest) out.push_back({s, ts});
  std::sort(out.begin(), out.end(), more_recent);
  return out;
}

RelevantSessions relevant_sessions(const BipartiteIndex& index, std::span<const ItemId> items,
                                   std::optional<SessionId> exclude) {
  std::vector<RelevantSessions::Entry> entries;
  for (const auto item : items) {
    const bool seen = std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.item == item; });
    if (!seen) entries.push_back({item, index.sessions_of_item(item)});
  }
  return RelevantSessions(index, std::move(entries), exclude);
}

namespace {

/// The `count` most recent postings of a timestamp-ascending list, most
/// recent first, skipping the excluded session.
std::vector<SessionPosting> recent_suffix(std::span<const SessionPosting> postings, std::size_t count,
                                          std::optional<SessionId> exclude, WorkCounters* work) {
  std::vector<SessionPosting> out;
  out.reserve(std::min(count, postings.size()));
  for (auto it = postings.rbegin(); it != postings.rend() && out.size() < count; ++it) {
    if (work) ++work->examined;
    if (exclude && it->session == *exclude) continue;
    out.push_back(*it);
  }
  return out;
}

/// Latest click of `session` on any item of the current session.
Timestamp relevance_of(const BipartiteIndex& index, SessionId session, const std::vector<ItemId>& sorted_items,
                       Timestamp fallback) {
  const auto postings = index.items_of_session(session);
  for (auto it = postings.rbegin(); it != postings.rend(); ++it) {
    if (std::binary_search(sorted_items.begin(), sorted_items.end(), it->item)) return it->timestamp;
  }
  return fallback;
}

void assign_relevance(const RelevantSessions& rl, const SessionState& state, std::vector<SessionPosting>& entries) {
  std::vector<ItemId> sorted_items = state.distinct_items();
  std::sort(sorted_items.begin(), sorted_items.end());
  for (auto& e : entries) e.timestamp = relevance_of(rl.index(), e.session, sorted_items, e.timestamp);
}

/// Recent list of an item: the state's cache if present, else a fresh
/// suffix read of RL_i.
std::vector<SessionPosting> recent_list(const SessionState& state, const RelevantSessions& rl, ItemId item,
                                        std::size_t k_recent, WorkCounters& work) {
  if (const auto* cached = state.recent_of(item)) {
    const auto n = std::min(cached->size(), k_recent);
    work.examined += n;
    return {cached->begin(), cached->begin() + static_cast<std::ptrdiff_t>(n)};
  }
  const auto* entry = rl.find(item);
  if (!entry) return {};
  return recent_suffix(entry->postings, k_recent, rl.excluded(), &work);
}

struct LastClickPart {
  std::vector<SessionPosting> entries;
  std::unordered_set<SessionId> members;
};

LastClickPart last_click_part(const SessionState& state, const RelevantSessions& rl, std::size_t k_recent,
                              WorkCounters& work) {
  const auto quota = last_click_quota(k_recent, state.distinct_items().size());
  LastClickPart part;
  part.entries = recent_list(state, rl, state.last_item(), quota, work);
  part.members.reserve(part.entries.size());
  for (const auto& e : part.entries) part.members.insert(e.session);
  return part;
}

void require_state(const SessionState& state, std::size_t k_recent) {
  if (state.empty()) throw Error(ErrorKind::kInvalidArgument, "current session has no clicks");
  if (k_recent == 0) throw Error(ErrorKind::kInvalidArgument, "k_recent must be positive");
}

}  // namespace

void SessionState::advance(const BipartiteIndex& index, ItemId item, std::size_t k_recent, WorkCounters* work) {
  items_.push_back(item);
  if (std::find(distinct_.begin(), distinct_.end(), item) == distinct_.end()) distinct_.push_back(item);
  auto recent = recent_suffix(index.sessions_of_item(item), k_recent, own_session_, work);
  for (auto& [cached_item, list] : recent_) {
    if (cached_item == item) {
      list = std::move(recent);
      return;
    }
  }
  recent_.emplace_back(item, std::move(recent));
}

const std::vector<SessionPosting>* SessionState::recent_of(ItemId item) const {
  for (const auto& [cached_item, list] : recent_) {
    if (cached_item == item) return &list;
  }
  return nullptr;
}

CandidateSet select_original(const RelevantSessions& rl, std::size_t k_recent) {
  if (k_recent == 0) throw Error(ErrorKind::kInvalidArgument, "k_recent must be positive");
  CandidateSet out;
  out.strategy = Strategy::kOriginal;

  std::size_t total = 0;
  for (const auto& e : rl.entries()) total += e.postings.size();
  std::unordered_map<SessionId, Timestamp> latest;
  latest.reserve(total);
  for (const auto& e : rl.entries()) {
    for (const auto& p : e.postings) {
      ++out.work.examined;
      if (rl.is_excluded(p.session)) continue;
      auto [it, inserted] = latest.try_emplace(p.session, p.timestamp);
      if (!inserted && p.timestamp > it->second) it->second = p.timestamp;
    }
  }
  std::vector<SessionPosting> pool;
  pool.reserve(latest.size());
  for (const auto& [s, ts] : latest) pool.push_back({s, ts});
  out.work.sorted += pool.size();
  const auto keep = std::min(k_recent, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), more_recent);
  pool.resize(keep);
  out.entries = std::move(pool);
  return out;
}

CandidateSet select_epcs(const SessionState& state, const RelevantSessions& rl, std::size_t k_recent) {
  require_state(state, k_recent);
  CandidateSet out;
  out.strategy = Strategy::kEpcs;
  auto last = last_click_part(state, rl, k_recent, out.work);

  // Latest click per session over the other items' recent sets. Each set is
  // the top k_recent of its RL_i, which is enough to recover the exact top
  // k_recent of their union.
  std::unordered_map<SessionId, Timestamp> latest;
  for (const auto item : state.distinct_items()) {
    if (item == state.last_item()) continue;
    for (const auto& p : recent_list(state, rl, item, k_recent, out.work)) {
      if (last.members.contains(p.session)) continue;
      auto [it, inserted] = latest.try_emplace(p.session, p.timestamp);
      if (!inserted && p.timestamp > it->second) it->second = p.timestamp;
    }
  }
  std::vector<SessionPosting> pool;
  pool.reserve(latest.size());
  for (const auto& [s, ts] : latest) pool.push_back({s, ts});
  out.work.sorted += pool.size();
  const auto slots = k_recent - std::min(k_recent, last.entries.size());
  const auto keep = std::min(slots, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), more_recent);

  out.entries = std::move(last.entries);
  out.entries.insert(out.entries.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep));
  assign_relevance(rl, state, out.entries);
  return out;
}

CandidateSet select_epcsr(const SessionState& state, const RelevantSessions& rl, std::size_t k_recent) {
  require_state(state, k_recent);
  CandidateSet out;
  out.strategy = Strategy::kEpcsr;
  auto last = last_click_part(state, rl, k_recent, out.work);

  // Population in deterministic first-seen order.
  std::vector<SessionPosting> population;
  std::unordered_set<SessionId> seen = last.members;
  for (const auto item : state.distinct_items()) {
    if (item == state.last_item()) continue;
    for (const auto& p : recent_list(state, rl, item, k_recent, out.work)) {
      if (seen.insert(p.session).second) population.push_back(p);
    }
  }
  const auto slots = k_recent - std::min(k_recent, last.entries.size());
  if (population.size() > slots) {
    // Partial Fisher-Yates: the first `slots` positions become the sample.
    Rng rng(state.rng_seed());
    for (std::size_t k = 0; k < slots; ++k) {
      const auto pick = k + static_cast<std::size_t>(rng.below(population.size() - k));
      std::swap(population[k], population[pick]);
    }
    population.resize(slots);
  }

  out.entries = std::move(last.entries);
  out.entries.insert(out.entries.end(), population.begin(), population.end());
  assign_relevance(rl, state, out.entries);
  return out;
}

CandidateSet select_candidates(Strategy strategy, const SessionState& state, const RelevantSessions& rl,
                               std::size_t k_recent) {
  switch (strategy) {
    case Strategy::kOriginal: return select_original(rl, k_recent);
    case Strategy::kEpcs: return select_epcs(state, rl, k_recent);
    case Strategy::kEpcsr: return select_epcsr(state, rl, k_recent);
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown strategy");
}

}  // namespace cknn
