#pragma once

#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "cknn/cknn.hpp"

namespace cknn::testing {

inline InteractionLog make_log(const std::vector<std::tuple<std::string, std::string, Timestamp>>& rows) {
  InteractionLog log;
  for (const auto& [s, i, t] : rows) {
    log.rows.push_back({SessionId{log.sessions.intern(s)}, ItemId{log.items.intern(i)}, t});
  }
  return log;
}

/// The 11-click example: sessions i, j, k, l over items a1..a6.
inline InteractionLog example_log() {
  return make_log({
      {"i", "a1", 0}, {"i", "a2", 1}, {"i", "a3", 2}, {"i", "a6", 3},
      {"j", "a3", 4}, {"j", "a4", 5},
      {"k", "a2", 6}, {"k", "a3", 7}, {"k", "a4", 8},
      {"l", "a3", 9}, {"l", "a5", 10},
  });
}

inline const char* example_text() {
  return "session_id\titem_id\ttimestamp\n"
         "i\ta1\t00\ni\ta2\t01\ni\ta3\t02\ni\ta6\t03\n"
         "j\ta3\t04\nj\ta4\t05\n"
         "k\ta2\t06\nk\ta3\t07\nk\ta4\t08\n"
         "l\ta3\t09\nl\ta5\t10\n";
}

struct ExampleNet {
  InteractionLog log = example_log();
  BipartiteIndex index = BipartiteIndex::build(log.rows);

  ItemId item(const std::string& name) const { return ItemId{*log.items.find(name)}; }
  SessionId session(const std::string& name) const { return SessionId{*log.sessions.find(name)}; }
};

/// Random interactions over at most `max_sessions` x `max_items`; every
/// session has at least one click. Timestamps are drawn from [0, ts_range).
inline std::vector<Interaction> random_interactions(std::mt19937_64& rng, std::uint32_t max_sessions,
                                                    std::uint32_t max_items, std::uint32_t max_len,
                                                    Timestamp ts_range = 1000) {
  std::uniform_int_distribution<std::uint32_t> n_sessions(1, max_sessions);
  std::uniform_int_distribution<std::uint32_t> n_items(1, max_items);
  const auto m = n_sessions(rng);
  const auto n = n_items(rng);
  std::uniform_int_distribution<std::uint32_t> len(1, max_len);
  std::uniform_int_distribution<std::uint32_t> pick(0, n - 1);
  std::uniform_int_distribution<Timestamp> ts(0, ts_range - 1);
  std::vector<Interaction> out;
  for (std::uint32_t s = 0; s < m; ++s) {
    const auto l = len(rng);
    for (std::uint32_t k = 0; k < l; ++k) out.push_back({SessionId{s}, ItemId{pick(rng)}, ts(rng)});
  }
  return out;
}

}  // namespace cknn::testing
