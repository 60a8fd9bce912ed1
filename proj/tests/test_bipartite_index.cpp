#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "cknn/bipartite_index.hpp"
#include "cknn/error.hpp"
#include "support/fixtures.hpp"

namespace cknn {
namespace {

using testing::ExampleNet;

std::vector<std::pair<std::string, Timestamp>> named(const ExampleNet& t, std::span<const ItemPosting> postings) {
  std::vector<std::pair<std::string, Timestamp>> out;
  for (const auto& p : postings) out.emplace_back(t.log.items.name(p.item.value), p.timestamp);
  return out;
}

std::vector<std::pair<std::string, Timestamp>> named(const ExampleNet& t, std::span<const SessionPosting> postings) {
  std::vector<std::pair<std::string, Timestamp>> out;
  for (const auto& p : postings) out.emplace_back(t.log.sessions.name(p.session.value), p.timestamp);
  return out;
}

using Named = std::vector<std::pair<std::string, Timestamp>>;

TEST(BipartiteIndexTest, SessionMapMatchesExample) {
  const ExampleNet t;
  EXPECT_EQ(named(t, t.index.items_of_session(t.session("i"))), (Named{{"a1", 0}, {"a2", 1}, {"a3", 2}, {"a6", 3}}));
  EXPECT_EQ(named(t, t.index.items_of_session(t.session("j"))), (Named{{"a3", 4}, {"a4", 5}}));
  EXPECT_EQ(named(t, t.index.items_of_session(t.session("k"))), (Named{{"a2", 6}, {"a3", 7}, {"a4", 8}}));
  EXPECT_EQ(named(t, t.index.items_of_session(t.session("l"))), (Named{{"a3", 9}, {"a5", 10}}));
}

TEST(BipartiteIndexTest, ItemMapMatchesExample) {
  const ExampleNet t;
  EXPECT_EQ(named(t, t.index.sessions_of_item(t.item("a1"))), (Named{{"i", 0}}));
  EXPECT_EQ(named(t, t.index.sessions_of_item(t.item("a2"))), (Named{{"i", 1}, {"k", 6}}));
  EXPECT_EQ(named(t, t.index.sessions_of_item(t.item("a3"))), (Named{{"i", 2}, {"j", 4}, {"k", 7}, {"l", 9}}));
  EXPECT_EQ(named(t, t.index.sessions_of_item(t.item("a4"))), (Named{{"j", 5}, {"k", 8}}));
  EXPECT_EQ(named(t, t.index.sessions_of_item(t.item("a5"))), (Named{{"l", 10}}));
  EXPECT_EQ(named(t, t.index.sessions_of_item(t.item("a6"))), (Named{{"i", 3}}));
  EXPECT_EQ(t.index.item_degree(t.item("a3")), 4u);
  EXPECT_EQ(t.index.num_sessions(), 4u);
  EXPECT_EQ(t.index.num_items(), 6u);
  EXPECT_EQ(t.index.num_edges(), 11u);
}

TEST(BipartiteIndexTest, UnknownKeysAreEmpty) {
  const ExampleNet t;
  EXPECT_TRUE(t.index.sessions_of_item(ItemId{999}).empty());
  EXPECT_TRUE(t.index.sessions_of_item(ItemId::invalid()).empty());
  EXPECT_TRUE(t.index.items_of_session(SessionId{999}).empty());
  EXPECT_EQ(t.index.session_degree(SessionId{999}), 0u);
  EXPECT_FALSE(t.index.contains(ItemId{999}));
}

TEST(BipartiteIndexTest, Singleton) {
  const std::vector<Interaction> rows{{SessionId{0}, ItemId{0}, 5}};
  const auto index = BipartiteIndex::build(rows);
  EXPECT_EQ(index.num_sessions(), 1u);
  EXPECT_EQ(index.num_items(), 1u);
  EXPECT_EQ(index.session_degree(SessionId{0}), 1u);
  EXPECT_EQ(index.item_degree(ItemId{0}), 1u);
}

TEST(BipartiteIndexTest, RejectsEmptyAndNegative) {
  try {
    BipartiteIndex::build({});
    FAIL() << "expected empty dataset error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyDataset);
  }
  const std::vector<Interaction> negative{{SessionId{0}, ItemId{0}, -1}};
  try {
    BipartiteIndex::build(negative);
    FAIL() << "expected invalid argument";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
  }
}

TEST(BipartiteIndexTest, RepeatedClicksCollapseToEarliest) {
  const std::vector<Interaction> rows{
      {SessionId{0}, ItemId{1}, 30}, {SessionId{0}, ItemId{1}, 10}, {SessionId{0}, ItemId{2}, 20}, {SessionId{0}, ItemId{1}, 40}};
  const auto index = BipartiteIndex::build(rows);
  const auto items = index.items_of_session(SessionId{0});
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0], (ItemPosting{ItemId{1}, 10}));
  EXPECT_EQ(items[1], (ItemPosting{ItemId{2}, 20}));
  EXPECT_EQ(index.item_degree(ItemId{1}), 1u);
}

TEST(BipartiteIndexTest, TimestampTiesOrderedById) {
  const std::vector<Interaction> rows{{SessionId{0}, ItemId{5}, 7}, {SessionId{0}, ItemId{2}, 7}, {SessionId{3}, ItemId{2}, 7}};
  const auto index = BipartiteIndex::build(rows);
  const auto items = index.items_of_session(SessionId{0});
  EXPECT_EQ(items[0].item, ItemId{2});
  EXPECT_EQ(items[1].item, ItemId{5});
  const auto sessions = index.sessions_of_item(ItemId{2});
  EXPECT_EQ(sessions[0].session, SessionId{0});
  EXPECT_EQ(sessions[1].session, SessionId{3});
}

TEST(BipartiteIndexProperty, TransposeDegreesAndOrderInsensitivity) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 200; ++round) {
    auto rows = testing::random_interactions(rng, 30, 25, 8, 50);
    const auto index = BipartiteIndex::build(rows);

    std::set<std::tuple<std::uint32_t, std::uint32_t, Timestamp>> from_sessions;
    std::set<std::tuple<std::uint32_t, std::uint32_t, Timestamp>> from_items;
    std::size_t degree_sum_sessions = 0;
    std::size_t degree_sum_items = 0;
    for (const auto s : index.sessions()) {
      const auto postings = index.items_of_session(s);
      degree_sum_sessions += index.session_degree(s);
      std::set<ItemId> distinct;
      for (const auto& p : postings) {
        from_sessions.emplace(s.value, p.item.value, p.timestamp);
        distinct.insert(p.item);
      }
      EXPECT_EQ(distinct.size(), index.session_degree(s));
      EXPECT_TRUE(std::is_sorted(postings.begin(), postings.end(),
                                 [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; }));
      const auto set = index.item_set_of_session(s);
      EXPECT_TRUE(std::is_sorted(set.begin(), set.end()));
    }
    for (const auto i : index.items()) {
      degree_sum_items += index.item_degree(i);
      for (const auto& p : index.sessions_of_item(i)) from_items.emplace(p.session.value, i.value, p.timestamp);
    }
    EXPECT_EQ(from_sessions, from_items);

    std::map<std::pair<std::uint32_t, std::uint32_t>, Timestamp> edges;
    for (const auto& e : rows) {
      auto [it, inserted] = edges.try_emplace({e.session.value, e.item.value}, e.timestamp);
      if (!inserted) it->second = std::min(it->second, e.timestamp);
    }
    EXPECT_EQ(degree_sum_sessions, edges.size());
    EXPECT_EQ(degree_sum_items, edges.size());
    for (const auto& [key, ts] : edges) EXPECT_TRUE(from_sessions.contains({key.first, key.second, ts}));

    std::shuffle(rows.begin(), rows.end(), rng);
    EXPECT_EQ(BipartiteIndex::build(rows), index);
  }
}

TEST(SnapshotTest, RoundTrip) {
  const ExampleNet t;
  std::stringstream buf;
  write_snapshot(buf, {t.index, t.log.sessions, t.log.items});
  const auto loaded = read_snapshot(buf);
  EXPECT_EQ(loaded.index, t.index);
  EXPECT_EQ(loaded.sessions, t.log.sessions);
  EXPECT_EQ(loaded.items, t.log.items);

  std::stringstream again;
  write_snapshot(again, loaded);
  std::stringstream first;
  write_snapshot(first, {t.index, t.log.sessions, t.log.items});
  EXPECT_EQ(again.str(), first.str());
}

TEST(SnapshotTest, RejectsGarbageAndTruncation) {
  std::stringstream garbage("definitely not a snapshot");
  EXPECT_THROW(read_snapshot(garbage), Error);

  const ExampleNet t;
  std::stringstream buf;
  write_snapshot(buf, {t.index, t.log.sessions, t.log.items});
  auto bytes = buf.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(read_snapshot(truncated), Error);

  bytes[8] = 99;  // version field
  std::stringstream wrong_version(bytes);
  EXPECT_THROW(read_snapshot(wrong_version), Error);
}

}  // namespace
}  // namespace cknn
