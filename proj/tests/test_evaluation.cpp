#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "cknn/data_io.hpp"
#include "cknn/error.hpp"
#include "cknn/evaluation.hpp"
#include "cknn/report.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"

namespace cknn {
namespace {

using testing::ExampleNet;

TEST(PrefixTasksTest, EnumeratesPositions) {
  const ExampleNet t;
  const std::vector<TestSession> sessions{{SessionId{9}, {t.item("a1"), t.item("a2"), t.item("a3")}}};
  const auto tasks = make_prefix_tasks(sessions, t.index);
  ASSERT_EQ(tasks.size(), 2u);
  EXPECT_EQ(tasks[0].prefix, (std::vector<ItemId>{t.item("a1")}));
  EXPECT_EQ(tasks[0].target, t.item("a2"));
  EXPECT_EQ(tasks[0].step, 2u);
  EXPECT_EQ(tasks[1].prefix, (std::vector<ItemId>{t.item("a1"), t.item("a2")}));
  EXPECT_EQ(tasks[1].target, t.item("a3"));
  EXPECT_EQ(tasks[1].step, 3u);
}

TEST(PrefixTasksTest, UnknownItemsFilteredFirst) {
  const ExampleNet t;
  const std::vector<TestSession> sessions{{SessionId{9}, {t.item("a1"), ItemId{50}, t.item("a2")}},
                                          {SessionId{10}, {t.item("a5")}},
                                          {SessionId{11}, {ItemId{51}, t.item("a5")}}};
  const auto tasks = make_prefix_tasks(sessions, t.index);
  ASSERT_EQ(tasks.size(), 1u);
  EXPECT_EQ(tasks[0].prefix, (std::vector<ItemId>{t.item("a1")}));
  EXPECT_EQ(tasks[0].target, t.item("a2"));
  EXPECT_EQ(tasks[0].step, 2u);
}

TEST(GroupSessionsTest, OrdersByTimeKeepingTies) {
  const std::vector<Interaction> rows{{SessionId{2}, ItemId{7}, 5}, {SessionId{1}, ItemId{3}, 9}, {SessionId{2}, ItemId{4}, 1},
                                      {SessionId{2}, ItemId{6}, 5}, {SessionId{1}, ItemId{8}, 2}};
  const auto sessions = group_sessions(rows);
  ASSERT_EQ(sessions.size(), 2u);
  EXPECT_EQ(sessions[0].session, SessionId{1});
  EXPECT_EQ(sessions[0].items, (std::vector<ItemId>{ItemId{8}, ItemId{3}}));
  EXPECT_EQ(sessions[1].items, (std::vector<ItemId>{ItemId{4}, ItemId{7}, ItemId{6}}));
}

PrefixTask task_of(std::vector<ItemId> prefix, ItemId target, std::uint32_t session = 100) {
  const auto step = prefix.size() + 1;
  return {SessionId{session}, std::move(prefix), target, step};
}

TEST(EvaluateTest, PerfectAndThirdPlace) {
  const ExampleNet t;
  PipelineConfig cfg;
  cfg.strategy = Strategy::kOriginal;
  cfg.k_recent = 10;
  // x = {a5}: only neighbor l, ranks a3 (degree 4) before a5.
  const std::vector<PrefixTask> first{task_of({t.item("a5")}, t.item("a3"))};
  const auto r1 = evaluate(t.index, first, cfg);
  EXPECT_EQ(r1.hr_at_l, 1.0);
  EXPECT_EQ(r1.mrr_at_l, 1.0);
  EXPECT_EQ(r1.num_samples, 1u);

  // x = {a6}: only neighbor i; items a1, a2, a3, a6 all tie, so degree then id orders
  // them a3 (4), a2 (2), then a1 and a6 by id.
  const std::vector<PrefixTask> third{task_of({t.item("a6")}, t.item("a1"))};
  const auto r3 = evaluate_detailed(t.index, third, cfg);
  EXPECT_EQ(r3.outcomes[0].rank, 3u);
  EXPECT_EQ(r3.report.hr_at_l, 1.0);
  EXPECT_DOUBLE_EQ(r3.report.mrr_at_l, 1.0 / 3.0);
}

TEST(EvaluateTest, TruncatedMissAndCoverage) {
  const ExampleNet t;
  PipelineConfig cfg;
  cfg.strategy = Strategy::kOriginal;
  cfg.list_length = 2;
  const std::vector<PrefixTask> tasks{task_of({t.item("a6")}, t.item("a6"), 100), task_of({t.item("a5")}, t.item("a5"), 101)};
  const auto result = evaluate_detailed(t.index, tasks, cfg);
  EXPECT_EQ(result.outcomes[0].rank, 0u);
  EXPECT_EQ(result.outcomes[1].rank, 2u);
  EXPECT_DOUBLE_EQ(result.report.hr_at_l, 0.5);
  EXPECT_DOUBLE_EQ(result.report.mrr_at_l, 0.25);
  // Lists {a3, a2} and {a3, a5}: 3 of 6 catalog items.
  EXPECT_EQ(result.report.recommended_union_size, 3u);
  EXPECT_EQ(result.report.catalog_size, 6u);
  EXPECT_DOUBLE_EQ(result.report.coverage_at_l, 0.5);
}

TEST(EvaluateTest, EmptyTestSet) {
  const ExampleNet t;
  try {
    evaluate(t.index, {}, {});
    FAIL() << "expected empty test set";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyTestSet);
  }
}

TEST(EvaluateTest, IknnRecommender) {
  const ExampleNet t;
  const std::vector<PrefixTask> tasks{task_of({t.item("a1"), t.item("a4")}, t.item("a3"))};
  const auto r = evaluate(t.index, tasks, {}, {RecommenderKind::kIknn, 0, 1});
  EXPECT_EQ(r.hr_at_l, 1.0);
  EXPECT_EQ(r.mrr_at_l, 1.0);
  EXPECT_TRUE(r.per_strategy_timing.contains("iknn"));
}

struct Workload {
  InteractionLog log;
  BipartiteIndex index;
  std::vector<PrefixTask> tasks;
};

Workload synthetic_workload(std::size_t sessions, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.num_sessions = sessions;
  spec.catalog_size = 200;
  spec.mean_length = 5;
  spec.seed = seed;
  spec.day_span = 10;
  auto log = gen_synthetic(spec);
  const auto split = split_by_days(log.rows);
  auto index = BipartiteIndex::build(split.train);
  auto tasks = make_prefix_tasks(group_sessions(split.test), index);
  return {std::move(log), std::move(index), std::move(tasks)};
}

TEST(EvaluateProperty, ThreadCountDoesNotChangeReports) {
  const auto w = synthetic_workload(3000, 5);
  ASSERT_GT(w.tasks.size(), 100u);
  PipelineConfig cfg;
  cfg.k_recent = 100;
  cfg.k_top = 50;
  std::string reference;
  for (const std::size_t threads : {1, 2, 4, 7}) {
    const auto report = evaluate(w.index, w.tasks, cfg, {RecommenderKind::kCknn, 17, threads});
    std::ostringstream out;
    write_report_json(out, report, {cfg, RecommenderKind::kCknn, 17, "synthetic", 1});
    if (reference.empty()) {
      reference = out.str();
    } else {
      EXPECT_EQ(out.str(), reference) << "threads=" << threads;
    }
  }
}

TEST(EvaluateProperty, OrderInsensitive) {
  const auto w = synthetic_workload(1500, 6);
  PipelineConfig cfg;
  cfg.k_recent = 60;
  cfg.k_top = 30;
  const auto base = evaluate_detailed(w.index, w.tasks, cfg, {RecommenderKind::kCknn, 3, 1});
  std::vector<std::size_t> order(w.tasks.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::mt19937_64 rng(1);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<PrefixTask> shuffled;
  for (const auto k : order) shuffled.push_back(w.tasks[k]);
  const auto other = evaluate_detailed(w.index, shuffled, cfg, {RecommenderKind::kCknn, 3, 1});
  EXPECT_EQ(other.report.hr_at_l, base.report.hr_at_l);
  EXPECT_NEAR(other.report.mrr_at_l, base.report.mrr_at_l, 1e-12);
  EXPECT_EQ(other.report.recommended_union_size, base.report.recommended_union_size);
  for (std::size_t k = 0; k < order.size(); ++k) {
    EXPECT_EQ(other.outcomes[k].rank, base.outcomes[order[k]].rank);
    EXPECT_EQ(other.outcomes[k].recommended, base.outcomes[order[k]].recommended);
  }
}

TEST(EvaluateProperty, MetricBounds) {
  const auto w = synthetic_workload(1500, 8);
  for (const auto strategy : {Strategy::kOriginal, Strategy::kEpcs, Strategy::kEpcsr}) {
    PipelineConfig cfg;
    cfg.strategy = strategy;
    cfg.k_recent = 50;
    cfg.k_top = 20;
    const auto result = evaluate_detailed(w.index, w.tasks, cfg, {RecommenderKind::kCknn, 1, 2});
    const auto& r = result.report;
    EXPECT_GE(r.mrr_at_l, 0.0);
    EXPECT_LE(r.mrr_at_l, r.hr_at_l);
    EXPECT_LE(r.hr_at_l, 1.0);
    std::set<ItemId> union_items;
    for (const auto& o : result.outcomes) union_items.insert(o.recommended.begin(), o.recommended.end());
    EXPECT_EQ(r.recommended_union_size, union_items.size());
    EXPECT_EQ(r.coverage_at_l,
              static_cast<double>(union_items.size()) / static_cast<double>(w.index.num_items()));
  }
}

TEST(EvaluateProperty, MicroDatasetsMatchBruteForce) {
  std::mt19937_64 rng(123);
  for (int round = 0; round < 100; ++round) {
    const auto rows = testing::random_interactions(rng, 10, 8, 5, 60);
    const auto index = BipartiteIndex::build(rows);
    const oracle::DenseNetwork net(rows);
    std::vector<TestSession> test;
    for (std::uint32_t s = 0; s < 3; ++s) {
      TestSession ts{SessionId{1000 + s}, {}};
      const auto len = 2 + rng() % 4;
      for (std::size_t k = 0; k < len; ++k) ts.items.push_back(ItemId{static_cast<std::uint32_t>(rng() % 10)});
      test.push_back(ts);
    }
    const auto tasks = make_prefix_tasks(test, index);
    if (tasks.empty()) continue;
    PipelineConfig cfg;
    cfg.k_recent = 1 + rng() % 8;
    cfg.k_top = 1 + rng() % 5;
    cfg.list_length = 1 + rng() % 6;
    cfg.strategy = rng() % 2 ? Strategy::kOriginal : Strategy::kEpcs;
    const auto result = evaluate_detailed(index, tasks, cfg);
    oracle::PipelineParams p;
    p.k_recent = cfg.k_recent;
    p.k_top = cfg.k_top;
    p.list_length = cfg.list_length;
    p.selection = cfg.strategy == Strategy::kOriginal ? oracle::Selection::kOriginal : oracle::Selection::kEpcs;
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      const auto expected = oracle::rank_in(oracle::recommend(net, tasks[k].prefix, p), tasks[k].target);
      EXPECT_EQ(result.outcomes[k].rank, expected);
    }
  }
}

TEST(SweepTest, SingletonMatchesEvaluateAndPresets) {
  const auto w = synthetic_workload(1500, 9);
  PipelineConfig cfg;
  cfg.k_recent = 50;
  cfg.k_top = 20;
  const std::vector<double> half{0.5};
  const auto single = sweep(w.index, w.tasks, half, half, cfg);
  ASSERT_EQ(single.size(), 1u);
  const auto direct = evaluate(w.index, w.tasks, cfg);
  EXPECT_EQ(single[0].report.hr_at_l, direct.hr_at_l);
  EXPECT_EQ(single[0].report.mrr_at_l, direct.mrr_at_l);

  const std::vector<double> ends{1.0, 0.0, 1.0};
  const std::vector<double> one{1.0};
  const auto rows = sweep(w.index, w.tasks, ends, one, cfg);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].lambda, 0.0);
  for (const auto& [name, row] : {std::pair{"hc", rows[0]}, std::pair{"md", rows[1]}}) {
    auto preset_cfg = cfg;
    preset_cfg.similarity = preset(name);
    const auto r = evaluate(w.index, w.tasks, preset_cfg);
    EXPECT_EQ(row.report.hr_at_l, r.hr_at_l) << name;
    EXPECT_EQ(row.report.mrr_at_l, r.mrr_at_l) << name;
    EXPECT_EQ(row.report.coverage_at_l, r.coverage_at_l) << name;
  }
}

TEST(SweepTest, FullGridRuns) {
  const auto w = synthetic_workload(600, 10);
  PipelineConfig cfg;
  cfg.k_recent = 30;
  cfg.k_top = 10;
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(k / 10.0);
  const auto rows = sweep(w.index, w.tasks, grid, grid, cfg);
  EXPECT_EQ(rows.size(), 121u);
  EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::pair{a.lambda, a.beta} < std::pair{b.lambda, b.beta};
  }));
}

TEST(BenchTest, CountersOrderedAndReproducible) {
  const auto w = synthetic_workload(3000, 11);
  PipelineConfig cfg;
  cfg.k_recent = 100;
  cfg.k_top = 50;
  const std::vector<Strategy> all{Strategy::kOriginal, Strategy::kEpcs, Strategy::kEpcsr};
  const auto rows = bench_selection(w.index, w.tasks, all, cfg, 4);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_LE(rows[2].work.sorted, rows[1].work.sorted);
  EXPECT_LE(rows[1].work.sorted, rows[0].work.sorted);
  EXPECT_GT(rows[0].work.examined, 0u);
  const auto again = bench_selection(w.index, w.tasks, all, cfg, 4);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(again[k].work, rows[k].work);
    EXPECT_EQ(again[k].per_task, rows[k].per_task);
  }

  const std::vector<PrefixTask> one{w.tasks.front()};
  const std::vector<Strategy> original{Strategy::kOriginal};
  const auto single = bench_selection(w.index, one, original, cfg);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_GT(single[0].work.examined, 0u);
  EXPECT_THROW(bench_selection(w.index, one, {}, cfg), Error);
}

TEST(AverageReportsTest, MeansAndSums) {
  EvalReport a;
  a.hr_at_l = 0.5;
  a.mrr_at_l = 0.25;
  a.coverage_at_l = 0.1;
  a.num_samples = 10;
  a.list_length = 20;
  EvalReport b = a;
  b.hr_at_l = 1.0;
  b.num_samples = 30;
  const std::vector<EvalReport> both{a, b};
  const auto avg = average_reports(both);
  EXPECT_DOUBLE_EQ(avg.hr_at_l, 0.75);
  EXPECT_DOUBLE_EQ(avg.mrr_at_l, 0.25);
  EXPECT_EQ(avg.num_samples, 40u);
  EXPECT_THROW(average_reports({}), Error);
}

}  // namespace
}  // namespace cknn
