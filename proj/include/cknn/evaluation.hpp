#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cknn/bipartite_index.hpp"
#include "cknn/recommender.hpp"

namespace cknn {

/// A test session's clicks in time order.
struct TestSession {
  SessionId session;
  std::vector<ItemId> items;
};

/// Predict the step-th click (target) from the first step-1 clicks.
struct PrefixTask {
  SessionId session;
  std::vector<ItemId> prefix;
  ItemId target;
  std::size_t step = 0;
};

/// Groups interactions by session; clicks are ordered by timestamp with ties
/// kept in input order. Sessions come out in ascending id order.
std::vector<TestSession> group_sessions(std::span<const Interaction> interactions);

/// Drops items unknown to the index, discards sessions left with fewer than
/// two clicks, and emits one task per remaining position k in [2, n].
std::vector<PrefixTask> make_prefix_tasks(std::span<const TestSession> sessions, const BipartiteIndex& index);

struct StrategyTiming {
  double wall_seconds = 0.0;
  WorkCounters work;
};

struct EvalReport {
  double hr_at_l = 0.0;
  double mrr_at_l = 0.0;
  double coverage_at_l = 0.0;
  std::size_t num_samples = 0;
  std::size_t recommended_union_size = 0;
  std::size_t catalog_size = 0;
  std::size_t list_length = 0;
  std::map<std::string, StrategyTiming> per_strategy_timing;
};

/// Per-task result: 1-based rank of the target in the top-L list (0 = miss).
struct TaskOutcome {
  std::size_t rank = 0;
  WorkCounters work;
  std::vector<ItemId> recommended;
};

struct EvalOptions {
  RecommenderKind recommender = RecommenderKind::kCknn;
  std::uint64_t seed = 0;
  /// Worker threads; 0 means hardware concurrency. Results do not depend on it.
  std::size_t threads = 1;
};

struct EvalResult {
  EvalReport report;
  std::vector<TaskOutcome> outcomes;  ///< same order as the input tasks
};

/// Runs every task and aggregates HR@L, MRR@L (rank truncated at L) and
/// Coverage@L over the index catalog. Consecutive tasks of one session reuse
/// the incrementally advanced session state. The EPCSR stream of a task is
/// seeded from (seed, session, step). Throws Error{kEmptyTestSet} when
/// `tasks` is empty.
EvalResult evaluate_detailed(const BipartiteIndex& index, std::span<const PrefixTask> tasks, const PipelineConfig& cfg,
                             const EvalOptions& options = {});
EvalReport evaluate(const BipartiteIndex& index, std::span<const PrefixTask> tasks, const PipelineConfig& cfg,
                    const EvalOptions& options = {});

/// Mean of per-window metrics; counts and timings are summed.
EvalReport average_reports(std::span<const EvalReport> reports);

struct SweepRow {
  double lambda = 0.0;
  double beta = 0.0;
  EvalReport report;
};

/// One evaluation per (lambda, beta) grid point, sorted by (lambda, beta).
std::vector<SweepRow> sweep(const BipartiteIndex& index, std::span<const PrefixTask> tasks,
                            std::span<const double> lambdas, std::span<const double> betas,
                            const PipelineConfig& base_cfg, const EvalOptions& options = {});

struct BenchRow {
  Strategy strategy = Strategy::kOriginal;
  std::size_t tasks = 0;
  double wall_seconds = 0.0;
  WorkCounters work;
  std::vector<WorkCounters> per_task;
};

/// Runs the identical task stream and seed under each strategy, single-threaded.
std::vector<BenchRow> bench_selection(const BipartiteIndex& index, std::span<const PrefixTask> tasks,
                                      std::span<const Strategy> strategies, const PipelineConfig& cfg,
                                      std::uint64_t seed = 0);

}  // namespace cknn
