#include "cknn/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>
#include <unordered_set>

#include "cknn/error.hpp"
#include "cknn/rng.hpp"

namespace cknn {

std::vector<TestSession> group_sessions(std::span<const Interaction> interactions) {
  std::vector<std::size_t> order(interactions.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = interactions[a];
    const auto& y = interactions[b];
    if (x.session != y.session) return x.session < y.session;
    return x.timestamp < y.timestamp;
  });
  std::vector<TestSession> out;
  for (const auto k : order) {
    const auto& e = interactions[k];
    if (out.empty() || out.back().session != e.session) out.push_back({e.session, {}});
    out.back().items.push_back(e.item);
  }
  return out;
}

std::vector<PrefixTask> make_prefix_tasks(std::span<const TestSession> sessions, const BipartiteIndex& index) {
  std::vector<PrefixTask> tasks;
  for (const auto& s : sessions) {
    std::vector<ItemId> known;
    known.reserve(s.items.size());
    for (const auto item : s.items) {
      if (index.contains(item)) known.push_back(item);
    }
    for (std::size_t step = 2; step <= known.size(); ++step) {
      tasks.push_back({s.session, {known.begin(), known.begin() + static_cast<std::ptrdiff_t>(step - 1)},
                       known[step - 1], step});
    }
  }
  return tasks;
}

namespace {

/// Half-open range of tasks that extend one another click by click.
struct Chain {
  std::size_t begin;
  std::size_t end;
};

bool extends(const PrefixTask& prev, const PrefixTask& next) {
  if (prev.session != next.session || next.prefix.size() != prev.prefix.size() + 1) return false;
  if (next.prefix.back() != prev.target) return false;
  return std::equal(prev.prefix.begin(), prev.prefix.end(), next.prefix.begin());
}

std::vector<Chain> make_chains(std::span<const PrefixTask> tasks) {
  std::vector<Chain> chains;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    if (chains.empty() || !extends(tasks[k - 1], tasks[k])) {
      chains.push_back({k, k + 1});
    } else {
      chains.back().end = k + 1;
    }
  }
  return chains;
}

void run_chain(const BipartiteIndex& index, std::span<const PrefixTask> tasks, const Chain& chain,
               const PipelineConfig& cfg, const EvalOptions& options, std::vector<TaskOutcome>& outcomes) {
  SessionState state(tasks[chain.begin].session);
  for (std::size_t t = chain.begin; t < chain.end; ++t) {
    const auto& task = tasks[t];
    auto& outcome = outcomes[t];
    if (task.prefix.empty()) throw Error(ErrorKind::kInvalidArgument, "task with empty prefix");
    // Bring the state up to this task's prefix.
    for (std::size_t k = state.items().size(); k < task.prefix.size(); ++k) {
      state.advance(index, task.prefix[k], cfg.k_recent, &outcome.work);
    }
    state.set_rng_seed(derive_seed(options.seed, task.session.value, task.step));

    Recommendation rec;
    if (options.recommender == RecommenderKind::kCknn) {
      PipelineTrace trace;
      rec = recommend_cknn(index, state, cfg, &trace);
      outcome.work += trace.candidates.work;
    } else {
      rec = recommend_iknn(index, state, cfg);
    }
    outcome.rank = rec.rank_of(task.target);
    outcome.recommended.reserve(rec.items.size());
    for (const auto& s : rec.items) outcome.recommended.push_back(s.item);
  }
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested != 0) return requested;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace

EvalResult evaluate_detailed(const BipartiteIndex& index, std::span<const PrefixTask> tasks, const PipelineConfig& cfg,
                             const EvalOptions& options) {
  if (tasks.empty()) throw Error(ErrorKind::kEmptyTestSet, "empty test set");
  cfg.validate();

  const auto started = std::chrono::steady_clock::now();
  EvalResult result;
  result.outcomes.resize(tasks.size());
  const auto chains = make_chains(tasks);
  const auto threads = std::min(resolve_threads(options.threads), chains.size());

  if (threads <= 1) {
    for (const auto& chain : chains) run_chain(index, tasks, chain, cfg, options, result.outcomes);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> workers;
      workers.reserve(threads);
      for (std::size_t w = 0; w < threads; ++w) {
        workers.emplace_back([&, w] {
          try {
            for (auto c = next.fetch_add(1); c < chains.size(); c = next.fetch_add(1)) {
              run_chain(index, tasks, chains[c], cfg, options, result.outcomes);
            }
          } catch (...) {
            errors[w] = std::current_exception();
            next = chains.size();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  auto& report = result.report;
  report.num_samples = tasks.size();
  report.list_length = cfg.list_length;
  report.catalog_size = index.num_items();
  std::size_t hits = 0;
  double reciprocal = 0.0;
  std::unordered_set<ItemId> recommended;
  WorkCounters work;
  for (const auto& o : result.outcomes) {
    if (o.rank > 0) {
      ++hits;
      reciprocal += 1.0 / static_cast<double>(o.rank);
    }
    recommended.insert(o.recommended.begin(), o.recommended.end());
    work += o.work;
  }
  const auto n = static_cast<double>(tasks.size());
  report.hr_at_l = static_cast<double>(hits) / n;
  report.mrr_at_l = reciprocal / n;
  report.recommended_union_size = recommended.size();
  report.coverage_at_l =
      report.catalog_size == 0 ? 0.0 : static_cast<double>(recommended.size()) / static_cast<double>(report.catalog_size);
  const std::string label =
      options.recommender == RecommenderKind::kCknn ? std::string(to_string(cfg.strategy)) : "iknn";
  report.per_strategy_timing[label] = {wall, work};
  return result;
}

EvalReport evaluate(const BipartiteIndex& index, std::span<const PrefixTask> tasks, const PipelineConfig& cfg,
                    const EvalOptions& options) {
  return evaluate_detailed(index, tasks, cfg, options).report;
}

EvalReport average_reports(std::span<const EvalReport> reports) {
  if (reports.empty()) throw Error(ErrorKind::kEmptyTestSet, "no reports to average");
  EvalReport out;
  for (const auto& r : reports) {
    out.hr_at_l += r.hr_at_l;
    out.mrr_at_l += r.mrr_at_l;
    out.coverage_at_l += r.coverage_at_l;
    out.num_samples += r.num_samples;
    out.recommended_union_size += r.recommended_union_size;
    out.catalog_size += r.catalog_size;
    for (const auto& [label, timing] : r.per_strategy_timing) {
      auto& t = out.per_strategy_timing[label];
      t.wall_seconds += timing.wall_seconds;
      t.work += timing.work;
    }
  }
  const auto n = static_cast<double>(reports.size());
  out.hr_at_l /= n;
  out.mrr_at_l /= n;
  out.coverage_at_l /= n;
  out.list_length = reports.front().list_length;
  return out;
}

std::vector<SweepRow> sweep(const BipartiteIndex& index, std::span<const PrefixTask> tasks,
                            std::span<const double> lambdas, std::span<const double> betas,
                            const PipelineConfig& base_cfg, const EvalOptions& options) {
  std::vector<double> ls(lambdas.begin(), lambdas.end());
  std::vector<double> bs(betas.begin(), betas.end());
  std::sort(ls.begin(), ls.end());
  std::sort(bs.begin(), bs.end());
  ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
  bs.erase(std::unique(bs.begin(), bs.end()), bs.end());

  std::vector<SweepRow> rows;
  rows.reserve(ls.size() * bs.size());
  for (const double l : ls) {
    for (const double b : bs) {
      auto cfg = base_cfg;
      cfg.similarity.lambda = l;
      cfg.similarity.beta = b;
      rows.push_back({l, b, evaluate(index, tasks, cfg, options)});
    }
  }
  return rows;
}

std::vector<BenchRow> bench_selection(const BipartiteIndex& index, std::span<const PrefixTask> tasks,
                                      std::span<const Strategy> strategies, const PipelineConfig& cfg,
                                      std::uint64_t seed) {
  if (strategies.empty()) throw Error(ErrorKind::kInvalidArgument, "no strategies to benchmark");
  std::vector<BenchRow> rows;
  for (const auto strategy : strategies) {
    auto run_cfg = cfg;
    run_cfg.strategy = strategy;
    const auto result = evaluate_detailed(index, tasks, run_cfg, {RecommenderKind::kCknn, seed, 1});
    BenchRow row;
    row.strategy = strategy;
    row.tasks = tasks.size();
    const auto& timing = result.report.per_strategy_timing.at(std::string(to_string(strategy)));
    row.wall_seconds = timing.wall_seconds;
    row.work = timing.work;
    row.per_task.reserve(result.outcomes.size());
    for (const auto& o : result.outcomes) row.per_task.push_back(o.work);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace cknn
