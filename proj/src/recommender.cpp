#include "cknn/recommender.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <unordered_map>

#include "cknn/error.hpp"

namespace cknn {

std::size_t Recommendation::rank_of(ItemId item) const {
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (items[k].item == item) return k + 1;
  }
  return 0;
}

void PipelineConfig::validate() const {
  if (k_recent == 0) throw Error(ErrorKind::kInvalidArgument, "k_recent must be positive");
  if (k_top == 0) throw Error(ErrorKind::kInvalidArgument, "k_top must be positive");
  if (list_length == 0) throw Error(ErrorKind::kInvalidArgument, "list length must be positive");
  similarity.validate();
}

RecommenderKind parse_recommender(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "cknn") return RecommenderKind::kCknn;
  if (lower == "iknn") return RecommenderKind::kIknn;
  throw Error(ErrorKind::kInvalidArgument, "unknown recommender '" + std::string(name) + "' (expected cknn or iknn)");
}

std::string_view to_string(RecommenderKind kind) { return kind == RecommenderKind::kCknn ? "cknn" : "iknn"; }

namespace {

Recommendation finalize(const BipartiteIndex& index, std::unordered_map<ItemId, double>& scores,
                        const SessionState& state, const PipelineConfig& cfg) {
  if (cfg.exclude_seen) {
    for (const auto item : state.distinct_items()) scores.erase(item);
  }
  struct Ranked {
    ItemId item;
    double score;
    std::uint32_t degree;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(scores.size());
  for (const auto& [item, score] : scores) {
    if (score > 0.0) ranked.push_back({item, score, index.item_degree(item)});
  }
  const auto keep = std::min(cfg.list_length, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
                    [](const Ranked& a, const Ranked& b) {
                      if (a.score != b.score) return a.score > b.score;
                      if (a.degree != b.degree) return a.degree > b.degree;
                      return a.item < b.item;
                    });
  Recommendation out;
  out.items.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k) out.items.push_back({ranked[k].item, ranked[k].score});
  return out;
}

}  // namespace

Recommendation recommend_cknn(const BipartiteIndex& index, const SessionState& state, const PipelineConfig& cfg,
                              PipelineTrace* trace) {
  if (state.empty()) throw Error(ErrorKind::kInvalidArgument, "current session has no clicks");
  cfg.validate();

  const auto rl = relevant_sessions(index, state.items(), state.own_session());
  auto candidates = select_candidates(cfg.strategy, state, rl, cfg.k_recent);
  auto neighbors = top_k_sessions(index, state.distinct_items(), candidates, cfg.k_top, cfg.similarity);

  std::unordered_map<ItemId, double> scores;
  for (const auto& n : neighbors.neighbors) {
    for (const auto& p : index.items_of_session(n.session)) scores[p.item] += n.similarity;
  }
  auto out = finalize(index, scores, state, cfg);
  if (trace) {
    trace->candidates = std::move(candidates);
    trace->neighbors = std::move(neighbors);
  }
  return out;
}

Recommendation recommend_iknn(const BipartiteIndex& index, const SessionState& state, const PipelineConfig& cfg) {
  if (state.empty()) throw Error(ErrorKind::kInvalidArgument, "current session has no clicks");
  cfg.validate();
  const auto last = state.last_item();
  const auto d_last = index.item_degree(last);
  if (d_last == 0) return {};

  std::unordered_map<ItemId, std::uint32_t> co_counts;
  const auto own = state.own_session();
  for (const auto& p : index.sessions_of_item(last)) {
    if (own && p.session == *own) continue;
    for (const auto& q : index.items_of_session(p.session)) {
      if (q.item != last) ++co_counts[q.item];
    }
  }
  std::unordered_map<ItemId, double> scores;
  scores.reserve(co_counts.size());
  const double norm_last = std::sqrt(static_cast<double>(d_last));
  for (const auto& [item, count] : co_counts) {
    scores[item] = static_cast<double>(count) / (norm_last * std::sqrt(static_cast<double>(index.item_degree(item))));
  }
  return finalize(index, scores, state, cfg);
}

}  // namespace cknn
