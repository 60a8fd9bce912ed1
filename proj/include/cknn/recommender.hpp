#pragma once

#include <string_view>
#include <vector>

#include "cknn/bipartite_index.hpp"
#include "cknn/candidate_selection.hpp"
#include "cknn/similarity.hpp"

namespace cknn {

struct ScoredItem {
  ItemId item;
  double score = 0.0;

  friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

/// Ranked list, descending by score; ties go to the more popular item, then
/// the smaller item id.
struct Recommendation {
  std::vector<ScoredItem> items;

  [[nodiscard]] bool empty() const { return items.empty(); }
  /// 1-based position of `item`, or 0 if absent.
  [[nodiscard]] std::size_t rank_of(ItemId item) const;
};

struct PipelineConfig {
  std::size_t k_recent = 1000;
  std::size_t k_top = 500;
  Strategy strategy = Strategy::kEpcsr;
  SimilarityConfig similarity;
  std::size_t list_length = 20;
  bool exclude_seen = false;

  void validate() const;
};

/// Intermediate sets of one CKNN call, for inspection.
struct PipelineTrace {
  CandidateSet candidates;
  NeighborSet neighbors;
};

/// Session-based KNN: RL(x) -> RC(x) by cfg.strategy -> NN(x) -> item scores
/// score(a) = sum of sim(x, j) over neighbors j containing a.
/// An empty result means no neighbor session shares an item with x.
Recommendation recommend_cknn(const BipartiteIndex& index, const SessionState& state, const PipelineConfig& cfg,
                              PipelineTrace* trace = nullptr);

/// Item-based KNN baseline: cosine between the last item's session-incidence
/// vector and every co-occurring item's.
Recommendation recommend_iknn(const BipartiteIndex& index, const SessionState& state, const PipelineConfig& cfg);

enum class RecommenderKind { kCknn, kIknn };

RecommenderKind parse_recommender(std::string_view name);
std::string_view to_string(RecommenderKind kind);

}  // namespace cknn
