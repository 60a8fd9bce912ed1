#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "cknn/bipartite_index.hpp"
#include "cknn/candidate_selection.hpp"
#include "cknn/types.hpp"

namespace cknn {

/// Whether the current-session degree factor 1/d_x^lambda is applied. It is
/// constant across candidates, so both forms rank candidates identically.
enum class SimilarityForm { kFull, kSimplified };

/// Diffusion-based session similarity parameters.
///
///   sim(x, j) = 1 / (d_x^lambda * d_j^(1 - lambda)) * sum_{i in x and j} 1 / d_i^beta
///
/// lambda balances the two session degrees, beta damps popular items.
/// (0.5, 0) is cosine, (1, 1) mass diffusion, (0, 1) heat conduction and
/// (lambda, 1) their hybrid.
struct SimilarityConfig {
  double lambda = 0.5;
  double beta = 0.5;
  SimilarityForm form = SimilarityForm::kFull;

  /// Throws Error{kInvalidArgument} if either parameter is outside [0, 1].
  void validate() const;
};

/// "cosine", "md", "hc", "dsm" (0.5, 0.5), or "mdhc" with `lambda` (case-insensitive).
SimilarityConfig preset(std::string_view name, double lambda = 0.5);

/// Current session prepared for repeated similarity evaluation: distinct
/// items sorted by id with their 1/d_i^beta weights.
class QuerySession {
 public:
  QuerySession(const BipartiteIndex& index, std::span<const ItemId> items, const SimilarityConfig& cfg);

  /// d_x: number of distinct items in the current session.
  [[nodiscard]] std::size_t degree() const { return items_.size(); }
  [[nodiscard]] const SimilarityConfig& config() const { return cfg_; }

  /// Candidate-dependent part: sum of shared-item weights / d_j^(1 - lambda).
  /// Shared items are summed in ascending item-id order.
  [[nodiscard]] double rank_score(SessionId j) const;
  /// The similarity in the configured form.
  [[nodiscard]] double similarity(SessionId j) const;

 private:
  const BipartiteIndex* index_;
  SimilarityConfig cfg_;
  std::vector<ItemId> items_;
  std::vector<double> weights_;
};

/// Similarity of the current session `x_items` to training session j.
/// Throws Error{kUnknownSession} if j is absent and Error{kInvalidArgument}
/// if x_items is empty.
double sim_dsm(const BipartiteIndex& index, std::span<const ItemId> x_items, SessionId j, const SimilarityConfig& cfg);

struct Neighbor {
  SessionId session;
  double similarity = 0.0;
  Timestamp relevance = 0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// NN(x): sorted by similarity descending, ties by later relevance timestamp,
/// then smaller session id. All similarities are positive.
struct NeighborSet {
  std::vector<Neighbor> neighbors;
  std::size_t k_top = 0;
};

NeighborSet top_k_sessions(const BipartiteIndex& index, std::span<const ItemId> x_items, const CandidateSet& rc,
                           std::size_t k_top, const SimilarityConfig& cfg);

}  // namespace cknn
