#include "cknn/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "cknn/error.hpp"

namespace cknn {

void SimilarityConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorKind::kInvalidArgument, "lambda must be in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error(ErrorKind::kInvalidArgument, "beta must be in [0, 1]");
}

SimilarityConfig preset(std::string_view name, double lambda) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  SimilarityConfig cfg;
  if (lower == "cosine") {
    cfg = {0.5, 0.0, SimilarityForm::kFull};
  } else if (lower == "md") {
    cfg = {1.0, 1.0, SimilarityForm::kFull};
  } else if (lower == "hc") {
    cfg = {0.0, 1.0, SimilarityForm::kFull};
  } else if (lower == "mdhc") {
    cfg = {lambda, 1.0, SimilarityForm::kFull};
  } else if (lower == "dsm") {
    cfg = {0.5, 0.5, SimilarityForm::kFull};
  } else {
    throw Error(ErrorKind::kInvalidArgument,
                "unknown similarity preset '" + std::string(name) + "' (expected cosine, md, hc, mdhc or dsm)");
  }
  cfg.validate();
  return cfg;
}

QuerySession::QuerySession(const BipartiteIndex& index, std::span<const ItemId> items, const SimilarityConfig& cfg)
    : index_(&index), cfg_(cfg), items_(items.begin(), items.end()) {
  cfg_.validate();
  std::sort(items_.begin(), items_.end());
  items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
  weights_.reserve(items_.size());
  for (const auto item : items_) {
    const auto d = index.item_degree(item);
    // Unknown items cannot be shared with any training session.
    weights_.push_back(d == 0 ? 0.0 : 1.0 / std::pow(static_cast<double>(d), cfg_.beta));
  }
}

double QuerySession::rank_score(SessionId j) const {
  const auto j_items = index_->item_set_of_session(j);
  if (j_items.empty()) return 0.0;
  double shared = 0.0;
  auto a = items_.begin();
  auto b = j_items.begin();
  while (a != items_.end() && b != j_items.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      shared += weights_[static_cast<std::size_t>(a - items_.begin())];
      ++a;
      ++b;
    }
  }
  if (shared == 0.0) return 0.0;
  return shared / std::pow(static_cast<double>(j_items.size()), 1.0 - cfg_.lambda);
}

double QuerySession::similarity(SessionId j) const {
  const double score = rank_score(j);
  if (cfg_.form == SimilarityForm::kSimplified) return score;
  return score / std::pow(static_cast<double>(items_.size()), cfg_.lambda);
}

double sim_dsm(const BipartiteIndex& index, std::span<const ItemId> x_items, SessionId j, const SimilarityConfig& cfg) {
  if (x_items.empty()) throw Error(ErrorKind::kInvalidArgument, "current session is empty");
  if (!index.contains(j)) throw Error(ErrorKind::kUnknownSession, "session " + std::to_string(j.value) + " not in index");
  return QuerySession(index, x_items, cfg).similarity(j);
}

NeighborSet top_k_sessions(const BipartiteIndex& index, std::span<const ItemId> x_items, const CandidateSet& rc,
                           std::size_t k_top, const SimilarityConfig& cfg) {
  if (k_top == 0) throw Error(ErrorKind::kInvalidArgument, "k_top must be positive");
  NeighborSet out;
  out.k_top = k_top;
  if (rc.entries.empty() || x_items.empty()) return out;

  const QuerySession query(index, x_items, cfg);
  std::vector<Neighbor> scored;
  scored.reserve(rc.entries.size());
  for (const auto& c : rc.entries) {
    const double score = query.rank_score(c.session);
    if (score > 0.0) scored.push_back({c.session, score, c.timestamp});
  }
  // Ranking uses the form-independent score; the configured form only
  // rescales the reported values.
  const auto better = [](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.relevance != b.relevance) return a.relevance > b.relevance;
    return a.session < b.session;
  };
  const auto keep = std::min(k_top, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), better);
  scored.resize(keep);
  if (cfg.form == SimilarityForm::kFull) {
    const double dx_pow = std::pow(static_cast<double>(query.degree()), cfg.lambda);
    for (auto& n : scored) n.similarity /= dx_pow;
  }
  out.neighbors = std::move(scored);
  return out;
}

}  // namespace cknn
