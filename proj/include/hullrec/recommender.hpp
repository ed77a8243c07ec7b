#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "hullrec/embedding.hpp"
#include "hullrec/hin_graph.hpp"
#include "hullrec/hull.hpp"
#include "hullrec/rating_model.hpp"

namespace hullrec {

enum class ExpectedSetKind { Base, BaseWithEntities };

struct ExpectedSetPolicy {
  ExpectedSetKind kind = ExpectedSetKind::Base;
  bool include_user_vertex = true;
  /// Most recent train interactions kept as vertices.
  std::size_t max_vertices = 2000;
};

struct RecommenderConfig {
  double alpha = 0.5;
  std::uint32_t top_n = 10;
  bool normalize_components = true;
  double useful_threshold = 4.0;
  /// 0 keeps the full unseen catalog.
  std::size_t max_candidates = 0;
  std::uint64_t seed = 1;
  UnexpectednessOptions unexpectedness;

  void validate() const;
};

struct ScoredItem {
  NodeId item = 0;
  double rating = 0.0;
  double rating_norm = 0.0;
  double unexp_norm = 0.0;
  double unexpectedness_raw = 0.0;
  double utility = 0.0;
};

struct RecommendationList {
  NodeId user = 0;
  std::vector<ScoredItem> items;
  std::uint32_t n = 0;
};

/// Train interactions per user, ordered by timestamp (then insertion).
class InteractionIndex {
 public:
  InteractionIndex() = default;
  explicit InteractionIndex(std::span<const Interaction> train);

  std::span<const NodeId> items_of(NodeId user) const;
  bool has(NodeId user, NodeId item) const;
  std::size_t popularity(NodeId item) const;

 private:
  std::map<NodeId, std::vector<NodeId>> items_;
  std::map<NodeId, std::vector<NodeId>> sorted_;
  std::map<NodeId, std::size_t> popularity_;
};

struct ExpectedSet {
  std::vector<NodeId> members;
  std::size_t skipped = 0;  // members without an embedding
  HullVertices hull;
};

/// Hull vertices for a user: optional user vertex, train items (capped to the
/// most recent), one-hop entities for BaseWithEntities, then extra items.
ExpectedSet expected_set(NodeId user, const HinGraph& graph, const EmbeddingTable& embeddings,
                         const InteractionIndex& history, const ExpectedSetPolicy& policy,
                         std::span<const NodeId> extra_items = {});

double hybrid_utility(double rating_part, double unexp_part, double alpha);

/// Scores a candidate batch; unexpectedness is min-max normalized over the batch.
/// Candidates without an embedding are dropped.
std::vector<ScoredItem> score_candidates(NodeId user, std::span<const NodeId> candidates, const HullVertices& hull,
                                         const EmbeddingTable& embeddings, const RatingModel& model,
                                         const RecommenderConfig& cfg);

/// Descending utility; ties by higher raw unexpectedness (when alpha > 0), then ascending id.
RecommendationList recommend_top_n(NodeId user, std::vector<ScoredItem> scored, const RecommenderConfig& cfg);

/// Descending predicted rating, ties by ascending id.
std::vector<NodeId> recommend_rating_only(NodeId user, std::span<const NodeId> candidates, const RatingModel& model,
                                          std::uint32_t n);

std::vector<NodeId> recommend_random(std::span<const NodeId> candidates, std::uint32_t n, std::mt19937_64& rng);

struct RecommenderInputs {
  const HinGraph& graph;
  const EmbeddingTable& embeddings;
  const RatingModel& model;
  const InteractionIndex& history;
  ExpectedSetPolicy policy;
};

/// Catalog items not in the user's history nor in exclude, capped by
/// popularity-stratified sampling when cfg.max_candidates is set.
std::vector<NodeId> candidate_items(NodeId user, const RecommenderInputs& in, const RecommenderConfig& cfg,
                                    std::span<const NodeId> exclude = {});

RecommendationList recommend_for_user(NodeId user, const RecommenderInputs& in, const RecommenderConfig& cfg,
                                      std::span<const NodeId> extra_expected = {});

std::map<NodeId, RecommendationList> recommend_all(std::span<const NodeId> users, const RecommenderInputs& in,
                                                   const RecommenderConfig& cfg);

/// "user:" / "item:" / "entity:" prefixed graph keys.
std::string graph_key(NodeType type, std::string_view external);
std::string_view external_key(std::string_view graph_key);

/// Lines "user \t item \t utility \t rating_norm \t unexp_raw", by user key then rank.
void save_recommendations(const std::map<NodeId, RecommendationList>& lists, const HinGraph& graph,
                          const std::filesystem::path& path);
std::map<NodeId, std::vector<NodeId>> load_recommendations(const HinGraph& graph, const std::filesystem::path& path);

}  // namespace hullrec
