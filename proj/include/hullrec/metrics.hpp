#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hullrec/hull.hpp"
#include "hullrec/rating_model.hpp"
#include "hullrec/recommender.hpp"

namespace hullrec {

using UserItemSets = std::map<NodeId, std::vector<NodeId>>;

struct MetricsReport {
  double rmse = 0.0;
  double mae = 0.0;
  double precision_at_n = 0.0;
  double recall_at_n = 0.0;
  double unexpectedness = 0.0;
  double serendipity = 0.0;
  double diversity = 0.0;
  double coverage = 0.0;
  std::uint32_t n = 0;
};

/// predictions[i] estimates test[i].rating.
std::pair<double, double> rmse_mae(std::span<const double> predictions, std::span<const Interaction> test);
std::pair<double, double> rmse_mae(const RatingModel& model, std::span<const Interaction> test);

/// Macro-averaged over users with a nonempty list; recall skips users
/// without relevant test items. Relevant: test rating >= threshold.
std::pair<double, double> precision_recall_at_n(const UserItemSets& rs, std::span<const Interaction> test,
                                                std::uint32_t n, double relevance_threshold = 4.0);

enum class SerendipityDenominator { Recommended, Primitive };

/// serendipity_u = |RS \ PM| / |RS|, diversity_u = |(RS \ PM) & USEFUL| / |RS|,
/// macro-averaged over users with nonempty RS. The Primitive variant divides by |PM|.
std::pair<double, double> serendipity_diversity(const UserItemSets& rs, const UserItemSets& pm,
                                                const UserItemSets& useful,
                                                SerendipityDenominator denom = SerendipityDenominator::Recommended);

double catalog_coverage(const UserItemSets& rs, std::size_t catalog_size);

/// Items of the catalog whose utility for the user reaches threshold.
struct MaxHull {
  std::vector<NodeId> items;
  HullVertices hull;
};

/// Scores every catalog item (history included) against the user's expected
/// set. Throws DataError when nothing qualifies.
MaxHull max_hull(NodeId user, std::span<const NodeId> catalog, const RecommenderInputs& in,
                 const RecommenderConfig& cfg, double utility_threshold);

/// Fraction of probe points that lie in the expected hull.
double hull_coverage(const HullVertices& expected, const HullVertices& probes, double eps = kBoundaryEps);

enum class IterativePolicy { LatentConvexHull, RatingOnly, Random };

struct MaxHullExperiment {
  IterativePolicy policy = IterativePolicy::LatentConvexHull;
  std::vector<std::uint32_t> iterations{1, 5, 10, 20, 50};
  double baseline = 0.0;  // before any recommendation
  double baseline_std = 0.0;
  std::vector<double> coverage_curve;
  std::vector<double> coverage_std;
  double utility_threshold = 0.5;
  std::size_t users = 0;
};

struct IterativeConfig {
  std::vector<std::uint32_t> iterations{1, 5, 10, 20, 50};
  double utility_threshold = 0.5;
  /// Weight used to define each user's maximum hull, shared by all policies.
  double max_hull_alpha = 0.5;
};

/*
 * Repeated recommendation where every recommended item joins the user's
 * expected set for the next round. Coverage of the maximum hull is recorded
 * at each checkpoint. Users whose maximum hull is empty are left out.
 */
MaxHullExperiment iterative_experiment(std::span<const NodeId> users, IterativePolicy policy,
                                       const RecommenderInputs& in, const RecommenderConfig& cfg,
                                       const IterativeConfig& icfg);

std::string policy_name(IterativePolicy p);

/// Mean over users of the mean signed unexpectedness of their list items.
double mean_unexpectedness(const UserItemSets& lists, const RecommenderInputs& in, const RecommenderConfig& cfg);

/// USEFUL_u: unseen items whose true test rating (if any) or predicted rating reaches threshold.
UserItemSets useful_sets(std::span<const NodeId> users, const RecommenderInputs& in,
                         std::span<const Interaction> test, double threshold);

std::string to_key_value(const MetricsReport& r);
std::string csv_header();
std::string to_csv_row(const std::string& algorithm, std::uint32_t fold, const MetricsReport& r);

}  // namespace hullrec
