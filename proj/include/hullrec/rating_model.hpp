#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "hullrec/hin_graph.hpp"

namespace hullrec {

struct Interaction {
  NodeId user = 0;
  NodeId item = 0;
  double rating = 0.0;
  std::int64_t timestamp = 0;
};

struct RatingScale {
  double min = 1.0;
  double max = 5.0;
  double clamp(double r) const { return r < min ? min : (r > max ? max : r); }
  double normalize(double r) const { return (clamp(r) - min) / (max - min); }
};

enum class RatingModelKind { BiasedMF, BiasOnly };

struct MfConfig {
  std::uint32_t k = 32;
  std::uint32_t epochs = 50;
  double learning_rate = 0.005;
  double reg = 0.02;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Predictor of Rating(user, item): mu + b_u + b_i (+ p_u . q_i), clamped to the scale.
struct RatingModel {
  RatingModelKind kind = RatingModelKind::BiasOnly;
  RatingScale scale;
  double global_mean = 0.0;
  std::uint32_t k = 0;
  std::map<NodeId, double> user_bias;
  std::map<NodeId, double> item_bias;
  std::map<NodeId, std::vector<double>> user_factors;
  std::map<NodeId, std::vector<double>> item_factors;

  /// Total: unknown ids drop the terms they would contribute.
  double predict(NodeId user, NodeId item) const;
  double predict_unclamped(NodeId user, NodeId item) const;
  /// p_u . q_i, or 0 when either side is unknown.
  double factor_term(NodeId user, NodeId item) const;
};

/// epoch_rmse, when given, receives the train RMSE before training and after each epoch.
RatingModel fit_biased_mf(std::span<const Interaction> train, const MfConfig& cfg, RatingScale scale = {},
                          std::vector<double>* epoch_rmse = nullptr);

/// Closed-form damped means: item biases first, then user biases on the residuals.
RatingModel fit_bias_only(std::span<const Interaction> train, RatingScale scale = {}, double damping = 10.0);

void save_rating_model(const RatingModel& model, const std::filesystem::path& path);
RatingModel load_rating_model(const std::filesystem::path& path);

struct TrainTestSplit {
  std::vector<Interaction> train;
  std::vector<Interaction> test;
  std::uint32_t fold_id = 0;
};

/*
 * k-fold split stratified per user. Every record lands in exactly one test
 * fold. Items whose records would all fall into one fold get one record
 * moved to the next fold, so that tested items also occur in training.
 */
std::vector<TrainTestSplit> k_fold_split(std::span<const Interaction> records, std::uint32_t folds,
                                         std::uint64_t seed);

}  // namespace hullrec
