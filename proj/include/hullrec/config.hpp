#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "hullrec/embedding.hpp"
#include "hullrec/ingest.hpp"
#include "hullrec/metrics.hpp"
#include "hullrec/rating_model.hpp"
#include "hullrec/recommender.hpp"
#include "hullrec/walk_engine.hpp"

namespace hullrec {

enum class DataFormat { Synth, Yelp, TripAdvisor };

struct DataConfig {
  DataFormat format = DataFormat::Synth;
  std::filesystem::path reviews;
  std::filesystem::path business;
  std::filesystem::path users;
  std::filesystem::path vocabulary;
  std::uint32_t min_count = 5;
  bool fixed_point = true;
  RatingScale scale;
};

struct SplitConfig {
  std::uint32_t folds = 5;
  std::uint32_t fold = 0;
};

struct RatingConfig {
  RatingModelKind kind = RatingModelKind::BiasedMF;
  MfConfig mf;
  /// Damping of the bias-only model, also used as the primitive model.
  double damping = 10.0;
};

struct EvalConfig {
  SerendipityDenominator denominator = SerendipityDenominator::Recommended;
  double relevance_threshold = 4.0;
  IterativeConfig iterative;
  /// 0 evaluates every user.
  std::size_t max_users = 0;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "hullrec_out";
  DataConfig data;
  SynthConfig synth;
  SplitConfig split;
  WalkConfig walk;
  /// uu, ue, ui, ei, ee, ii
  std::array<double, 6> coefficients{1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};
  unsigned walk_threads = 1;
  TrainConfig train;
  RatingConfig rating;
  RecommenderConfig recommender;
  ExpectedSetPolicy expected;
  EvalConfig eval;

  /// Propagates one seed into every stage.
  void set_seed(std::uint64_t s);
  TransitionMatrix transitions() const;
  void validate() const;
};

/// Flat "key = value" lines grouped by [section]; '#' starts a comment.
/// Relative paths in [data] resolve against base_dir.
PipelineConfig parse_config(std::string_view text, const std::string& source = "<config>",
                            const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// Every key with its current value, in a form parse_config accepts.
std::string render_config(const PipelineConfig& cfg);

}  // namespace hullrec
