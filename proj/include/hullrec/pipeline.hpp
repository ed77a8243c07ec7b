#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hullrec/config.hpp"
#include "hullrec/metrics.hpp"

namespace hullrec {

/// Artifact locations below the output directory.
struct StagePaths {
  explicit StagePaths(std::filesystem::path root);

  std::filesystem::path root;
  std::filesystem::path interactions() const { return root / "data" / "interactions.tsv"; }
  std::filesystem::path entities() const { return root / "data" / "entities.tsv"; }
  std::filesystem::path labels() const { return root / "data" / "labels.tsv"; }
  std::filesystem::path ingest_stats() const { return root / "data" / "ingest_stats.txt"; }
  std::filesystem::path graph_dir() const { return root / "graph"; }
  std::filesystem::path train() const { return root / "graph" / "train.tsv"; }
  std::filesystem::path test() const { return root / "graph" / "test.tsv"; }
  std::filesystem::path corpus() const { return root / "walks" / "corpus.txt"; }
  std::filesystem::path embeddings() const { return root / "model" / "embeddings.txt"; }
  std::filesystem::path train_log() const { return root / "model" / "train_log.txt"; }
  std::filesystem::path rating_model() const { return root / "model" / "rating_model.txt"; }
  std::filesystem::path primitive_model() const { return root / "model" / "primitive_model.txt"; }
  std::filesystem::path topn() const { return root / "recommend" / "topn.tsv"; }
  std::filesystem::path ranking() const { return root / "recommend" / "ranking.tsv"; }
  std::filesystem::path ranking_rating_only() const { return root / "recommend" / "ranking_rating_only.tsv"; }
  std::filesystem::path metrics_txt() const { return root / "eval" / "metrics.txt"; }
  std::filesystem::path metrics_csv() const { return root / "eval" / "metrics.csv"; }
  std::filesystem::path per_user_csv() const { return root / "eval" / "per_user.csv"; }
  std::filesystem::path coverage_csv() const { return root / "iterate" / "coverage.csv"; }
};

struct StageLog {
  std::function<void(const std::string&)> info = [](const std::string&) {};
  std::function<void(const std::string&)> warn = [](const std::string&) {};
};

void run_synth(const PipelineConfig& cfg, const StageLog& log = {});
void run_ingest(const PipelineConfig& cfg, const StageLog& log = {});
/// Splits the interactions for split.fold and builds the graph from the train part.
void run_build_graph(const PipelineConfig& cfg, const StageLog& log = {});
void run_walk(const PipelineConfig& cfg, const StageLog& log = {});
/// Embeddings, the configured rating model and the bias-only primitive model.
void run_train(const PipelineConfig& cfg, const StageLog& log = {});
void run_recommend(const PipelineConfig& cfg, bool rating_only, const StageLog& log = {});

using MetricsTable = std::vector<std::pair<std::string, MetricsReport>>;
MetricsTable run_evaluate(const PipelineConfig& cfg, const StageLog& log = {});
std::vector<MaxHullExperiment> run_iterate(const PipelineConfig& cfg, const StageLog& log = {});

std::string format_metrics_table(const MetricsTable& table);

}  // namespace hullrec
