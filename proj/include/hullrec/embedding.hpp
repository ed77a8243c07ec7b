#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "hullrec/hin_graph.hpp"
#include "hullrec/walk_engine.hpp"

namespace hullrec {

struct TrainConfig {
  std::uint32_t dim = 128;
  std::uint32_t window = 2;
  std::uint32_t min_count = 1;
  std::uint32_t epochs = 100;
  std::uint32_t negatives = 5;
  double learning_rate = 0.025;
  double min_learning_rate = 1e-4;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Nodes that occur at least min_count times, ascending by id.
struct Vocabulary {
  std::vector<NodeId> ids;
  std::vector<std::uint64_t> counts;

  std::size_t size() const noexcept { return ids.size(); }
  /// Position of id in ids, or -1.
  std::int64_t index_of(NodeId id) const;
};

Vocabulary build_vocabulary(const WalkCorpus& corpus, std::uint32_t min_count);

/// Draws vocabulary positions proportionally to count^power.
class NegativeSampler {
 public:
  explicit NegativeSampler(const Vocabulary& vocab, double power = 0.75);
  std::size_t sample(std::mt19937_64& rng) { return dist_(rng); }
  double probability(std::size_t vocab_index) const { return probs_[vocab_index]; }
  std::size_t size() const noexcept { return probs_.size(); }

 private:
  std::discrete_distribution<std::size_t> dist_;
  std::vector<double> probs_;
};

/*
 * Skip-gram parameters: one input ("published") and one output (context)
 * vector per vocabulary node, stored row-major.
 */
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<NodeId> ids, std::uint32_t dim);

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<NodeId>& ids() const noexcept { return ids_; }

  bool contains(NodeId id) const { return row_of(id) >= 0; }
  /// Row of id, or -1 when id is not in the vocabulary.
  std::int64_t row_of(NodeId id) const;

  std::span<const double> input(NodeId id) const;
  std::span<double> input(NodeId id);
  std::span<const double> output(NodeId id) const;
  std::span<double> output(NodeId id);

  std::span<double> input_row(std::size_t row) { return {input_.data() + row * dim_, dim_}; }
  std::span<double> output_row(std::size_t row) { return {output_.data() + row * dim_, dim_}; }
  std::span<const double> input_row(std::size_t row) const { return {input_.data() + row * dim_, dim_}; }
  std::span<const double> output_row(std::size_t row) const { return {output_.data() + row * dim_, dim_}; }

  bool all_finite() const;

 private:
  std::size_t checked_row(NodeId id) const;

  std::vector<NodeId> ids_;
  std::vector<std::int64_t> row_;  // indexed by NodeId
  std::uint32_t dim_ = 0;
  std::vector<double> input_;
  std::vector<double> output_;
};

/*
 * One SGD step of skip-gram with negative sampling on (center, context).
 * Returns -log s(u_ctx.v) - sum log s(-u_neg.v) evaluated before the
 * update; then moves v_center, u_context and every u_negative by -lr times
 * their gradient (all gradients taken at the pre-update point).
 */
/// Positions paired with center: every other position within window of it.
std::vector<std::size_t> context_positions(std::size_t length, std::size_t center, std::uint32_t window);

double sgns_pair_step(NodeId center, NodeId context, std::span<const NodeId> negatives, double lr,
                      EmbeddingTable& table);

struct TrainStats {
  std::vector<double> epoch_mean_loss;
  std::uint64_t pairs_per_epoch = 0;
};

EmbeddingTable train_embeddings(const WalkCorpus& corpus, const TrainConfig& cfg, TrainStats* stats = nullptr);

/// Writes the input vectors: header "<count> <dim>", then "<id> <f1> ... <fd>".
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);
/// Loaded tables carry input vectors only; output vectors are zero.
EmbeddingTable load_embeddings(const std::filesystem::path& path);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace hullrec
