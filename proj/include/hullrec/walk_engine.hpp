#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <utility>
#include <vector>

#include "hullrec/hin_graph.hpp"

namespace hullrec {

/// Symmetric type-pair transition coefficients C(T, T').
class TransitionMatrix {
 public:
  /// All six free coefficients equal to 1/6.
  static TransitionMatrix uniform();
  /// Validates non-negativity and that the six values sum to 1 (within 1e-9).
  static TransitionMatrix from_coefficients(double uu, double ue, double ui, double ei, double ee, double ii);

  double operator()(NodeType a, NodeType b) const {
    return c_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  }

 private:
  std::array<std::array<double, kNodeTypeCount>, kNodeTypeCount> c_{};
};

struct WalkConfig {
  std::uint32_t walks_per_node = 10;
  std::uint32_t walk_length = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

struct WalkCorpus {
  std::vector<std::vector<NodeId>> walks;
  std::uint64_t graph_fingerprint = 0;
  WalkConfig config;

  std::size_t token_count() const;
};

/// Normalized next-step distribution from v, neighbors in ascending id order.
std::vector<std::pair<NodeId, double>> transition_distribution(const HinGraph& g, NodeId v,
                                                               const TransitionMatrix& tm);

/// Generator for walk number walk_index started at node start.
std::mt19937_64 walk_stream(std::uint64_t seed, NodeId start, std::uint32_t walk_index);

std::vector<NodeId> generate_walk(const HinGraph& g, NodeId start, const WalkConfig& cfg,
                                  const TransitionMatrix& tm, std::mt19937_64& rng);

/// walks_per_node rounds, each round visits nodes in ascending id order.
/// threads > 1 splits the work; the result does not depend on it.
WalkCorpus generate_corpus(const HinGraph& g, const WalkConfig& cfg, const TransitionMatrix& tm,
                           unsigned threads = 1);

void save_corpus(const WalkCorpus& corpus, const std::filesystem::path& path);
WalkCorpus load_corpus(const std::filesystem::path& path);

}  // namespace hullrec
