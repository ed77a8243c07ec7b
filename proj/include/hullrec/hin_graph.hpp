#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hullrec {

using NodeId = std::uint32_t;

enum class NodeType : std::uint8_t { User = 0, Item = 1, Entity = 2 };
inline constexpr std::size_t kNodeTypeCount = 3;
inline constexpr std::array<NodeType, kNodeTypeCount> kAllNodeTypes{NodeType::User, NodeType::Item,
                                                                     NodeType::Entity};

std::string_view to_string(NodeType t);
/// Accepts "user", "item", "entity". Throws DataError otherwise.
NodeType parse_node_type(std::string_view s);

/*
 * Heterogeneous information network of users, items and entities.
 *
 * Nodes are interned by external key and receive dense ids in insertion
 * order. Edges are undirected, unweighted and deduplicated. Neighborhood
 * queries are only served after freeze(), which sorts every type partition
 * so that N_t(v) is returned in ascending id order.
 */
class HinGraph {
 public:
  NodeId add_node(std::string_view key, NodeType type);
  void add_edge(NodeId a, NodeId b);
  void freeze();

  bool frozen() const noexcept { return frozen_; }
  std::size_t node_count() const noexcept { return types_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  NodeType type(NodeId v) const;
  const std::string& key(NodeId v) const;
  std::optional<NodeId> find(std::string_view key) const;
  bool has_edge(NodeId a, NodeId b) const;

  std::span<const NodeId> neighbors_by_type(NodeId v, NodeType t) const;
  std::size_t degree(NodeId v) const;
  std::vector<NodeId> nodes_of_type(NodeType t) const;

  /// Stable content hash over nodes and edges.
  std::uint64_t fingerprint() const;

  /// Writes nodes.tsv and edges.tsv into dir.
  void save(const std::filesystem::path& dir) const;
  static HinGraph load(const std::filesystem::path& dir);

 private:
  void check_id(NodeId v) const;
  void check_frozen() const;

  std::vector<NodeType> types_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::array<std::vector<NodeId>, kNodeTypeCount>> adjacency_;
  std::unordered_set<std::uint64_t> edge_set_;
  std::size_t edge_count_ = 0;
  bool frozen_ = false;
};

}  // namespace hullrec
