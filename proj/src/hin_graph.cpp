#include "hullrec/hin_graph.hpp"

#include <algorithm>
#include <string>

#include "hullrec/error.hpp"
#include "hullrec/text_io.hpp"

namespace hullrec {

namespace {

std::uint64_t edge_code(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

std::string_view to_string(NodeType t) {
  switch (t) {
    case NodeType::User: return "user";
    case NodeType::Item: return "item";
    case NodeType::Entity: return "entity";
  }
  return "?";
}

NodeType parse_node_type(std::string_view s) {
  if (s == "user") return NodeType::User;
  if (s == "item") return NodeType::Item;
  if (s == "entity") return NodeType::Entity;
  throw DataError("unknown node type '" + std::string(s) + "'");
}

NodeId HinGraph::add_node(std::string_view key, NodeType type) {
  if (frozen_) throw DataError("add_node on a frozen graph");
  if (key.empty()) throw DataError("node key must be nonempty");
  std::string k(key);
  if (auto it = index_.find(k); it != index_.end()) {
    if (types_[it->second] != type)
      throw DataError("node '" + k + "' already exists with type " + std::string(to_string(types_[it->second])));
    return it->second;
  }
  auto id = static_cast<NodeId>(types_.size());
  types_.push_back(type);
  keys_.push_back(k);
  index_.emplace(std::move(k), id);
  adjacency_.emplace_back();
  return id;
}

void HinGraph::add_edge(NodeId a, NodeId b) {
  if (frozen_) throw DataError("add_edge on a frozen graph");
  check_id(a);
  check_id(b);
  if (a == b) throw DataError("self-loop on node " + std::to_string(a));
  if (!edge_set_.insert(edge_code(a, b)).second) return;
  adjacency_[a][static_cast<std::size_t>(types_[b])].push_back(b);
  adjacency_[b][static_cast<std::size_t>(types_[a])].push_back(a);
  ++edge_count_;
}

void HinGraph::freeze() {
  for (auto& parts : adjacency_)
    for (auto& list : parts) std::sort(list.begin(), list.end());
  frozen_ = true;
}

NodeType HinGraph::type(NodeId v) const {
  check_id(v);
  return types_[v];
}

const std::string& HinGraph::key(NodeId v) const {
  check_id(v);
  return keys_[v];
}

std::optional<NodeId> HinGraph::find(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool HinGraph::has_edge(NodeId a, NodeId b) const {
  return edge_set_.count(edge_code(a, b)) > 0;
}

std::span<const NodeId> HinGraph::neighbors_by_type(NodeId v, NodeType t) const {
  check_frozen();
  check_id(v);
  return adjacency_[v][static_cast<std::size_t>(t)];
}

std::size_t HinGraph::degree(NodeId v) const {
  check_id(v);
  std::size_t d = 0;
  for (const auto& list : adjacency_[v]) d += list.size();
  return d;
}

std::vector<NodeId> HinGraph::nodes_of_type(NodeType t) const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < types_.size(); ++v)
    if (types_[v] == t) out.push_back(v);
  return out;
}

std::uint64_t HinGraph::fingerprint() const {
  check_frozen();
  text::Fnv1a h;
  h.update(static_cast<std::uint64_t>(types_.size()));
  for (NodeId v = 0; v < types_.size(); ++v) {
    h.update(static_cast<std::uint64_t>(types_[v]));
    h.update(keys_[v]);
    h.update(std::string_view("\n"));
  }
  for (NodeId v = 0; v < types_.size(); ++v)
    for (const auto& list : adjacency_[v])
      for (NodeId w : list)
        if (v < w) h.update((static_cast<std::uint64_t>(v) << 32) | w);
  return h.digest();
}

void HinGraph::save(const std::filesystem::path& dir) const {
  check_frozen();
  auto nodes = text::open_output(dir / "nodes.tsv");
  for (NodeId v = 0; v < types_.size(); ++v)
    nodes << v << '\t' << to_string(types_[v]) << '\t' << keys_[v] << '\n';

  std::vector<std::uint64_t> edges(edge_set_.begin(), edge_set_.end());
  std::sort(edges.begin(), edges.end());
  auto out = text::open_output(dir / "edges.tsv");
  for (std::uint64_t code : edges) out << (code >> 32) << '\t' << (code & 0xffffffffULL) << '\n';
  if (!nodes || !out) throw DataError("failed writing graph to " + dir.string());
}

HinGraph HinGraph::load(const std::filesystem::path& dir) {
  HinGraph g;
  auto where = [](const std::filesystem::path& p, std::size_t line) {
    return p.string() + ":" + std::to_string(line) + ": ";
  };
  {
    auto path = dir / "nodes.tsv";
    auto in = text::open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto cols = text::split(line, '\t');
      std::uint64_t id = 0;
      if (cols.size() != 3 || !text::parse_u64(cols[0], id))
        throw DataError(where(path, lineno) + "expected 'id<TAB>type<TAB>key'");
      if (id != g.node_count()) throw DataError(where(path, lineno) + "node ids must be dense and sorted");
      NodeType type;
      try {
        type = parse_node_type(cols[1]);
      } catch (const Error& e) {
        throw DataError(where(path, lineno) + e.what());
      }
      NodeId got = g.add_node(cols[2], type);
      if (got != id) throw DataError(where(path, lineno) + "duplicate node key");
    }
  }
  {
    auto path = dir / "edges.tsv";
    auto in = text::open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto cols = text::split(line, '\t');
      std::uint64_t a = 0, b = 0;
      if (cols.size() != 2 || !text::parse_u64(cols[0], a) || !text::parse_u64(cols[1], b) ||
          a >= g.node_count() || b >= g.node_count())
        throw DataError(where(path, lineno) + "expected 'id<TAB>id' with known ids");
      g.add_edge(static_cast<NodeId>(a), static_cast<NodeId>(b));
    }
  }
  g.freeze();
  return g;
}

void HinGraph::check_id(NodeId v) const {
  if (v >= types_.size()) throw DataError("unknown node id " + std::to_string(v));
}

void HinGraph::check_frozen() const {
  if (!frozen_) throw DataError("graph must be frozen before neighborhood queries");
}

}  // namespace hullrec
