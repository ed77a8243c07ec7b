#include "hullrec/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "hullrec/error.hpp"
#include "hullrec/rng.hpp"
#include "hullrec/text_io.hpp"

namespace hullrec {

void RecommenderConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("recommender.alpha must be in [0, 1]");
  if (top_n < 1) throw ConfigError("recommender.top_n must be >= 1");
}

InteractionIndex::InteractionIndex(std::span<const Interaction> train) {
  std::map<NodeId, std::vector<std::pair<std::int64_t, NodeId>>> timed;
  for (const auto& r : train) {
    timed[r.user].emplace_back(r.timestamp, r.item);
    ++popularity_[r.item];
  }
  for (auto& [user, list] : timed) {
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& items = items_[user];
    std::set<NodeId> seen;
    for (const auto& [ts, item] : list)
      if (seen.insert(item).second) items.push_back(item);
    auto& s = sorted_[user];
    s.assign(seen.begin(), seen.end());
  }
}

std::span<const NodeId> InteractionIndex::items_of(NodeId user) const {
  auto it = items_.find(user);
  if (it == items_.end()) return {};
  return it->second;
}

bool InteractionIndex::has(NodeId user, NodeId item) const {
  auto it = sorted_.find(user);
  return it != sorted_.end() && std::binary_search(it->second.begin(), it->second.end(), item);
}

std::size_t InteractionIndex::popularity(NodeId item) const {
  auto it = popularity_.find(item);
  return it == popularity_.end() ? 0 : it->second;
}

ExpectedSet expected_set(NodeId user, const HinGraph& graph, const EmbeddingTable& embeddings,
                         const InteractionIndex& history, const ExpectedSetPolicy& policy,
                         std::span<const NodeId> extra_items) {
  if (user >= graph.node_count() || graph.type(user) != NodeType::User)
    throw DataError("unknown user node " + std::to_string(user));

  std::vector<NodeId> members;
  std::set<NodeId> seen;
  std::size_t skipped = 0;
  auto add = [&](NodeId v) {
    if (!seen.insert(v).second) return;
    if (embeddings.contains(v))
      members.push_back(v);
    else
      ++skipped;
  };

  if (policy.include_user_vertex) add(user);
  auto items = history.items_of(user);
  const std::size_t cap = policy.max_vertices;
  const std::size_t first = (cap > 0 && items.size() > cap) ? items.size() - cap : 0;
  for (std::size_t i = first; i < items.size(); ++i) add(items[i]);
  if (policy.kind == ExpectedSetKind::BaseWithEntities)
    for (NodeId e : graph.neighbors_by_type(user, NodeType::Entity)) add(e);
  for (NodeId v : extra_items) add(v);

  if (members.empty()) throw DataError("expected set of user " + graph.key(user) + " has no embedded vertices");
  std::vector<double> flat;
  flat.reserve(members.size() * embeddings.dim());
  for (NodeId v : members) {
    auto e = embeddings.input(v);
    flat.insert(flat.end(), e.begin(), e.end());
  }
  return ExpectedSet{std::move(members), skipped, HullVertices(std::move(flat), embeddings.dim())};
}

double hybrid_utility(double rating_part, double unexp_part, double alpha) {
  return (1.0 - alpha) * rating_part + alpha * unexp_part;
}

std::vector<ScoredItem> score_candidates(NodeId user, std::span<const NodeId> candidates, const HullVertices& hull,
                                         const EmbeddingTable& embeddings, const RatingModel& model,
                                         const RecommenderConfig& cfg) {
  std::vector<ScoredItem> out;
  out.reserve(candidates.size());
  for (NodeId item : candidates) {
    if (!embeddings.contains(item)) continue;
    ScoredItem s;
    s.item = item;
    s.rating = model.predict(user, item);
    s.rating_norm = model.scale.normalize(s.rating);
    s.unexpectedness_raw = signed_unexpectedness(hull, embeddings.input(item), cfg.unexpectedness).value;
    out.push_back(s);
  }
  if (out.empty()) return out;

  double lo = out.front().unexpectedness_raw, hi = lo;
  for (const auto& s : out) {
    lo = std::min(lo, s.unexpectedness_raw);
    hi = std::max(hi, s.unexpectedness_raw);
  }
  for (auto& s : out) {
    s.unexp_norm = hi > lo ? (s.unexpectedness_raw - lo) / (hi - lo) : 0.0;
    s.utility = cfg.normalize_components ? hybrid_utility(s.rating_norm, s.unexp_norm, cfg.alpha)
                                         : hybrid_utility(s.rating, s.unexpectedness_raw, cfg.alpha);
  }
  return out;
}

RecommendationList recommend_top_n(NodeId user, std::vector<ScoredItem> scored, const RecommenderConfig& cfg) {
  const bool unexp_ties = cfg.alpha > 0.0;
  auto better = [unexp_ties](const ScoredItem& a, const ScoredItem& b) {
    if (a.utility != b.utility) return a.utility > b.utility;
    if (unexp_ties && a.unexpectedness_raw != b.unexpectedness_raw) return a.unexpectedness_raw > b.unexpectedness_raw;
    return a.item < b.item;
  };
  const std::size_t n = std::min<std::size_t>(cfg.top_n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), better);
  scored.resize(n);
  return RecommendationList{user, std::move(scored), cfg.top_n};
}

std::vector<NodeId> recommend_rating_only(NodeId user, std::span<const NodeId> candidates, const RatingModel& model,
                                          std::uint32_t n) {
  std::vector<std::pair<double, NodeId>> scored;
  scored.reserve(candidates.size());
  for (NodeId item : candidates) scored.emplace_back(model.predict(user, item), item);
  const std::size_t k = std::min<std::size_t>(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(scored[i].second);
  return out;
}

std::vector<NodeId> recommend_random(std::span<const NodeId> candidates, std::uint32_t n, std::mt19937_64& rng) {
  std::vector<NodeId> pool(candidates.begin(), candidates.end());
  const std::size_t k = std::min<std::size_t>(n, pool.size());
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
  pool.resize(k);
  return pool;
}

std::vector<NodeId> candidate_items(NodeId user, const RecommenderInputs& in, const RecommenderConfig& cfg,
                                    std::span<const NodeId> exclude) {
  std::set<NodeId> excluded(exclude.begin(), exclude.end());
  std::vector<NodeId> out;
  for (NodeId item : in.graph.nodes_of_type(NodeType::Item))
    if (!in.history.has(user, item) && !excluded.count(item)) out.push_back(item);
  if (cfg.max_candidates == 0 || out.size() <= cfg.max_candidates) return out;

  // Popularity-stratified sample: ten equal strata by train popularity,
  // each contributing in proportion to its size.
  std::stable_sort(out.begin(), out.end(),
                   [&](NodeId a, NodeId b) { return in.history.popularity(a) > in.history.popularity(b); });
  auto rng = derive_stream(cfg.seed, {0x63616e64ULL, user});
  constexpr std::size_t strata = 10;
  std::vector<NodeId> picked;
  std::size_t taken = 0;
  for (std::size_t s = 0; s < strata; ++s) {
    const std::size_t b = out.size() * s / strata, e = out.size() * (s + 1) / strata;
    const std::size_t quota = cfg.max_candidates * (s + 1) / strata - taken;
    auto sample = recommend_random(std::span<const NodeId>(out).subspan(b, e - b), static_cast<std::uint32_t>(quota), rng);
    taken += sample.size();
    picked.insert(picked.end(), sample.begin(), sample.end());
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

RecommendationList recommend_for_user(NodeId user, const RecommenderInputs& in, const RecommenderConfig& cfg,
                                      std::span<const NodeId> extra_expected) {
  auto candidates = candidate_items(user, in, cfg, extra_expected);
  auto es = expected_set(user, in.graph, in.embeddings, in.history, in.policy, extra_expected);
  return recommend_top_n(user, score_candidates(user, candidates, es.hull, in.embeddings, in.model, cfg), cfg);
}

std::map<NodeId, RecommendationList> recommend_all(std::span<const NodeId> users, const RecommenderInputs& in,
                                                   const RecommenderConfig& cfg) {
  cfg.validate();
  std::map<NodeId, RecommendationList> out;
  for (NodeId u : users) out.emplace(u, recommend_for_user(u, in, cfg));
  return out;
}

std::string graph_key(NodeType type, std::string_view external) {
  std::string k(to_string(type));
  k += ':';
  k += external;
  return k;
}

std::string_view external_key(std::string_view key) {
  for (NodeType t : kAllNodeTypes) {
    auto prefix = to_string(t);
    if (key.size() > prefix.size() && key.substr(0, prefix.size()) == prefix && key[prefix.size()] == ':')
      return key.substr(prefix.size() + 1);
  }
  return key;
}

void save_recommendations(const std::map<NodeId, RecommendationList>& lists, const HinGraph& graph,
                          const std::filesystem::path& path) {
  std::vector<const RecommendationList*> order;
  for (const auto& [u, list] : lists) order.push_back(&list);
  std::sort(order.begin(), order.end(),
            [&](const auto* a, const auto* b) { return graph.key(a->user) < graph.key(b->user); });
  auto out = text::open_output(path);
  for (const auto* list : order)
    for (const auto& s : list->items)
      out << external_key(graph.key(list->user)) << '\t' << external_key(graph.key(s.item)) << '\t'
          << text::format_double(s.utility) << '\t' << text::format_double(s.rating_norm) << '\t'
          << text::format_double(s.unexpectedness_raw) << '\n';
  if (!out) throw DataError("failed writing recommendations " + path.string());
}

std::map<NodeId, std::vector<NodeId>> load_recommendations(const HinGraph& graph, const std::filesystem::path& path) {
  auto in = text::open_input(path);
  std::map<NodeId, std::vector<NodeId>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = text::split(line, '\t');
    auto fail = [&](const std::string& msg) {
      return DataError(path.string() + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (cols.size() != 5) throw fail("expected 5 tab-separated columns");
    auto u = graph.find(graph_key(NodeType::User, cols[0]));
    auto i = graph.find(graph_key(NodeType::Item, cols[1]));
    if (!u || !i) throw fail("unknown user or item key");
    out[*u].push_back(*i);
  }
  return out;
}

}  // namespace hullrec
