#include "hullrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "hullrec/error.hpp"
#include "hullrec/rng.hpp"
#include "hullrec/text_io.hpp"

namespace hullrec {

std::pair<double, double> rmse_mae(std::span<const double> predictions, std::span<const Interaction> test) {
  if (test.empty()) throw DataError("cannot compute RMSE/MAE on an empty test set");
  if (predictions.size() != test.size()) throw DataError("prediction count does not match test size");
  double se = 0.0, ae = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double e = predictions[i] - test[i].rating;
    se += e * e;
    ae += std::abs(e);
  }
  const double n = static_cast<double>(test.size());
  return {std::sqrt(se / n), ae / n};
}

std::pair<double, double> rmse_mae(const RatingModel& model, std::span<const Interaction> test) {
  std::vector<double> pred;
  pred.reserve(test.size());
  for (const auto& r : test) pred.push_back(model.predict(r.user, r.item));
  return rmse_mae(pred, test);
}

std::pair<double, double> precision_recall_at_n(const UserItemSets& rs, std::span<const Interaction> test,
                                                std::uint32_t n, double relevance_threshold) {
  if (n < 1) throw ConfigError("N must be >= 1");
  std::map<NodeId, std::set<NodeId>> relevant;
  for (const auto& r : test)
    if (r.rating >= relevance_threshold) relevant[r.user].insert(r.item);

  double psum = 0.0, rsum = 0.0;
  std::size_t pusers = 0, rusers = 0;
  for (const auto& [user, list] : rs) {
    if (list.empty()) continue;
    const std::size_t k = std::min<std::size_t>(n, list.size());
    auto rel = relevant.find(user);
    std::size_t hits = 0;
    if (rel != relevant.end())
      for (std::size_t i = 0; i < k; ++i) hits += rel->second.count(list[i]);
    psum += static_cast<double>(hits) / static_cast<double>(k);
    ++pusers;
    if (rel != relevant.end() && !rel->second.empty()) {
      rsum += static_cast<double>(hits) / static_cast<double>(rel->second.size());
      ++rusers;
    }
  }
  return {pusers ? psum / static_cast<double>(pusers) : 0.0, rusers ? rsum / static_cast<double>(rusers) : 0.0};
}

std::pair<double, double> serendipity_diversity(const UserItemSets& rs, const UserItemSets& pm,
                                                const UserItemSets& useful, SerendipityDenominator denom) {
  double ssum = 0.0, dsum = 0.0;
  std::size_t users = 0;
  for (const auto& [user, list] : rs) {
    if (list.empty()) continue;
    std::set<NodeId> prim, use;
    if (auto it = pm.find(user); it != pm.end()) prim.insert(it->second.begin(), it->second.end());
    if (auto it = useful.find(user); it != useful.end()) use.insert(it->second.begin(), it->second.end());
    const std::set<NodeId> recs(list.begin(), list.end());

    double den = static_cast<double>(recs.size());
    if (denom == SerendipityDenominator::Primitive) {
      if (prim.empty()) continue;
      den = static_cast<double>(prim.size());
    }
    std::size_t unexpected = 0, unexpected_useful = 0;
    for (NodeId i : recs) {
      if (prim.count(i)) continue;
      ++unexpected;
      if (use.count(i)) ++unexpected_useful;
    }
    ssum += static_cast<double>(unexpected) / den;
    dsum += static_cast<double>(unexpected_useful) / den;
    ++users;
  }
  if (!users) return {0.0, 0.0};
  return {ssum / static_cast<double>(users), dsum / static_cast<double>(users)};
}

double catalog_coverage(const UserItemSets& rs, std::size_t catalog_size) {
  if (catalog_size == 0) throw DataError("catalog is empty");
  std::set<NodeId> distinct;
  for (const auto& [user, list] : rs) distinct.insert(list.begin(), list.end());
  return static_cast<double>(distinct.size()) / static_cast<double>(catalog_size);
}

MaxHull max_hull(NodeId user, std::span<const NodeId> catalog, const RecommenderInputs& in,
                 const RecommenderConfig& cfg, double utility_threshold) {
  auto es = expected_set(user, in.graph, in.embeddings, in.history, in.policy);
  auto scored = score_candidates(user, catalog, es.hull, in.embeddings, in.model, cfg);
  std::vector<NodeId> items;
  std::vector<double> flat;
  for (const auto& s : scored) {
    if (s.utility < utility_threshold) continue;
    items.push_back(s.item);
    auto e = in.embeddings.input(s.item);
    flat.insert(flat.end(), e.begin(), e.end());
  }
  if (items.empty()) throw DataError("no item reaches the utility threshold for user " + in.graph.key(user));
  return MaxHull{std::move(items), HullVertices(std::move(flat), in.embeddings.dim())};
}

double hull_coverage(const HullVertices& expected, const HullVertices& probes, double eps) {
  if (expected.dim() != probes.dim()) throw DataError("hull dimensions differ");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) inside += contains(expected, probes.vertex(i), eps);
  return static_cast<double>(inside) / static_cast<double>(probes.size());
}

std::string policy_name(IterativePolicy p) {
  switch (p) {
    case IterativePolicy::LatentConvexHull: return "LCH";
    case IterativePolicy::RatingOnly: return "RO";
    case IterativePolicy::Random: return "Random";
  }
  return "?";
}

MaxHullExperiment iterative_experiment(std::span<const NodeId> users, IterativePolicy policy,
                                       const RecommenderInputs& in, const RecommenderConfig& cfg,
                                       const IterativeConfig& icfg) {
  cfg.validate();
  MaxHullExperiment result;
  result.policy = policy;
  result.iterations = icfg.iterations;
  std::sort(result.iterations.begin(), result.iterations.end());
  result.utility_threshold = icfg.utility_threshold;

  const auto catalog = in.graph.nodes_of_type(NodeType::Item);
  RecommenderConfig max_cfg = cfg;
  max_cfg.alpha = icfg.max_hull_alpha;

  std::vector<NodeId> active;
  std::map<NodeId, MaxHull> maxima;
  for (NodeId u : users) {
    try {
      maxima.emplace(u, max_hull(u, catalog, in, max_cfg, icfg.utility_threshold));
      active.push_back(u);
    } catch (const DataError&) {
      // nothing qualifies for this user
    }
  }
  result.users = active.size();

  std::map<NodeId, std::vector<NodeId>> extra;
  auto measure = [&](double& mean, double* stdev) {
    std::vector<double> values;
    for (NodeId u : active) {
      auto es = expected_set(u, in.graph, in.embeddings, in.history, in.policy, extra[u]);
      values.push_back(hull_coverage(es.hull, maxima.at(u).hull));
    }
    mean = 0.0;
    for (double v : values) mean += v;
    mean = values.empty() ? 0.0 : mean / static_cast<double>(values.size());
    if (stdev) {
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      *stdev = values.empty() ? 0.0 : std::sqrt(var / static_cast<double>(values.size()));
    }
  };
  measure(result.baseline, &result.baseline_std);

  const std::uint32_t last = result.iterations.empty() ? 0 : result.iterations.back();
  std::size_t next = 0;
  for (; next < result.iterations.size() && result.iterations[next] == 0; ++next) {
    result.coverage_curve.push_back(result.baseline);
    result.coverage_std.push_back(result.baseline_std);
  }
  for (std::uint32_t it = 1; it <= last; ++it) {
    for (NodeId u : active) {
      auto& seen = extra[u];
      auto candidates = candidate_items(u, in, cfg, seen);
      std::vector<NodeId> picks;
      switch (policy) {
        case IterativePolicy::LatentConvexHull: {
          auto es = expected_set(u, in.graph, in.embeddings, in.history, in.policy, seen);
          auto list = recommend_top_n(u, score_candidates(u, candidates, es.hull, in.embeddings, in.model, cfg), cfg);
          for (const auto& s : list.items) picks.push_back(s.item);
          break;
        }
        case IterativePolicy::RatingOnly:
          picks = recommend_rating_only(u, candidates, in.model, cfg.top_n);
          break;
        case IterativePolicy::Random: {
          auto rng = derive_stream(cfg.seed, {0x72616e64ULL, u, it});
          picks = recommend_random(candidates, cfg.top_n, rng);
          break;
        }
      }
      seen.insert(seen.end(), picks.begin(), picks.end());
    }
    while (next < result.iterations.size() && result.iterations[next] == it) {
      double mean = 0.0, sd = 0.0;
      measure(mean, &sd);
      result.coverage_curve.push_back(mean);
      result.coverage_std.push_back(sd);
      ++next;
    }
  }
  return result;
}

double mean_unexpectedness(const UserItemSets& lists, const RecommenderInputs& in, const RecommenderConfig& cfg) {
  double total = 0.0;
  std::size_t users = 0;
  for (const auto& [user, items] : lists) {
    if (items.empty()) continue;
    auto es = expected_set(user, in.graph, in.embeddings, in.history, in.policy);
    double s = 0.0;
    std::size_t k = 0;
    for (NodeId i : items) {
      if (!in.embeddings.contains(i)) continue;
      s += signed_unexpectedness(es.hull, in.embeddings.input(i), cfg.unexpectedness).value;
      ++k;
    }
    if (!k) continue;
    total += s / static_cast<double>(k);
    ++users;
  }
  return users ? total / static_cast<double>(users) : 0.0;
}

UserItemSets useful_sets(std::span<const NodeId> users, const RecommenderInputs& in,
                         std::span<const Interaction> test, double threshold) {
  std::map<std::pair<NodeId, NodeId>, double> truth;
  for (const auto& r : test) truth[{r.user, r.item}] = r.rating;
  const auto catalog = in.graph.nodes_of_type(NodeType::Item);
  UserItemSets out;
  for (NodeId u : users) {
    auto& list = out[u];
    for (NodeId i : catalog) {
      if (in.history.has(u, i)) continue;
      auto it = truth.find({u, i});
      const double r = it != truth.end() ? it->second : in.model.predict(u, i);
      if (r >= threshold) list.push_back(i);
    }
  }
  return out;
}

std::string to_key_value(const MetricsReport& r) {
  std::ostringstream os;
  os << "n = " << r.n << '\n'
     << "rmse = " << text::format_double(r.rmse) << '\n'
     << "mae = " << text::format_double(r.mae) << '\n'
     << "precision_at_n = " << text::format_double(r.precision_at_n) << '\n'
     << "recall_at_n = " << text::format_double(r.recall_at_n) << '\n'
     << "unexpectedness = " << text::format_double(r.unexpectedness) << '\n'
     << "serendipity = " << text::format_double(r.serendipity) << '\n'
     << "diversity = " << text::format_double(r.diversity) << '\n'
     << "coverage = " << text::format_double(r.coverage) << '\n';
  return os.str();
}

std::string csv_header() {
  return "algorithm,fold,n,rmse,mae,precision_at_n,recall_at_n,unexpectedness,serendipity,diversity,coverage";
}

std::string to_csv_row(const std::string& algorithm, std::uint32_t fold, const MetricsReport& r) {
  std::ostringstream os;
  os << algorithm << ',' << fold << ',' << r.n;
  for (double v : {r.rmse, r.mae, r.precision_at_n, r.recall_at_n, r.unexpectedness, r.serendipity, r.diversity,
                   r.coverage})
    os << ',' << text::format_double(v);
  return os.str();
}

}  // namespace hullrec
