#include "hullrec/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "hullrec/error.hpp"
#include "hullrec/rng.hpp"
#include "hullrec/text_io.hpp"

namespace hullrec {

StagePaths::StagePaths(std::filesystem::path r) : root(std::move(r)) {}

namespace {

void require(const std::filesystem::path& p, const char* stage) {
  if (!std::filesystem::exists(p))
    throw DataError("missing " + p.string() + " (run '" + stage + "' first)");
}

std::vector<Interaction> load_interactions(const HinGraph& g, const std::filesystem::path& path, RatingScale scale) {
  std::vector<Interaction> out;
  for (const auto& r : load_records(path, scale)) {
    auto u = g.find(graph_key(NodeType::User, r.user_key));
    auto i = g.find(graph_key(NodeType::Item, r.item_key));
    if (!u || !i) throw DataError(path.string() + ": user or item missing from the graph: " + r.user_key + ", " + r.item_key);
    out.push_back({*u, *i, r.rating, r.timestamp.value_or(0)});
  }
  return out;
}

std::vector<InteractionRecord> to_records(const HinGraph& g, std::span<const Interaction> xs) {
  std::vector<InteractionRecord> out;
  out.reserve(xs.size());
  for (const auto& x : xs)
    out.push_back({std::string(external_key(g.key(x.user))), std::string(external_key(g.key(x.item))), x.rating,
                   x.timestamp, {}});
  return out;
}

std::vector<NodeId> target_users(const HinGraph& g, const EvalConfig& eval) {
  auto users = g.nodes_of_type(NodeType::User);
  if (eval.max_users > 0 && users.size() > eval.max_users) users.resize(eval.max_users);
  return users;
}

struct Loaded {
  HinGraph graph;
  EmbeddingTable embeddings;
  RatingModel model;
  std::vector<Interaction> train;
  std::vector<Interaction> test;
  InteractionIndex history;

  RecommenderInputs inputs(const ExpectedSetPolicy& policy) const {
    return RecommenderInputs{graph, embeddings, model, history, policy};
  }
};

Loaded load_stage_inputs(const PipelineConfig& cfg, const StagePaths& paths, bool need_embeddings) {
  require(paths.graph_dir() / "nodes.tsv", "build-graph");
  require(paths.rating_model(), "train");
  Loaded l;
  l.graph = HinGraph::load(paths.graph_dir());
  if (need_embeddings) {
    require(paths.embeddings(), "train");
    l.embeddings = load_embeddings(paths.embeddings());
  }
  l.model = load_rating_model(paths.rating_model());
  l.train = load_interactions(l.graph, paths.train(), cfg.data.scale);
  l.test = load_interactions(l.graph, paths.test(), cfg.data.scale);
  l.history = InteractionIndex(l.train);
  return l;
}

void write_ingest_stats(const IngestStats& s, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  out << "lines = " << s.lines << "\nmalformed = " << s.malformed << "\nfiltered = " << s.filtered
      << "\nkept = " << s.kept << '\n';
}

void save_rankings(const std::map<NodeId, std::vector<NodeId>>& lists, const HinGraph& g,
                   const std::filesystem::path& path) {
  std::vector<std::pair<std::string, const std::vector<NodeId>*>> rows;
  for (const auto& [u, items] : lists) rows.emplace_back(std::string(external_key(g.key(u))), &items);
  std::sort(rows.begin(), rows.end());
  auto out = text::open_output(path);
  for (const auto& [user, items] : rows)
    for (std::size_t r = 0; r < items->size(); ++r)
      out << user << '\t' << (r + 1) << '\t' << external_key(g.key((*items)[r])) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace

void run_synth(const PipelineConfig& cfg, const StageLog& log) {
  const StagePaths paths(cfg.output_dir);
  auto data = synth_dataset(cfg.synth);
  save_records(data.records, paths.interactions());
  save_links(data.links, paths.entities());
  save_labels(data, paths.labels());
  write_ingest_stats({data.records.size(), 0, 0, data.records.size()}, paths.ingest_stats());
  log.info("synth: " + std::to_string(data.records.size()) + " interactions, " + std::to_string(data.links.size()) +
           " entity links");
}

void run_ingest(const PipelineConfig& cfg, const StageLog& log) {
  const StagePaths paths(cfg.output_dir);
  if (cfg.data.format == DataFormat::Synth)
    throw ConfigError("data.format = synth has nothing to ingest; run 'synth' instead");
  EntityVocabulary vocab;
  if (!cfg.data.vocabulary.empty()) vocab = EntityVocabulary::load(cfg.data.vocabulary);
  Dataset ds = cfg.data.format == DataFormat::Yelp
                   ? load_yelp(cfg.data.reviews, cfg.data.business, cfg.data.users, cfg.data.scale, &vocab)
                   : load_tripadvisor(cfg.data.reviews, cfg.data.scale, &vocab);
  if (ds.stats.lines == 0) log.warn("ingest: " + cfg.data.reviews.string() + " has no records");
  if (ds.stats.malformed > 0)
    log.warn("ingest: skipped " + std::to_string(ds.stats.malformed) + " malformed lines");
  const auto before = ds.records.size();
  auto filtered = filter_sparse(std::move(ds.records), cfg.data.min_count, cfg.data.fixed_point);
  ds.stats.filtered = filtered.removed;
  ds.stats.kept = filtered.records.size();
  if (filtered.records.empty() && before > 0)
    log.warn("ingest: nothing survives data.min_count = " + std::to_string(cfg.data.min_count));
  const auto links = prune_links(ds.links, filtered.records);
  save_records(filtered.records, paths.interactions());
  save_links(links, paths.entities());
  write_ingest_stats(ds.stats, paths.ingest_stats());
  log.info("ingest: " + std::to_string(ds.stats.kept) + " kept of " + std::to_string(ds.stats.lines) + " lines (" +
           std::to_string(ds.stats.malformed) + " malformed, " + std::to_string(ds.stats.filtered) + " filtered in " +
           std::to_string(filtered.rounds) + " rounds)");
}

void run_build_graph(const PipelineConfig& cfg, const StageLog& log) {
  const StagePaths paths(cfg.output_dir);
  require(paths.interactions(), "ingest' or 'synth");
  const auto records = load_records(paths.interactions(), cfg.data.scale);
  const auto links = std::filesystem::exists(paths.entities()) ? load_links(paths.entities()) : std::vector<EntityLink>{};
  if (records.empty()) throw DataError(paths.interactions().string() + " has no interactions");

  std::set<std::string> users, items, entities;
  for (const auto& r : records) {
    users.insert(r.user_key);
    items.insert(r.item_key);
  }
  for (const auto& l : links)
    if (l.origin != EntityOrigin::Friendship) entities.insert(l.entity_key);

  HinGraph g;
  for (const auto& k : users) g.add_node(graph_key(NodeType::User, k), NodeType::User);
  for (const auto& k : items) g.add_node(graph_key(NodeType::Item, k), NodeType::Item);
  for (const auto& k : entities) g.add_node(graph_key(NodeType::Entity, k), NodeType::Entity);

  std::vector<Interaction> xs;
  xs.reserve(records.size());
  for (const auto& r : records)
    xs.push_back({*g.find(graph_key(NodeType::User, r.user_key)), *g.find(graph_key(NodeType::Item, r.item_key)),
                  r.rating, r.timestamp.value_or(0)});
  auto folds = k_fold_split(xs, cfg.split.folds, cfg.seed);
  const auto& split = folds.at(cfg.split.fold);

  for (const auto& x : split.train) g.add_edge(x.user, x.item);
  std::size_t dropped = 0;
  for (const auto& l : links) {
    auto src = g.find(graph_key(l.source_type, l.source_key));
    auto dst = l.origin == EntityOrigin::Friendship ? g.find(graph_key(NodeType::User, l.entity_key))
                                                    : g.find(graph_key(NodeType::Entity, l.entity_key));
    if (!src || !dst || *src == *dst) {
      ++dropped;
      continue;
    }
    g.add_edge(*src, *dst);
  }
  g.freeze();
  g.save(paths.graph_dir());
  save_records(to_records(g, split.train), paths.train());
  save_records(to_records(g, split.test), paths.test());
  if (dropped) log.warn("build-graph: ignored " + std::to_string(dropped) + " links to unknown nodes");
  log.info("build-graph: fold " + std::to_string(cfg.split.fold) + "/" + std::to_string(cfg.split.folds) + ", " +
           std::to_string(g.node_count()) + " nodes, " + std::to_string(g.edge_count()) + " edges, " +
           std::to_string(split.train.size()) + " train / " + std::to_string(split.test.size()) + " test");
}

void run_walk(const PipelineConfig& cfg, const StageLog& log) {
  const StagePaths paths(cfg.output_dir);
  require(paths.graph_dir() / "nodes.tsv", "build-graph");
  const auto g = HinGraph::load(paths.graph_dir());
  const auto corpus = generate_corpus(g, cfg.walk, cfg.transitions(), cfg.walk_threads);
  save_corpus(corpus, paths.corpus());
  log.info("walk: " + std::to_string(corpus.walks.size()) + " walks, " + std::to_string(corpus.token_count()) +
           " tokens");
}

void run_train(const PipelineConfig& cfg, const StageLog& log) {
  const StagePaths paths(cfg.output_dir);
  require(paths.corpus(), "walk");
  const auto g = HinGraph::load(paths.graph_dir());
  const auto corpus = load_corpus(paths.corpus());
  if (corpus.graph_fingerprint != g.fingerprint())
    throw DataError(paths.corpus().string() + " was generated from a different graph; rerun 'walk'");

  TrainStats stats;
  const auto table = train_embeddings(corpus, cfg.train, &stats);
  save_embeddings(table, paths.embeddings());

  const auto train = load_interactions(g, paths.train(), cfg.data.scale);
  std::vector<double> mf_rmse;
  const auto model = cfg.rating.kind == RatingModelKind::BiasedMF
                         ? fit_biased_mf(train, cfg.rating.mf, cfg.data.scale, &mf_rmse)
                         : fit_bias_only(train, cfg.data.scale, cfg.rating.damping);
  save_rating_model(model, paths.rating_model());
  save_rating_model(fit_bias_only(train, cfg.data.scale, cfg.rating.damping), paths.primitive_model());

  auto out = text::open_output(paths.train_log());
  out << "pairs_per_epoch = " << stats.pairs_per_epoch << '\n';
  for (std::size_t e = 0; e < stats.epoch_mean_loss.size(); ++e)
    out << "sgns_epoch " << (e + 1) << " loss " << text::format_double(stats.epoch_mean_loss[e]) << '\n';
  for (std::size_t e = 0; e < mf_rmse.size(); ++e)
    out << "mf_epoch " << e << " train_rmse " << text::format_double(mf_rmse[e]) << '\n';

  const double first = stats.epoch_mean_loss.empty() ? 0.0 : stats.epoch_mean_loss.front();
  const double last = stats.epoch_mean_loss.empty() ? 0.0 : stats.epoch_mean_loss.back();
  log.info("train: " + std::to_string(table.size()) + " embeddings (dim " + std::to_string(table.dim()) +
           "), sgns loss " + text::format_double(first) + " -> " + text::format_double(last));
}

void run_recommend(const PipelineConfig& cfg, bool rating_only, const StageLog& log) {
  const StagePaths paths(cfg.output_dir);
  const auto l = load_stage_inputs(cfg, paths, !rating_only);
  const auto in = l.inputs(cfg.expected);
  const auto users = target_users(l.graph, cfg.eval);
  if (rating_only) {
    std::map<NodeId, std::vector<NodeId>> lists;
    for (NodeId u : users)
      lists[u] = recommend_rating_only(u, candidate_items(u, in, cfg.recommender), l.model, cfg.recommender.top_n);
    save_rankings(lists, l.graph, paths.ranking_rating_only());
    log.info("recommend: rating-only lists for " + std::to_string(users.size()) + " users");
    return;
  }
  const auto lists = recommend_all(users, in, cfg.recommender);
  save_recommendations(lists, l.graph, paths.topn());
  std::map<NodeId, std::vector<NodeId>> ranks;
  for (const auto& [u, list] : lists)
    for (const auto& s : list.items) ranks[u].push_back(s.item);
  save_rankings(ranks, l.graph, paths.ranking());
  log.info("recommend: top-" + std::to_string(cfg.recommender.top_n) + " for " + std::to_string(users.size()) +
           " users at alpha " + text::format_double(cfg.recommender.alpha));
}

MetricsTable run_evaluate(const PipelineConfig& cfg, const StageLog& log) {
  const StagePaths paths(cfg.output_dir);
  require(paths.topn(), "recommend");
  require(paths.primitive_model(), "train");
  const auto l = load_stage_inputs(cfg, paths, true);
  const auto primitive = load_rating_model(paths.primitive_model());
  const auto in = l.inputs(cfg.expected);
  const auto& rc = cfg.recommender;
  const auto n = rc.top_n;
  const auto users = target_users(l.graph, cfg.eval);
  const std::set<NodeId> user_set(users.begin(), users.end());

  UserItemSets lch;
  for (auto& [u, items] : load_recommendations(l.graph, paths.topn()))
    if (user_set.count(u)) lch[u] = std::move(items);
  UserItemSets ro, random, pm;
  for (NodeId u : users) {
    const auto candidates = candidate_items(u, in, rc);
    ro[u] = recommend_rating_only(u, candidates, l.model, n);
    pm[u] = recommend_rating_only(u, candidates, primitive, n);
    auto rng = derive_stream(cfg.seed, {0x6576616cULL, u});
    random[u] = recommend_random(candidates, n, rng);
  }
  const auto useful = useful_sets(users, in, l.test, rc.useful_threshold);
  std::vector<Interaction> test;
  for (const auto& x : l.test)
    if (user_set.count(x.user)) test.push_back(x);
  const auto [rmse, mae] = rmse_mae(l.model, test);
  const auto catalog = l.graph.nodes_of_type(NodeType::Item).size();

  auto report = [&](const UserItemSets& rs) {
    MetricsReport r;
    r.n = n;
    r.rmse = rmse;
    r.mae = mae;
    std::tie(r.precision_at_n, r.recall_at_n) = precision_recall_at_n(rs, test, n, cfg.eval.relevance_threshold);
    r.unexpectedness = mean_unexpectedness(rs, in, rc);
    std::tie(r.serendipity, r.diversity) = serendipity_diversity(rs, pm, useful, cfg.eval.denominator);
    r.coverage = catalog_coverage(rs, catalog);
    return r;
  };
  MetricsTable table{{"LCH", report(lch)}, {"RO", report(ro)}, {"Random", report(random)}};

  auto txt = text::open_output(paths.metrics_txt());
  txt << "alpha = " << text::format_double(rc.alpha) << "\nfold = " << cfg.split.fold << '\n';
  for (const auto& [name, r] : table) txt << "\n[" << name << "]\n" << to_key_value(r);

  auto csv = text::open_output(paths.metrics_csv());
  csv << csv_header() << '\n';
  for (const auto& [name, r] : table) csv << to_csv_row(name, cfg.split.fold, r) << '\n';

  auto per = text::open_output(paths.per_user_csv());
  per << "algorithm,user,precision_at_n,recall_at_n,unexpectedness,serendipity,diversity\n";
  const std::pair<const char*, const UserItemSets*> algos[] = {{"LCH", &lch}, {"RO", &ro}, {"Random", &random}};
  for (const auto& [name, sets] : algos) {
    for (NodeId u : users) {
      auto it = sets->find(u);
      if (it == sets->end()) continue;
      const UserItemSets one{{u, it->second}};
      std::vector<Interaction> user_test;
      for (const auto& x : test)
        if (x.user == u) user_test.push_back(x);
      const auto [p, rec] = precision_recall_at_n(one, user_test, n, cfg.eval.relevance_threshold);
      const auto [s, d] = serendipity_diversity(one, pm, useful, cfg.eval.denominator);
      per << name << ',' << external_key(l.graph.key(u)) << ',' << text::format_double(p) << ','
          << text::format_double(rec) << ',' << text::format_double(mean_unexpectedness(one, in, rc)) << ','
          << text::format_double(s) << ',' << text::format_double(d) << '\n';
    }
  }
  log.info("evaluate: " + std::to_string(users.size()) + " users, " + std::to_string(test.size()) +
           " test interactions");
  return table;
}

std::vector<MaxHullExperiment> run_iterate(const PipelineConfig& cfg, const StageLog& log) {
  const StagePaths paths(cfg.output_dir);
  const auto l = load_stage_inputs(cfg, paths, true);
  const auto in = l.inputs(cfg.expected);
  const auto users = target_users(l.graph, cfg.eval);
  std::vector<MaxHullExperiment> runs;
  auto out = text::open_output(paths.coverage_csv());
  out << "policy,iteration,mean_coverage,std\n";
  for (auto policy : {IterativePolicy::LatentConvexHull, IterativePolicy::RatingOnly, IterativePolicy::Random}) {
    auto run = iterative_experiment(users, policy, in, cfg.recommender, cfg.eval.iterative);
    const auto name = policy_name(policy);
    out << name << ",0," << text::format_double(run.baseline) << ',' << text::format_double(run.baseline_std) << '\n';
    for (std::size_t i = 0; i < run.iterations.size(); ++i)
      out << name << ',' << run.iterations[i] << ',' << text::format_double(run.coverage_curve[i]) << ','
          << text::format_double(run.coverage_std[i]) << '\n';
    std::string curve;
    for (double c : run.coverage_curve) curve += " " + text::format_double(c);
    log.info("iterate: " + name + " over " + std::to_string(run.users) + " users, coverage" + curve);
    runs.push_back(std::move(run));
  }
  return runs;
}

std::string format_metrics_table(const MetricsTable& table) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s %8s %8s %8s %8s %9s %8s %8s %8s\n", "algo", "rmse", "mae", "p@n", "r@n",
                "unexp", "seren", "divers", "cover");
  os << buf;
  for (const auto& [name, r] : table) {
    std::snprintf(buf, sizeof buf, "%-8s %8.4f %8.4f %8.4f %8.4f %9.4f %8.4f %8.4f %8.4f\n", name.c_str(), r.rmse,
                  r.mae, r.precision_at_n, r.recall_at_n, r.unexpectedness, r.serendipity, r.diversity, r.coverage);
    os << buf;
  }
  return os.str();
}

}  // namespace hullrec
