#include <doctest.h>

#include "../pipeline_support.hpp"
#include "helpers.hpp"
#include "hullrec/error.hpp"

using namespace hullrec;

TEST_SUITE("pipeline") {
  TEST_CASE("planted clusters: high alpha leaves the home cluster, alpha 0 stays") {
    auto dir = testing::scratch_dir("pipeline_clusters");
    auto cfg = testing::quick_config(dir, 7);
    testing::run_models(cfg);
    StagePaths paths(dir);

    cfg.recommender.alpha = 0.0;
    run_recommend(cfg, false);
    const double at0 = testing::out_of_cluster_rate(paths.topn(), paths.labels());
    const auto ranking0 = testing::slurp(paths.ranking());
    run_recommend(cfg, true);
    CHECK(ranking0 == testing::slurp(paths.ranking_rating_only()));

    cfg.recommender.alpha = 0.8;
    run_recommend(cfg, false);
    const double at8 = testing::out_of_cluster_rate(paths.topn(), paths.labels());
    MESSAGE("out-of-cluster rate alpha=0: " << at0 << ", alpha=0.8: " << at8);
    CHECK(at0 < 0.05);
    CHECK(at8 >= 0.30);

    auto table = run_evaluate(cfg);
    REQUIRE(table.size() == 3);
    CHECK(table[0].first == "LCH");
    for (const auto& [name, r] : table) {
      CHECK(r.rmse >= r.mae);
      CHECK(r.serendipity >= r.diversity);
    }
    CHECK(std::filesystem::exists(paths.metrics_csv()));
    CHECK(std::filesystem::exists(paths.per_user_csv()));
  }

  TEST_CASE("stages fail cleanly on missing inputs") {
    auto dir = testing::scratch_dir("pipeline_missing");
    auto cfg = testing::quick_config(dir);
    CHECK_THROWS_AS(run_walk(cfg), DataError);
    CHECK_THROWS_AS(run_train(cfg), DataError);
    CHECK_THROWS_AS(run_ingest(cfg), ConfigError);
  }

  TEST_CASE("ingest on the yelp fixture feeds the graph") {
    auto dir = testing::scratch_dir("pipeline_yelp");
    auto cfg = load_config(std::filesystem::path(HULLREC_SOURCE_DIR) / "configs" / "yelp_fixture.ini");
    cfg.output_dir = dir;
    std::vector<std::string> warnings;
    StageLog log;
    log.warn = [&](const std::string& m) { warnings.push_back(m); };
    run_ingest(cfg, log);
    StagePaths paths(dir);
    CHECK(load_records(paths.interactions(), {}).size() == 3);
    CHECK(testing::slurp(paths.ingest_stats()).find("kept") != std::string::npos);
    cfg.split.folds = 2;
    run_build_graph(cfg, log);
    auto g = HinGraph::load(paths.graph_dir());
    CHECK(g.nodes_of_type(NodeType::User).size() == 2);
    CHECK(g.nodes_of_type(NodeType::Item).size() == 2);
    CHECK(g.nodes_of_type(NodeType::Entity).size() > 0);
  }
}
