#include <doctest.h>

#include <random>
#include <set>

#include "helpers.hpp"
#include "hullrec/error.hpp"
#include "hullrec/recommender.hpp"

using namespace hullrec;

namespace {

// Users u0, u1; items i0..i5; entity e0 linked to u0. 2-D embeddings.
struct Fixture {
  HinGraph g;
  NodeId u0, u1, e0;
  std::vector<NodeId> items;
  EmbeddingTable emb;
  RatingModel model;
  std::vector<Interaction> train;
  InteractionIndex history;

  Fixture() {
    u0 = g.add_node("user:u0", NodeType::User);
    u1 = g.add_node("user:u1", NodeType::User);
    for (int k = 0; k < 6; ++k) items.push_back(g.add_node("item:i" + std::to_string(k), NodeType::Item));
    e0 = g.add_node("entity:e0", NodeType::Entity);
    train = {{u0, items[0], 5, 1}, {u0, items[1], 4, 2}, {u1, items[2], 3, 1}};
    for (const auto& r : train) g.add_edge(r.user, r.item);
    g.add_edge(u0, e0);
    g.freeze();

    std::vector<NodeId> ids{u0, u1, e0};
    ids.insert(ids.end(), items.begin(), items.end());
    std::sort(ids.begin(), ids.end());
    emb = EmbeddingTable(ids, 2);
    auto set = [&](NodeId v, double x, double y) {
      emb.input(v)[0] = x;
      emb.input(v)[1] = y;
    };
    set(u0, 0, 0);
    set(items[0], 1, 0);
    set(items[1], 0, 1);
    set(e0, 1, 1);
    set(u1, 5, 5);
    set(items[2], 0.2, 0.2);  // inside u0's triangle
    set(items[3], 2, 2);
    set(items[4], 4, 0);
    set(items[5], -1, -1);

    model.kind = RatingModelKind::BiasOnly;
    model.global_mean = 3.0;
    model.item_bias = {{items[2], 1.5}, {items[3], -1.0}, {items[4], 0.5}, {items[5], 0.5}};
    history = InteractionIndex(train);
  }

  RecommenderInputs inputs(ExpectedSetKind kind = ExpectedSetKind::Base) const {
    ExpectedSetPolicy p;
    p.kind = kind;
    return RecommenderInputs{g, emb, model, history, p};
  }
};

}  // namespace

TEST_SUITE("recommender") {
  TEST_CASE("expected sets") {
    Fixture f;
    ExpectedSetPolicy base;
    auto es = expected_set(f.u0, f.g, f.emb, f.history, base);
    CHECK(es.members == std::vector<NodeId>{f.u0, f.items[0], f.items[1]});
    CHECK(es.hull.size() == 3);

    ExpectedSetPolicy ent;
    ent.kind = ExpectedSetKind::BaseWithEntities;
    CHECK(expected_set(f.u0, f.g, f.emb, f.history, ent).hull.size() == 4);

    InteractionIndex empty;
    CHECK(expected_set(f.u0, f.g, f.emb, empty, base).hull.size() == 1);
    CHECK_THROWS_AS(expected_set(f.items[0], f.g, f.emb, f.history, base), DataError);
    CHECK_THROWS_AS(expected_set(999, f.g, f.emb, f.history, base), DataError);

    ExpectedSetPolicy capped;
    capped.max_vertices = 1;
    CHECK(expected_set(f.u0, f.g, f.emb, f.history, capped).members == std::vector<NodeId>{f.u0, f.items[1]});

    EmbeddingTable partial({f.u0, f.items[0]}, 2);
    auto p = expected_set(f.u0, f.g, partial, f.history, base);
    CHECK(p.hull.size() == 2);
    CHECK(p.skipped == 1);
  }

  TEST_CASE("utility arithmetic") {
    CHECK(hybrid_utility(0.8, 0.4, 0.5) == doctest::Approx(0.6));
    CHECK(hybrid_utility(0.8, 0.4, 0.0) == 0.8);
    CHECK(hybrid_utility(0.8, 0.4, 1.0) == 0.4);
  }

  TEST_CASE("scoring: endpoints, normalization and hull consistency") {
    Fixture f;
    auto es = expected_set(f.u0, f.g, f.emb, f.history, {});
    RecommenderConfig cfg;
    auto in = f.inputs();
    auto candidates = candidate_items(f.u0, in, cfg);
    CHECK(candidates == std::vector<NodeId>{f.items[2], f.items[3], f.items[4], f.items[5]});

    cfg.alpha = 0.0;
    auto scored = score_candidates(f.u0, candidates, es.hull, f.emb, f.model, cfg);
    double lo = 1, hi = 0;
    for (const auto& s : scored) {
      CHECK(s.utility == s.rating_norm);
      lo = std::min(lo, s.unexp_norm);
      hi = std::max(hi, s.unexp_norm);
      if (s.unexpectedness_raw > 0) CHECK_FALSE(contains(es.hull, f.emb.input(s.item)));
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
    auto ro = recommend_rating_only(f.u0, candidates, f.model, 10);
    auto top = recommend_top_n(f.u0, scored, cfg);
    std::vector<NodeId> got;
    for (const auto& s : top.items) got.push_back(s.item);
    CHECK(got == ro);

    cfg.alpha = 1.0;
    auto by_unexp = recommend_top_n(f.u0, score_candidates(f.u0, candidates, es.hull, f.emb, f.model, cfg), cfg);
    for (std::size_t k = 1; k < by_unexp.items.size(); ++k)
      CHECK(by_unexp.items[k - 1].unexpectedness_raw >= by_unexp.items[k].unexpectedness_raw);
    CHECK(by_unexp.items.front().item == f.items[4]);
  }

  TEST_CASE("top-n ordering and ties") {
    RecommenderConfig cfg;
    cfg.alpha = 0.5;
    std::vector<ScoredItem> two{{1, 0, 0, 0, 0.0, 0.3}, {2, 0, 0, 0, 0.0, 0.9}};
    auto l = recommend_top_n(0, two, cfg);
    REQUIRE(l.items.size() == 2);
    CHECK(l.items[0].item == 2);
    CHECK(l.items[1].item == 1);

    std::vector<ScoredItem> tie{{5, 0, 0, 0, -0.1, 0.5}, {6, 0, 0, 0, 0.2, 0.5}, {4, 0, 0, 0, -0.1, 0.5}};
    auto t = recommend_top_n(0, tie, cfg);
    CHECK(t.items[0].item == 6);
    CHECK(t.items[1].item == 4);
    CHECK(t.items[2].item == 5);

    CHECK(recommend_top_n(0, {}, cfg).items.empty());
    cfg.top_n = 1;
    CHECK(recommend_top_n(0, tie, cfg).items.size() == 1);
  }

  TEST_CASE("recommend_all lists are short, fresh and deterministic") {
    Fixture f;
    RecommenderConfig cfg;
    cfg.top_n = 3;
    const std::vector<NodeId> users{f.u0, f.u1};
    auto a = recommend_all(users, f.inputs(), cfg);
    auto b = recommend_all(users, f.inputs(), cfg);
    for (NodeId u : users) {
      const auto& l = a.at(u).items;
      CHECK(l.size() <= 3);
      std::set<NodeId> uniq;
      for (const auto& s : l) {
        CHECK_FALSE(f.history.has(u, s.item));
        uniq.insert(s.item);
      }
      CHECK(uniq.size() == l.size());
      REQUIRE(b.at(u).items.size() == l.size());
      for (std::size_t k = 0; k < l.size(); ++k) CHECK(b.at(u).items[k].item == l[k].item);
    }
  }

  TEST_CASE("mean unexpectedness of the list never drops as alpha grows") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ScoredItem> batch;
    for (NodeId k = 0; k < 40; ++k) {
      ScoredItem s;
      s.item = k;
      s.rating_norm = u(rng);
      s.unexpectedness_raw = 2 * u(rng) - 1;
      batch.push_back(s);
    }
    double lo = 1e9, hi = -1e9;
    for (const auto& s : batch) lo = std::min(lo, s.unexpectedness_raw), hi = std::max(hi, s.unexpectedness_raw);
    double prev = -1e9;
    for (double alpha = 0.0; alpha <= 1.0 + 1e-12; alpha += 0.05) {
      RecommenderConfig cfg;
      cfg.alpha = std::min(alpha, 1.0);
      auto scored = batch;
      for (auto& s : scored) {
        s.unexp_norm = (s.unexpectedness_raw - lo) / (hi - lo);
        s.utility = hybrid_utility(s.rating_norm, s.unexp_norm, cfg.alpha);
      }
      auto l = recommend_top_n(0, scored, cfg);
      double mean = 0;
      for (const auto& s : l.items) mean += s.unexpectedness_raw;
      mean /= static_cast<double>(l.items.size());
      CHECK(mean >= prev - 1e-12);
      prev = mean;
    }
  }

  TEST_CASE("candidate cap samples across popularity strata") {
    Fixture f;
    RecommenderConfig cfg;
    cfg.max_candidates = 2;
    auto c = candidate_items(f.u0, f.inputs(), cfg);
    CHECK(c.size() == 2);
    CHECK(candidate_items(f.u0, f.inputs(), cfg) == c);
    for (NodeId i : c) CHECK_FALSE(f.history.has(f.u0, i));
  }

  TEST_CASE("keys and recommendation files") {
    CHECK(graph_key(NodeType::Item, "abc") == "item:abc");
    CHECK(external_key("user:x:y") == "x:y");
    CHECK(external_key("plain") == "plain");

    Fixture f;
    RecommenderConfig cfg;
    const std::vector<NodeId> users{f.u1, f.u0};
    auto lists = recommend_all(users, f.inputs(), cfg);
    auto dir = testing::scratch_dir("recs");
    save_recommendations(lists, f.g, dir / "r.tsv");
    const auto text = testing::slurp(dir / "r.tsv");
    CHECK(text.rfind("u0\t", 0) == 0);
    auto back = load_recommendations(f.g, dir / "r.tsv");
    for (NodeId u : users) {
      std::vector<NodeId> ids;
      for (const auto& s : lists.at(u).items) ids.push_back(s.item);
      CHECK(back.at(u) == ids);
    }
  }
}
