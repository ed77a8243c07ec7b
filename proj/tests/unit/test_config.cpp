#include <doctest.h>

#include "helpers.hpp"
#include "hullrec/config.hpp"
#include "hullrec/error.hpp"

using namespace hullrec;

TEST_SUITE("config") {
  TEST_CASE("defaults parse from an empty file") {
    auto cfg = parse_config("");
    CHECK(cfg.seed == 1);
    CHECK(cfg.recommender.alpha == 0.5);
    CHECK(cfg.recommender.top_n == 10);
    CHECK(cfg.data.min_count == 5);
  }

  TEST_CASE("values, comments and sections") {
    auto cfg = parse_config(
        "seed = 9  # trailing\n"
        "[recommender]\n"
        "alpha = 0.25\n"
        "expected_set = base_with_entities\n"
        "[walk]\n"
        "c_ee = 0\n"
        "c_ei = 0.3333333333333333\n"
        "[eval]\n"
        "iterations = 1, 5, 10\n");
    CHECK(cfg.seed == 9);
    CHECK(cfg.walk.seed == 9);
    CHECK(cfg.recommender.alpha == 0.25);
    CHECK(cfg.expected.kind == ExpectedSetKind::BaseWithEntities);
    CHECK(cfg.coefficients[4] == 0.0);
    CHECK(cfg.eval.iterative.iterations == std::vector<std::uint32_t>{1, 5, 10});
  }

  TEST_CASE("errors name the line") {
    auto message = [](const std::string& text) {
      try {
        parse_config(text, "x.ini");
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(message("[walk]\nwalk_length = 10\nbogus = 1\n").find("x.ini:3") != std::string::npos);
    CHECK(message("[walk]\nbogus = 1\n").find("bogus") != std::string::npos);
    CHECK(message("[nope]\n").find("x.ini:1") != std::string::npos);
    CHECK(message("seed\n").find("x.ini:1") != std::string::npos);
    CHECK(message("seed = 1\nseed = 2\n").find("x.ini:2") != std::string::npos);
    CHECK(message("[recommender]\nalpha = 1.5\n").find("x.ini:2") != std::string::npos);
    CHECK(message("[walk]\nwalk_length = ten\n").find("x.ini:2") != std::string::npos);
    CHECK(message("[eval]\niterations = 5, 1\n").find("x.ini:2") != std::string::npos);
    CHECK(message("[split]\nfolds = 3\nfold = 3\n") != "");
    CHECK(message("[data]\nformat = yelp\n") != "");
  }

  TEST_CASE("render round trip") {
    auto cfg = parse_config("seed = 3\n[train]\ndim = 16\n[rating]\nmodel = bias_only\n");
    auto again = parse_config(render_config(cfg));
    CHECK(render_config(again) == render_config(cfg));
    CHECK(again.train.dim == 16);
    CHECK(again.rating.kind == RatingModelKind::BiasOnly);
  }

  TEST_CASE("data paths resolve against the config file") {
    auto dir = testing::scratch_dir("config_paths");
    std::filesystem::create_directories(dir / "conf");
    testing::write_file(dir / "conf" / "c.ini", "[data]\nformat = yelp\nreviews = ../r.json\n");
    auto cfg = load_config(dir / "conf" / "c.ini");
    CHECK(std::filesystem::weakly_canonical(cfg.data.reviews) == std::filesystem::weakly_canonical(dir / "r.json"));
    CHECK_THROWS_AS(load_config(dir / "absent.ini"), ConfigError);
  }

  TEST_CASE("shipped configs load") {
    for (const char* name : {"default.ini", "synth_quick.ini", "yelp_fixture.ini", "tripadvisor_fixture.ini"})
      CHECK_NOTHROW(load_config(std::filesystem::path(HULLREC_SOURCE_DIR) / "configs" / name));
  }
}
