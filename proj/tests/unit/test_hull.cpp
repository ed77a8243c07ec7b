#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "hullrec/error.hpp"
#include "hullrec/hull.hpp"

using namespace hullrec;

namespace {

HullVertices triangle() { return HullVertices::from_points({{0, 0}, {1, 0}, {0, 1}}); }

oracle::Points random_points(std::mt19937_64& rng, std::size_t m, std::size_t d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  oracle::Points p(m, std::vector<double>(d));
  for (auto& v : p)
    for (double& x : v) x = u(rng);
  return p;
}

}  // namespace

TEST_SUITE("hull") {
  TEST_CASE("projection onto the hypotenuse") {
    const std::vector<double> q{1, 1};
    auto p = project_onto_hull(triangle(), q);
    CHECK(p.converged);
    CHECK(p.distance == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(p.projected_point[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(p.projected_point[1] == doctest::Approx(0.5).epsilon(1e-9));
    double wsum = 0;
    for (double w : p.weights) {
      CHECK(w >= 0.0);
      wsum += w;
    }
    CHECK(wsum == doctest::Approx(1.0));
  }

  TEST_CASE("query at a vertex") {
    const std::vector<double> q{1, 0};
    auto p = project_onto_hull(triangle(), q);
    CHECK(p.distance == 0.0);
    CHECK(p.weights == std::vector<double>{0, 1, 0});
  }

  TEST_CASE("input checks") {
    const std::vector<double> q3{1, 0, 0};
    CHECK_THROWS_AS(project_onto_hull(triangle(), q3), DataError);
    CHECK_THROWS(HullVertices({}, 2));
    CHECK_THROWS(HullVertices::from_points({{0, 0}, {1}}));
    HullOptions bad;
    bad.tol = 0;
    const std::vector<double> q{0, 0};
    CHECK_THROWS_AS(project_onto_hull(triangle(), q, bad), ConfigError);
  }

  TEST_CASE("random instances agree with the oracles") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> qdist(-0.5, 1.5);
    for (int trial = 0; trial < 150; ++trial) {
      const std::size_t d = 2 + trial % 3;
      const std::size_t m = 1 + trial % 6;
      auto pts = random_points(rng, m, d);
      std::vector<double> q(d);
      for (double& x : q) x = qdist(rng);
      auto h = HullVertices::from_points(pts);
      auto p = project_onto_hull(h, q);
      CHECK(std::abs(p.distance - oracle::exact_qp_distance(pts, q)) <= 1e-6);
      if (trial < 40) CHECK(std::abs(p.distance - oracle::grid_distance(pts, q)) <= 1e-2);

      // first-order optimality: (q - x)·(v_i - x) <= slack for all vertices
      for (std::size_t i = 0; i < m; ++i) {
        double s = 0;
        for (std::size_t t = 0; t < d; ++t) s += (q[t] - p.projected_point[t]) * (pts[i][t] - p.projected_point[t]);
        CHECK(s <= 1e-6);
      }
      // projected point is the weighted vertex sum
      for (std::size_t t = 0; t < d; ++t) {
        double x = 0;
        for (std::size_t i = 0; i < m; ++i) x += p.weights[i] * pts[i][t];
        CHECK(std::abs(x - p.projected_point[t]) <= 1e-9);
      }
    }
  }

  TEST_CASE("degenerate hulls have closed forms") {
    auto one = HullVertices::from_points({{1, 2, 3}});
    const std::vector<double> q{0, 0, 0};
    CHECK(project_onto_hull(one, q).distance == doctest::Approx(std::sqrt(14.0)).epsilon(1e-12));

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 50; ++trial) {
      oracle::Vec2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, p{2 * u(rng), 2 * u(rng)};
      auto seg = HullVertices::from_points({{a.x, a.y}, {b.x, b.y}});
      const std::vector<double> qp{p.x, p.y};
      CHECK(std::abs(project_onto_hull(seg, qp).distance - oracle::segment_distance(p, a, b)) <= 1e-9);
    }
  }

  TEST_CASE("adding a vertex never increases the distance") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      auto pts = random_points(rng, 4, 3);
      std::vector<double> q{1.5, -0.3, 0.9};
      const double before = project_onto_hull(HullVertices::from_points(pts), q).distance;
      pts.push_back(random_points(rng, 1, 3)[0]);
      CHECK(project_onto_hull(HullVertices::from_points(pts), q).distance <= before + 1e-9);
    }
  }

  TEST_CASE("rigid motions preserve distances") {
    std::mt19937_64 rng(4);
    const double th = 0.7, c = std::cos(th), s = std::sin(th);
    for (int trial = 0; trial < 30; ++trial) {
      auto pts = random_points(rng, 5, 2);
      std::vector<double> q{1.7, -0.4};
      auto moved = pts;
      for (auto& v : moved) v = {c * v[0] - s * v[1] + 3.0, s * v[0] + c * v[1] - 1.0};
      std::vector<double> mq{c * q[0] - s * q[1] + 3.0, s * q[0] + c * q[1] - 1.0};
      const double a = project_onto_hull(HullVertices::from_points(pts), q).distance;
      const double b = project_onto_hull(HullVertices::from_points(moved), mq).distance;
      CHECK(std::abs(a - b) <= 1e-9);
    }
  }

  TEST_CASE("membership") {
    auto t = triangle();
    CHECK(contains(t, t.centroid()));
    const std::vector<double> out{1, 1};
    CHECK_FALSE(contains(t, out));
    auto one = HullVertices::from_points({{0.5, 0.5}});
    const std::vector<double> same{0.5, 0.5}, other{0.5, 0.6};
    CHECK(contains(one, same));
    CHECK_FALSE(contains(one, other));
  }

  TEST_CASE("interior depth") {
    const std::vector<double> q{0.25, 0.25};
    const double depth = interior_depth(triangle(), q);
    CHECK(depth >= 0.25 * 0.85);
    CHECK(depth <= 0.25 * 1.15);
    CHECK(depth >= 0.25 - 1e-9);  // upper bound on the true distance

    const std::vector<double> vertex{0, 1};
    CHECK(interior_depth(triangle(), vertex) == doctest::Approx(0.0).epsilon(1e-9));

    auto line = HullVertices::from_points({{0}, {1}});
    const std::vector<double> x{0.3};
    CHECK(interior_depth(line, x) == doctest::Approx(0.3).epsilon(1e-12));

    const std::vector<double> outside{1, 1};
    CHECK_THROWS_AS(interior_depth(triangle(), outside), DataError);
  }

  TEST_CASE("signed unexpectedness") {
    const std::vector<double> out{1, 1}, in{0.25, 0.25}, vertex{1, 0};
    auto a = signed_unexpectedness(triangle(), out);
    CHECK(a.value == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
    CHECK_FALSE(a.interior);
    auto b = signed_unexpectedness(triangle(), in);
    CHECK(b.interior);
    CHECK(b.value == doctest::Approx(-0.25).epsilon(0.15));
    auto c = signed_unexpectedness(triangle(), vertex);
    CHECK(c.interior);
    CHECK(c.value == doctest::Approx(0.0).epsilon(1e-9));
  }

  TEST_CASE("quasi-random directions are unit and fixed") {
    auto a = quasi_random_directions(5, 64);
    auto b = quasi_random_directions(5, 64);
    CHECK(a == b);
    REQUIRE(a.size() == 5 * 64);
    for (std::size_t k = 0; k < 64; ++k) {
      double n = 0;
      for (std::size_t t = 0; t < 5; ++t) n += a[k * 5 + t] * a[k * 5 + t];
      CHECK(n == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}
