#pragma once

// Reference solvers used only by tests: exact small-instance QP over the
// simplex, a simplex-grid brute force, and 2-D facet enumeration.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

using Points = std::vector<std::vector<double>>;

inline double point_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

/*
 * The projection lies in the relative interior of a face spanned by an
 * affinely independent vertex subset. For every subset, solve the
 * equality-constrained least squares via its KKT system and keep the
 * feasible (nonnegative) solutions.
 */
inline double exact_qp_distance(const Points& v, const std::vector<double>& q) {
  const std::size_t m = v.size(), d = q.size();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) s.push_back(i);
    const auto k = static_cast<Eigen::Index>(s.size());
    if (s.size() > d + 1) continue;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    Eigen::VectorXd rhs(k + 1);
    for (Eigen::Index a = 0; a < k; ++a) {
      double bq = 0;
      for (std::size_t t = 0; t < d; ++t) bq += v[s[a]][t] * q[t];
      rhs(a) = bq;
      for (Eigen::Index b = 0; b < k; ++b) {
        double g = 0;
        for (std::size_t t = 0; t < d; ++t) g += v[s[a]][t] * v[s[b]][t];
        kkt(a, b) = g;
      }
      kkt(a, k) = 1;
      kkt(k, a) = 1;
    }
    rhs(k) = 1;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (lu.rank() < k + 1) continue;
    Eigen::VectorXd sol = lu.solve(rhs);
    bool feasible = true;
    for (Eigen::Index a = 0; a < k; ++a) feasible = feasible && sol(a) >= -1e-12;
    if (!feasible) continue;
    std::vector<double> p(d, 0.0);
    for (Eigen::Index a = 0; a < k; ++a)
      for (std::size_t t = 0; t < d; ++t) p[t] += sol(a) * v[s[a]][t];
    best = std::min(best, point_distance(p, q));
  }
  return best;
}

/*
 * Brute force over simplex weights on a grid of the given step. Supports are
 * restricted to min(m, d + 1) vertices (enough by Caratheodory). The first
 * k - 2 weights run over the grid; for the last two the 1-D quadratic is
 * solved and its minimizer snapped to the two neighboring grid points.
 */
inline double grid_distance(const Points& v, const std::vector<double>& q, int steps = 200) {
  const std::size_t m = v.size(), d = q.size();
  if (m == 1) return point_distance(v[0], q);
  const std::size_t k = std::min(m, d + 1);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(k);
  std::vector<double> base(d), diff(d), p(d);

  auto eval_pair = [&](std::size_t ia, std::size_t ib, int rest) {
    // p(a) = base + a*v_ia + (r - a)*v_ib, a = j / steps, j in [0, rest]
    const double r = static_cast<double>(rest) / steps;
    double dd = 0, dc = 0;
    for (std::size_t t = 0; t < d; ++t) {
      diff[t] = v[ia][t] - v[ib][t];
      const double c = base[t] + r * v[ib][t] - q[t];
      dd += diff[t] * diff[t];
      dc += diff[t] * c;
    }
    const double a_star = dd > 0 ? -dc / dd : 0.0;
    const double j_star = std::clamp(a_star * steps, 0.0, static_cast<double>(rest));
    for (double j : {std::floor(j_star), std::ceil(j_star)}) {
      const double a = j / steps;
      double s = 0;
      for (std::size_t t = 0; t < d; ++t) {
        const double c = base[t] + r * v[ib][t] - q[t] + a * diff[t];
        s += c * c;
      }
      best = std::min(best, std::sqrt(s));
    }
  };

  // weights for pick[0..k-3] enumerated recursively
  auto recurse = [&](auto&& self, std::size_t level, int left) -> void {
    if (level + 2 == k) {
      eval_pair(pick[k - 2], pick[k - 1], left);
      return;
    }
    for (int w = 0; w <= left; ++w) {
      const double wt = static_cast<double>(w) / steps;
      for (std::size_t t = 0; t < d; ++t) base[t] += wt * v[pick[level]][t];
      self(self, level + 1, left - w);
      for (std::size_t t = 0; t < d; ++t) base[t] -= wt * v[pick[level]][t];
    }
  };

  std::vector<bool> sel(m, false);
  std::fill(sel.begin(), sel.begin() + static_cast<std::ptrdiff_t>(k), true);
  do {
    std::size_t c = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (sel[i]) pick[c++] = i;
    std::fill(base.begin(), base.end(), 0.0);
    recurse(recurse, 0, steps);
  } while (std::prev_permutation(sel.begin(), sel.end()));
  return best;
}

struct Vec2 {
  double x, y;
};

inline double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

/// Counter-clockwise hull (monotone chain), collinear points dropped.
inline std::vector<Vec2> hull_2d(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  if (pts.size() < 3) return pts;
  std::vector<Vec2> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i - 1]) <= 0) --k;
    h[k++] = pts[i - 1];
  }
  h.resize(k - 1);
  return h;
}

inline double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

/// Exact signed distance to a 2-D polygon hull: + outside, - inside.
inline double signed_distance_2d(const std::vector<Vec2>& pts, Vec2 q) {
  const auto h = hull_2d(pts);
  double dist = std::numeric_limits<double>::infinity();
  bool inside = h.size() >= 3;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Vec2 a = h[i], b = h[(i + 1) % h.size()];
    dist = std::min(dist, segment_distance(q, a, b));
    if (cross(a, b, q) < 0) inside = false;
  }
  return inside ? -dist : dist;
}

}  // namespace oracle
