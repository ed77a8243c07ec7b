#include "hullrec/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "hullrec/error.hpp"

namespace hullrec {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Minimizes |V_A w - q|^2 subject to sum w = 1 over the active vertices
// (affine hull, weights may go negative). False when the KKT system is singular.
bool solve_affine(const HullVertices& h, const std::vector<double>& b, const std::vector<std::size_t>& active,
                       std::vector<double>& w_active) {
  const std::size_t k = active.size();
  const std::size_t n = k + 1;
  std::vector<double> a(n * (n + 1), 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * (n + 1) + c]; };
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) at(r, c) = h.gram(active[r], active[c]);
    at(r, k) = 1.0;
    at(r, n) = b[active[r]];
    at(k, r) = 1.0;
  }
  at(k, n) = 1.0;
  double scale = 0.0;
  for (std::size_t r = 0; r < k; ++r) scale = std::max(scale, std::abs(at(r, r)));
  const double tiny = 1e-12 * std::max(scale, 1.0);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(at(r, c)) > std::abs(at(piv, c))) piv = r;
    if (std::abs(at(piv, c)) <= tiny) return false;
    if (piv != c)
      for (std::size_t j = 0; j <= n; ++j) std::swap(at(c, j), at(piv, j));
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = at(r, c) / at(c, c);
      if (f == 0.0) continue;
      for (std::size_t j = c; j <= n; ++j) at(r, j) -= f * at(c, j);
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double v = at(r, n);
    for (std::size_t j = r + 1; j < n; ++j) v -= at(r, j) * x[j];
    x[r] = v / at(r, r);
  }
  w_active.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k));
  for (double wi : w_active)
    if (!std::isfinite(wi)) return false;
  return true;
}

double objective(const HullVertices& h, const std::vector<double>& b, const std::vector<double>& w) {
  // 0.5 |Vw|^2 - w.b, i.e. the distance objective minus 0.5 |q|^2
  double f = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    double hv = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) hv += h.gram(i, j) * w[j];
    f += w[i] * (0.5 * hv - b[i]);
  }
  return f;
}

/*
 * Active-set finish (minimum-norm-point corrals) from weights w. Returns
 * true once the duality gap is below gap_tol; w is left at the last
 * feasible iterate either way.
 */
bool active_set_finish(const HullVertices& h, const std::vector<double>& b, std::vector<double>& w,
                       std::vector<std::size_t> active, double gap_tol, std::size_t max_major) {
  const std::size_t m = h.size();
  std::vector<double> hv(m), y;
  for (std::size_t major = 0; major < max_major; ++major) {
    // Minor cycle: move to the affine minimizer of the corral, dropping
    // vertices whose weight would turn negative.
    for (std::size_t minor = 0; minor <= m; ++minor) {
      if (!solve_affine(h, b, active, y)) return false;
      double theta = 1.0;
      std::size_t drop = active.size();
      for (std::size_t j = 0; j < active.size(); ++j) {
        if (y[j] >= 0.0) continue;
        const double wj = w[active[j]];
        const double t = wj / (wj - y[j]);
        if (t < theta) theta = t, drop = j;
      }
      for (std::size_t j = 0; j < active.size(); ++j) w[active[j]] += theta * (y[j] - w[active[j]]);
      if (drop == active.size()) break;
      w[active[drop]] = 0.0;
      std::vector<std::size_t> kept;
      for (std::size_t v : active) {
        if (w[v] > 0.0)
          kept.push_back(v);
        else
          w[v] = 0.0;
      }
      active = std::move(kept);
    }

    std::fill(hv.begin(), hv.end(), 0.0);
    for (std::size_t j : active)
      for (std::size_t i = 0; i < m; ++i) hv[i] += h.gram(i, j) * w[j];
    double gx = 0.0, gs = std::numeric_limits<double>::infinity();
    std::size_t s = 0;
    for (std::size_t j : active) gx += w[j] * (hv[j] - b[j]);
    for (std::size_t i = 0; i < m; ++i) {
      if (hv[i] - b[i] < gs) {
        gs = hv[i] - b[i];
        s = i;
      }
    }
    if (gx - gs <= gap_tol) return true;
    if (std::find(active.begin(), active.end(), s) != active.end()) return false;
    active.push_back(s);
  }
  return false;
}

void check_query(const HullVertices& h, std::span<const double> q) {
  if (q.size() != h.dim())
    throw DataError("dimension mismatch: hull has dim " + std::to_string(h.dim()) + ", query has " +
                    std::to_string(q.size()));
}

// Support gap h(u) - u.q for a unit direction u.
double support_gap(const HullVertices& h, std::span<const double> u, double uq) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < h.size(); ++i) best = std::max(best, dot(u, h.vertex(i)));
  return best - uq;
}

// Normal of the hyperplane through the vertices that score highest along u,
// oriented with u. Empty when u lies in the span of their edges.
std::vector<double> fitted_facet_normal(const HullVertices& h, std::span<const double> u) {
  const std::size_t d = h.dim();
  const std::size_t m = h.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> score(m);
  for (std::size_t i = 0; i < m; ++i) score[i] = dot(u, h.vertex(i));
  const std::size_t k = std::min<std::size_t>(d, m);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) { return score[a] > score[b] || (score[a] == score[b] && a < b); });

  // Orthonormal basis of the edge directions from the top vertex.
  std::vector<std::vector<double>> basis;
  auto anchor = h.vertex(order[0]);
  for (std::size_t j = 1; j < k; ++j) {
    auto vj = h.vertex(order[j]);
    std::vector<double> e(d);
    for (std::size_t c = 0; c < d; ++c) e[c] = vj[c] - anchor[c];
    const double scale = std::sqrt(dot(e, e));
    if (scale == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const double p = dot(e, b);
        for (std::size_t c = 0; c < d; ++c) e[c] -= p * b[c];
      }
    const double len = std::sqrt(dot(e, e));
    if (len <= 1e-10 * scale) continue;
    for (double& x : e) x /= len;
    basis.push_back(std::move(e));
  }

  std::vector<double> n(u.begin(), u.end());
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) {
      const double p = dot(n, b);
      for (std::size_t c = 0; c < d; ++c) n[c] -= p * b[c];
    }
  const double len = std::sqrt(dot(n, n));
  if (len <= 1e-12) return {};
  for (double& x : n) x /= len;
  return n;
}

double depth_estimate(const HullVertices& h, std::span<const double> q, std::size_t directions) {
  const std::size_t d = h.dim();
  struct Candidate {
    double gap;
    std::vector<double> dir;
  };
  std::vector<Candidate> found;
  auto consider = [&](std::vector<double> u) {
    const double len = std::sqrt(dot(u, u));
    if (!(len > 1e-12)) return;
    for (double& x : u) x /= len;
    const double gap = support_gap(h, u, dot(u, q));
    found.push_back({gap, std::move(u)});
  };

  for (std::size_t i = 0; i < h.size(); ++i) {
    std::vector<double> u(d);
    auto v = h.vertex(i);
    for (std::size_t c = 0; c < d; ++c) u[c] = v[c] - q[c];
    consider(std::move(u));
  }
  {
    std::vector<double> u(d);
    auto cen = h.centroid();
    for (std::size_t c = 0; c < d; ++c) u[c] = q[c] - cen[c];
    consider(std::move(u));
  }
  const auto dirs = quasi_random_directions(static_cast<std::uint32_t>(d), directions);
  for (std::size_t k = 0; k < directions; ++k)
    consider(std::vector<double>(dirs.begin() + static_cast<std::ptrdiff_t>(k * d),
                                 dirs.begin() + static_cast<std::ptrdiff_t>((k + 1) * d)));
  if (found.empty()) return 0.0;

  // Polish the best few directions by snapping them to the normal of the
  // hyperplane through their top-scoring vertices.
  std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) { return a.gap < b.gap; });
  double best = found.front().gap;
  const std::size_t starts = std::min<std::size_t>(4, found.size());
  for (std::size_t s = 0; s < starts; ++s) {
    std::vector<double> u = found[s].dir;
    double cur = found[s].gap;
    for (int round = 0; round < 3; ++round) {
      auto n = fitted_facet_normal(h, u);
      if (n.empty()) break;
      const double gap = support_gap(h, n, dot(n, q));
      if (!(gap < cur)) break;
      cur = gap;
      u = std::move(n);
    }
    best = std::min(best, cur);
  }
  return std::max(0.0, best);
}

}  // namespace

HullVertices::HullVertices(std::vector<double> points, std::uint32_t dim) : points_(std::move(points)), dim_(dim) {
  if (dim_ == 0) throw DataError("hull dimension must be >= 1");
  if (points_.empty()) throw DataError("hull vertex set is empty");
  if (points_.size() % dim_ != 0) throw DataError("hull point buffer is not a multiple of dim");
  count_ = points_.size() / dim_;
  for (double x : points_)
    if (!std::isfinite(x)) throw NumericError("hull vertex has a non-finite coordinate");

  centroid_.assign(dim_, 0.0);
  for (std::size_t i = 0; i < count_; ++i)
    for (std::size_t c = 0; c < dim_; ++c) centroid_[c] += points_[i * dim_ + c];
  for (double& x : centroid_) x /= static_cast<double>(count_);

  gram_.assign(count_ * count_, 0.0);
  for (std::size_t i = 0; i < count_; ++i)
    for (std::size_t j = i; j < count_; ++j) {
      const double g = dot(vertex(i), vertex(j));
      gram_[i * count_ + j] = g;
      gram_[j * count_ + i] = g;
    }
}

HullVertices HullVertices::from_points(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw DataError("hull vertex set is empty");
  const std::size_t d = points.front().size();
  std::vector<double> flat;
  flat.reserve(points.size() * d);
  for (const auto& p : points) {
    if (p.size() != d) throw DataError("hull vertices must share one dimension");
    flat.insert(flat.end(), p.begin(), p.end());
  }
  return HullVertices(std::move(flat), static_cast<std::uint32_t>(d));
}

HullProjection project_onto_hull(const HullVertices& h, std::span<const double> q, const HullOptions& opts) {
  check_query(h, q);
  if (!(opts.tol > 0.0)) throw ConfigError("hull tolerance must be > 0");
  const std::size_t m = h.size();
  const std::size_t d = h.dim();
  const std::size_t max_iter = opts.max_iter ? opts.max_iter : 10 * (m + d);
  const double gap_tol = opts.tol * opts.tol;

  // f(w) = 0.5 |V w - q|^2.  b_i = v_i.q, hv_i = v_i.x with x = V w,
  // so the gradient is hv - b and |x|^2 = w.hv.
  std::vector<double> b(m);
  for (std::size_t i = 0; i < m; ++i) b[i] = dot(h.vertex(i), q);

  std::size_t start = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double d2 = h.gram(i, i) - 2.0 * b[i];
    if (d2 < best) {
      best = d2;
      start = i;
    }
  }

  std::vector<double> w(m, 0.0);
  w[start] = 1.0;
  std::vector<std::size_t> active{start};
  std::vector<double> hv(m);
  for (std::size_t i = 0; i < m; ++i) hv[i] = h.gram(i, start);
  double xx = h.gram(start, start);

  auto refresh = [&] {
    std::fill(hv.begin(), hv.end(), 0.0);
    for (std::size_t j : active)
      for (std::size_t i = 0; i < m; ++i) hv[i] += h.gram(i, j) * w[j];
    xx = 0.0;
    for (std::size_t j : active) xx += w[j] * hv[j];
  };

  HullProjection result;
  std::size_t iter = 0;
  for (;; ++iter) {
    if (iter > 0 && iter % 64 == 0) refresh();

    std::size_t s = 0;
    double gs = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double gi = hv[i] - b[i];
      if (gi < gs) {
        gs = gi;
        s = i;
      }
    }
    double gx = 0.0;
    std::size_t a = active.front();
    double ga = -std::numeric_limits<double>::infinity();
    for (std::size_t j : active) {
      const double gj = hv[j] - b[j];
      gx += w[j] * gj;
      if (gj > ga) {
        ga = gj;
        a = j;
      }
    }
    const double fw_gap = gx - gs;
    if (fw_gap <= gap_tol) {
      result.converged = true;
      break;
    }
    if (iter >= max_iter) break;

    const double away_gap = ga - gx;
    if (fw_gap >= away_gap || active.size() == 1) {
      // Toward vertex s.
      const double slope = gs - gx;
      const double curv = h.gram(s, s) - 2.0 * hv[s] + xx;
      double gamma = curv > 0.0 ? std::min(1.0, -slope / curv) : 1.0;
      gamma = std::max(0.0, gamma);
      const double xd = hv[s] - xx;
      for (std::size_t j : active) w[j] *= 1.0 - gamma;
      if (w[s] == 0.0 && gamma > 0.0) active.push_back(s);
      w[s] += gamma;
      for (std::size_t i = 0; i < m; ++i) hv[i] = (1.0 - gamma) * hv[i] + gamma * h.gram(i, s);
      xx += 2.0 * gamma * xd + gamma * gamma * curv;
      if (gamma >= 1.0) {
        std::fill(w.begin(), w.end(), 0.0);
        w[s] = 1.0;
        active.assign(1, s);
      }
    } else {
      // Away from vertex a.
      const double wa = w[a];
      const double gamma_max = wa / (1.0 - wa);
      const double slope = gx - ga;
      const double curv = xx - 2.0 * hv[a] + h.gram(a, a);
      double gamma = curv > 0.0 ? std::min(gamma_max, -slope / curv) : gamma_max;
      gamma = std::max(0.0, gamma);
      const double xd = xx - hv[a];
      for (std::size_t j : active) w[j] *= 1.0 + gamma;
      w[a] -= gamma;
      for (std::size_t i = 0; i < m; ++i) hv[i] = (1.0 + gamma) * hv[i] - gamma * h.gram(i, a);
      xx += 2.0 * gamma * xd + gamma * gamma * curv;
      if (gamma >= gamma_max) {
        w[a] = 0.0;
        active.erase(std::find(active.begin(), active.end(), a));
      }
    }
  }

  // Iteration cap reached: finish with an active-set method and keep it if it
  // does no worse.
  if (!result.converged) {
    auto w2 = w;
    std::vector<std::size_t> start = active;
    if (start.size() > d + 1) {
      const auto top = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
      std::fill(w2.begin(), w2.end(), 0.0);
      w2[top] = 1.0;
      start.assign(1, top);
    }
    bool done = active_set_finish(h, b, w2, start, gap_tol, max_iter);
    if (!done && start.size() > 1) {
      // The FW support may be affinely dependent; restart from its heaviest vertex.
      const auto top = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
      std::fill(w2.begin(), w2.end(), 0.0);
      w2[top] = 1.0;
      done = active_set_finish(h, b, w2, {top}, gap_tol, max_iter);
    }
    if (objective(h, b, w2) <= objective(h, b, w)) {
      w = std::move(w2);
      result.converged = done;
    }
  }

  // Clean up rounding and renormalize onto the simplex.
  double total = 0.0;
  for (double& x : w) {
    if (x < 0.0) x = 0.0;
    total += x;
  }
  for (double& x : w) x /= total;

  result.iterations = iter;
  result.projected_point.assign(d, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (w[i] == 0.0) continue;
    auto v = h.vertex(i);
    for (std::size_t c = 0; c < d; ++c) result.projected_point[c] += w[i] * v[c];
  }
  double dist2 = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double diff = q[c] - result.projected_point[c];
    dist2 += diff * diff;
  }
  result.distance = std::sqrt(dist2);
  result.weights = std::move(w);
  return result;
}

bool contains(const HullVertices& h, std::span<const double> q, double eps, const HullOptions& opts) {
  return project_onto_hull(h, q, opts).distance <= eps;
}

double interior_depth(const HullVertices& h, std::span<const double> q, std::size_t directions, double eps) {
  check_query(h, q);
  if (!contains(h, q, eps)) throw DataError("interior_depth requires a query inside the hull");
  return depth_estimate(h, q, directions);
}

SignedDistance signed_unexpectedness(const HullVertices& h, std::span<const double> item,
                                     const UnexpectednessOptions& opts) {
  check_query(h, item);
  const auto proj = project_onto_hull(h, item, opts.projection);
  if (proj.distance > opts.eps) return {proj.distance, false};
  return {-depth_estimate(h, item, opts.directions), true};
}

std::vector<double> quasi_random_directions(std::uint32_t dim, std::size_t count) {
  // Additive recurrence with the generalized golden ratio in an even number
  // of dimensions; pairs of coordinates become normals via Box-Muller.
  const std::size_t pairs = (dim + 1) / 2;
  const std::size_t dd = 2 * pairs;
  double phi = 2.0;
  for (int it = 0; it < 60; ++it) phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(dd + 1));
  std::vector<double> alpha(dd);
  for (std::size_t j = 0; j < dd; ++j) alpha[j] = std::fmod(std::pow(1.0 / phi, static_cast<double>(j + 1)), 1.0);

  std::vector<double> out(count * dim);
  std::vector<double> z(dd);
  for (std::size_t n = 0; n < count; ++n) {
    for (std::size_t p = 0; p < pairs; ++p) {
      double u1 = std::fmod(0.5 + static_cast<double>(n + 1) * alpha[2 * p], 1.0);
      double u2 = std::fmod(0.5 + static_cast<double>(n + 1) * alpha[2 * p + 1], 1.0);
      u1 = std::max(u1, 1e-300);
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double theta = 2.0 * std::numbers::pi * u2;
      z[2 * p] = r * std::cos(theta);
      z[2 * p + 1] = r * std::sin(theta);
    }
    double len = 0.0;
    for (std::size_t c = 0; c < dim; ++c) len += z[c] * z[c];
    len = std::sqrt(len);
    if (len == 0.0) {
      z.assign(dd, 0.0);
      z[0] = len = 1.0;
    }
    for (std::size_t c = 0; c < dim; ++c) out[n * dim + c] = z[c] / len;
  }
  return out;
}

}  // namespace hullrec
