#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hullrec {

/*
 * Vertex set of a convex hull in d dimensions. Caches the centroid and the
 * Gram matrix of the vertices, which the projection solver works on.
 */
class HullVertices {
 public:
  /// points is row-major, size() * dim values.
  HullVertices(std::vector<double> points, std::uint32_t dim);
  static HullVertices from_points(const std::vector<std::vector<double>>& points);

  std::size_t size() const noexcept { return count_; }
  std::uint32_t dim() const noexcept { return dim_; }
  std::span<const double> vertex(std::size_t i) const { return {points_.data() + i * dim_, dim_}; }
  std::span<const double> centroid() const noexcept { return centroid_; }
  double gram(std::size_t i, std::size_t j) const { return gram_[i * count_ + j]; }

 private:
  std::vector<double> points_;
  std::uint32_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<double> centroid_;
  std::vector<double> gram_;
};

struct HullOptions {
  double tol = 1e-7;
  /// 0 selects 10 * (vertices + dim).
  std::size_t max_iter = 0;
};

struct HullProjection {
  std::vector<double> weights;  // on the simplex, one per vertex
  std::vector<double> projected_point;
  double distance = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

struct SignedDistance {
  double value = 0.0;  // < 0 inside, > 0 outside
  bool interior = false;
};

inline constexpr double kBoundaryEps = 1e-6;
inline constexpr std::size_t kDefaultDepthDirections = 256;

/// Euclidean projection of query onto conv(vertices) by away-step Frank-Wolfe
/// over the weight simplex, stopping once the duality gap is <= tol^2.
HullProjection project_onto_hull(const HullVertices& vertices, std::span<const double> query,
                                 const HullOptions& opts = {});

bool contains(const HullVertices& vertices, std::span<const double> query, double eps = kBoundaryEps,
              const HullOptions& opts = {});

/// Upper-bound estimate of the distance from an interior query to the hull
/// boundary: min over a direction set of the support gap h(u) - u.q.
/// Throws DataError when the query is not inside the hull.
double interior_depth(const HullVertices& vertices, std::span<const double> query,
                      std::size_t directions = kDefaultDepthDirections, double eps = kBoundaryEps);

struct UnexpectednessOptions {
  double eps = kBoundaryEps;
  std::size_t directions = kDefaultDepthDirections;
  HullOptions projection;
};

/// +distance outside the hull, -interior_depth inside it.
SignedDistance signed_unexpectedness(const HullVertices& vertices, std::span<const double> item,
                                     const UnexpectednessOptions& opts = {});

/// Fixed quasi-random unit vectors (Kronecker sequence through Box-Muller).
std::vector<double> quasi_random_directions(std::uint32_t dim, std::size_t count);

}  // namespace hullrec
