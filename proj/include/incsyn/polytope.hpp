#pragma once

#include <optional>
#include <vector>

#include "incsyn/common.hpp"

namespace incsyn {

/// Convex polytope of scheduling values, stored as an explicit vertex list.
/// Every stored vertex must be an extreme point of the hull.
class SchedulingPolytope {
 public:
  SchedulingPolytope(int dimension, std::vector<Vector> vertices);

  static SchedulingPolytope interval(double lo, double hi);
  /// Axis-aligned box; vertices are the 2^n corners.
  static SchedulingPolytope box(const Vector& lo, const Vector& hi);

  int dimension() const { return dim_; }
  const std::vector<Vector>& vertices() const { return vertices_; }
  int vertexCount() const { return static_cast<int>(vertices_.size()); }

  /// Euclidean distance from rho to the hull (0 when inside).
  double distance(const Vector& rho) const;

  bool contains(const Vector& rho, double tol = 1e-9) const;

  /// Membership margin: for box-constructed polytopes the signed distance to
  /// the boundary (positive inside); otherwise -distance (0 on/inside).
  double membershipMargin(const Vector& rho) const;

  /// Componentwise clamp onto the box hull; general polytopes project to the
  /// nearest hull point.
  Vector clamp(const Vector& rho) const;

  Vector centroid() const;

  bool isBox() const { return box_lo_.has_value(); }

 private:
  void validate() const;

  int dim_;
  std::vector<Vector> vertices_;
  std::optional<Vector> box_lo_, box_hi_;
};

/// Nearest point of conv(points) to q, by enumerating candidate supporting
/// subsets (exact at desk scale; vertex counts here are tiny).
Vector nearestPointInHull(const std::vector<Vector>& points, const Vector& q);

}  // namespace incsyn
