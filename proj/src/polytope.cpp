#include "incsyn/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace incsyn {
namespace {

// Barycentric least squares over one candidate subset; returns the projection
// if the KKT conditions hold (all weights nonnegative, gradient orthogonal to
// the active face).
std::optional<Vector> projectOnSubset(const std::vector<Vector>& pts,
                                      const std::vector<int>& subset, const Vector& q) {
  const int k = static_cast<int>(subset.size());
  const int d = static_cast<int>(q.size());
  if (k == 1) return pts[subset[0]];
  // minimize ||sum l_i p_i - q||^2 with sum l_i = 1 -> affine least squares
  Matrix A(d, k - 1);
  const Vector& p0 = pts[subset[0]];
  for (int i = 1; i < k; ++i) A.col(i - 1) = pts[subset[i]] - p0;
  Vector rhs = q - p0;
  Vector t = (A.transpose() * A).ldlt().solve(A.transpose() * rhs);
  Vector lambda(k);
  lambda[0] = 1.0 - t.sum();
  for (int i = 1; i < k; ++i) lambda[i] = t[i - 1];
  if ((lambda.array() < -1e-12).any()) return std::nullopt;
  Vector proj = p0 + A * t;
  return proj;
}

}  // namespace

Vector nearestPointInHull(const std::vector<Vector>& points, const Vector& q) {
  if (points.empty()) throw Error("nearestPointInHull: empty point set");
  const int d = static_cast<int>(q.size());
  const int n = static_cast<int>(points.size());
  double best = std::numeric_limits<double>::infinity();
  Vector best_p = points[0];
  // enumerate supporting subsets up to dimension+1 points
  const int max_k = std::min(n, d + 1);
  std::vector<int> subset;
  auto consider = [&](const std::vector<int>& s) {
    auto proj = projectOnSubset(points, s, q);
    if (!proj) return;
    double dist = (*proj - q).norm();
    if (dist < best) {
      best = dist;
      best_p = *proj;
    }
  };
  // iterative subset enumeration
  std::vector<int> stack;
  std::function<void(int, int)> rec = [&](int start, int k) {
    if (k == 0) {
      consider(stack);
      return;
    }
    for (int i = start; i <= n - k; ++i) {
      stack.push_back(i);
      rec(i + 1, k - 1);
      stack.pop_back();
    }
  };
  for (int k = 1; k <= max_k; ++k) rec(0, k);
  return best_p;
}

SchedulingPolytope::SchedulingPolytope(int dimension, std::vector<Vector> vertices)
    : dim_(dimension), vertices_(std::move(vertices)) {
  validate();
}

SchedulingPolytope SchedulingPolytope::interval(double lo, double hi) {
  Vector l(1), h(1);
  l << lo;
  h << hi;
  return box(l, h);
}

SchedulingPolytope SchedulingPolytope::box(const Vector& lo, const Vector& hi) {
  const int d = static_cast<int>(lo.size());
  if (hi.size() != d) throw DimensionError("polytope box: lo/hi dimension mismatch");
  for (int i = 0; i < d; ++i)
    if (!(lo[i] < hi[i])) throw Error("polytope box: lo must be strictly below hi");
  std::vector<Vector> verts;
  const int corners = 1 << d;
  verts.reserve(corners);
  for (int mask = 0; mask < corners; ++mask) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = (mask >> i) & 1 ? hi[i] : lo[i];
    verts.push_back(v);
  }
  SchedulingPolytope p(d, std::move(verts));
  p.box_lo_ = lo;
  p.box_hi_ = hi;
  return p;
}

void SchedulingPolytope::validate() const {
  if (dim_ <= 0) throw Error("polytope: dimension must be positive");
  if (vertices_.empty()) throw Error("polytope: needs at least one vertex");
  for (const Vector& v : vertices_)
    if (v.size() != dim_) throw DimensionError("polytope: vertex dimension mismatch");
  // extreme-point check: no vertex inside the hull of the others
  if (vertices_.size() > 1) {
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      std::vector<Vector> others;
      for (std::size_t j = 0; j < vertices_.size(); ++j)
        if (j != i) others.push_back(vertices_[j]);
      double dist = (nearestPointInHull(others, vertices_[i]) - vertices_[i]).norm();
      if (dist < 1e-12)
        throw Error("polytope: vertex " + std::to_string(i) +
                    " lies in the convex hull of the others");
    }
  }
}

double SchedulingPolytope::distance(const Vector& rho) const {
  if (rho.size() != dim_) throw DimensionError("polytope distance: dimension mismatch");
  if (box_lo_) {
    double d2 = 0.0;
    for (int i = 0; i < dim_; ++i) {
      double lo = (*box_lo_)[i], hi = (*box_hi_)[i];
      double e = rho[i] < lo ? lo - rho[i] : (rho[i] > hi ? rho[i] - hi : 0.0);
      d2 += e * e;
    }
    return std::sqrt(d2);
  }
  return (nearestPointInHull(vertices_, rho) - rho).norm();
}

bool SchedulingPolytope::contains(const Vector& rho, double tol) const {
  return distance(rho) <= tol;
}

double SchedulingPolytope::membershipMargin(const Vector& rho) const {
  if (box_lo_) {
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim_; ++i)
      margin = std::min(margin, std::min(rho[i] - (*box_lo_)[i], (*box_hi_)[i] - rho[i]));
    return margin;
  }
  return -distance(rho);
}

Vector SchedulingPolytope::clamp(const Vector& rho) const {
  if (box_lo_) {
    Vector out = rho;
    for (int i = 0; i < dim_; ++i) out[i] = std::clamp(rho[i], (*box_lo_)[i], (*box_hi_)[i]);
    return out;
  }
  return nearestPointInHull(vertices_, rho);
}

Vector SchedulingPolytope::centroid() const {
  Vector c = Vector::Zero(dim_);
  for (const Vector& v : vertices_) c += v;
  return c / static_cast<double>(vertices_.size());
}

}  // namespace incsyn
