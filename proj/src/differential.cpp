#include "incsyn/differential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace incsyn {

Region Region::box(const Vector& lo, const Vector& hi) {
  if (lo.size() != hi.size()) throw DimensionError("Region::box: lo/hi dimension mismatch");
  for (int i = 0; i < lo.size(); ++i)
    if (!(lo[i] <= hi[i])) throw Error("Region::box: lo must not exceed hi");
  Region r;
  r.lo = lo;
  r.hi = hi;
  r.dim_hint = static_cast<int>(lo.size());
  return r;
}

bool Region::contains(const Vector& x, double tol) const {
  if (!lo) return true;
  if (x.size() != lo->size()) throw DimensionError("Region::contains: dimension mismatch");
  for (int i = 0; i < x.size(); ++i)
    if (x[i] < (*lo)[i] - tol || x[i] > (*hi)[i] + tol) return false;
  return true;
}

Region NonlinearPlant::samplingStateBox() const {
  if (state_region.isBounded()) return state_region;
  if (state_samples && state_samples->isBounded()) return *state_samples;
  throw Error("plant state region is unbounded and no sampling box was declared");
}

Region NonlinearPlant::samplingInputBox() const {
  if (input_region.isBounded()) return input_region;
  if (input_samples && input_samples->isBounded()) return *input_samples;
  throw Error("plant input region is unbounded and no sampling box was declared");
}

Region SchedulingMap::samplingBox() const {
  if (region.isBounded()) return region;
  if (sampling_box && sampling_box->isBounded()) return *sampling_box;
  throw Error("embedding region is unbounded and no sampling box was declared");
}

DifferentialForm differentialFormAt(const NonlinearPlant& plant, const Vector& x,
                                    const Vector& w) {
  if (x.size() != plant.n_x || w.size() != plant.n_w)
    throw DimensionError("differentialFormAt: point dimension mismatch");
  if (!plant.state_region.contains(x) || !plant.input_region.contains(w))
    throw Error("differentialFormAt: point outside the declared region");
  return DifferentialForm{plant.dfdx(x, w), plant.dfdw(x, w), plant.dhdx(x, w),
                          plant.dhdw(x, w)};
}

Vector haltonPoint(int index, const Region& box) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  if (!box.isBounded()) throw Error("haltonPoint: box must be bounded");
  const int d = box.dimension();
  if (d > static_cast<int>(sizeof(primes) / sizeof(primes[0])))
    throw Error("haltonPoint: dimension too large");
  Vector out(d);
  for (int k = 0; k < d; ++k) {
    const int base = primes[k];
    double f = 1.0, r = 0.0;
    int i = index + 1;  // skip the all-zero point
    while (i > 0) {
      f /= base;
      r += f * (i % base);
      i /= base;
    }
    out[k] = (*box.lo)[k] + r * ((*box.hi)[k] - (*box.lo)[k]);
  }
  return out;
}

namespace {

Matrix centralDiffJacobian(const std::function<Vector(const Vector&)>& fn, const Vector& at,
                           double step) {
  Vector f0 = fn(at);
  Matrix J(f0.size(), at.size());
  for (int j = 0; j < at.size(); ++j) {
    Vector hi = at, lo = at;
    hi[j] += step;
    lo[j] -= step;
    J.col(j) = (fn(hi) - fn(lo)) / (2.0 * step);
  }
  return J;
}

double relErr(const Matrix& got, const Matrix& want) {
  double scale = std::max(1.0, maxAbs(want));
  return maxAbs(got - want) / scale;
}

}  // namespace

JacobianReport validateJacobians(const NonlinearPlant& plant, int samples, double fd_step,
                                 double rel_tol) {
  Region xs = plant.samplingStateBox();
  Region ws = plant.samplingInputBox();
  JacobianReport rep;
  rep.samples = samples;
  for (int s = 0; s < samples; ++s) {
    Vector x = haltonPoint(s, xs);
    Vector w = haltonPoint(s, ws);
    auto fx = [&](const Vector& xv) { return plant.f(xv, w); };
    auto fw = [&](const Vector& wv) { return plant.f(x, wv); };
    auto hx = [&](const Vector& xv) { return plant.h(xv, w); };
    auto hw = [&](const Vector& wv) { return plant.h(x, wv); };
    double e = relErr(plant.dfdx(x, w), centralDiffJacobian(fx, x, fd_step));
    e = std::max(e, relErr(plant.dfdw(x, w), centralDiffJacobian(fw, w, fd_step)));
    e = std::max(e, relErr(plant.dhdx(x, w), centralDiffJacobian(hx, x, fd_step)));
    e = std::max(e, relErr(plant.dhdw(x, w), centralDiffJacobian(hw, w, fd_step)));
    rep.max_rel_error = std::max(rep.max_rel_error, e);
  }
  rep.pass = rep.max_rel_error <= rel_tol;
  if (!rep.pass)
    rep.detail = "finite-difference disagreement " + std::to_string(rep.max_rel_error);
  return rep;
}

EmbeddingReport validateEmbedding(const NonlinearPlant& plant, const SchedulingMap& map,
                                  const AffineLpvStateSpace& candidate, int samples,
                                  double tol) {
  EmbeddingReport rep;
  rep.samples = samples;
  rep.sampling_based_only = !map.region.isBounded();
  rep.worst_membership_margin = std::numeric_limits<double>::infinity();
  Region box = map.samplingBox();
  Region wbox = plant.samplingInputBox();
  for (int s = 0; s < samples; ++s) {
    Vector x = haltonPoint(s, box);
    Vector w = haltonPoint(s, wbox);
    Vector rho = map.psi(x);
    DifferentialForm d = differentialFormAt(plant, x, w);
    rep.max_error_A = std::max(rep.max_error_A, maxAbs(candidate.A.evaluate(rho) - d.A));
    rep.max_error_C = std::max(rep.max_error_C, maxAbs(candidate.C.evaluate(rho) - d.C));
    double margin = map.target.membershipMargin(rho);
    rep.worst_membership_margin = std::min(rep.worst_membership_margin, margin);
    if (margin < -1e-12) rep.scheduling_in_polytope = false;
  }
  rep.pass = rep.max_error_A <= tol && rep.max_error_C <= tol && rep.scheduling_in_polytope;
  if (!rep.pass)
    rep.detail = "max |A| error " + std::to_string(rep.max_error_A) + ", max |C| error " +
                 std::to_string(rep.max_error_C) +
                 (rep.scheduling_in_polytope ? "" : ", psi left the polytope");
  return rep;
}

}  // namespace incsyn
