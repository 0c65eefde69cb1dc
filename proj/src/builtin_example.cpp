#include "incsyn/builtin_example.hpp"

#include <cmath>

namespace incsyn {
namespace builtin {

namespace {
constexpr double kAlpha = 0.31830988618379067;  // 1/pi
}

double sinc(double a) { return std::abs(a) < 1e-12 ? 1.0 : std::sin(a) / a; }

NonlinearPlant sinePlant() {
  NonlinearPlant p;
  p.n_x = 2;
  p.n_w = 1;  // control input u
  p.n_z = 1;  // measured output y = x1
  p.f = [](const Vector& x, const Vector& u) {
    Vector out(2);
    out << 0.1 * x[0] - x[1], 0.9 * std::sin(x[0]) + x[1] + u[0];
    return out;
  };
  p.h = [](const Vector& x, const Vector&) {
    Vector out(1);
    out << x[0];
    return out;
  };
  p.dfdx = [](const Vector& x, const Vector&) {
    Matrix J(2, 2);
    J << 0.1, -1.0, 0.9 * std::cos(x[0]), 1.0;
    return J;
  };
  p.dfdw = [](const Vector&, const Vector&) {
    Matrix J(2, 1);
    J << 0.0, 1.0;
    return J;
  };
  p.dhdx = [](const Vector&, const Vector&) {
    Matrix J(1, 2);
    J << 1.0, 0.0;
    return J;
  };
  p.dhdw = [](const Vector&, const Vector&) { return Matrix::Zero(1, 1); };
  p.state_region = Region::all(2);
  p.state_samples = Region::box(Vector::Constant(2, -4.0), Vector::Constant(2, 4.0));
  p.input_region = Region::all(1);
  p.input_samples = Region::box(Vector::Constant(1, -3.0), Vector::Constant(1, 3.0));
  return p;
}

SchedulingMap differentialScheduling() {
  SchedulingMap m;
  m.state_dim = 2;
  m.rho_dim = 1;
  m.psi = [](const Vector& x) {
    Vector rho(1);
    rho << std::cos(x[0]);
    return rho;
  };
  m.target = SchedulingPolytope::interval(-1.0, 1.0);
  m.region = Region::all(2);
  m.sampling_box = Region::box(Vector::Constant(2, -4.0), Vector::Constant(2, 4.0));
  // integral of cos along the segment in the first coordinate
  m.segment_average = [](const Vector& a, const Vector& b) {
    Vector rho(1);
    double d = b[0] - a[0];
    rho << (std::abs(d) < 1e-9 ? std::cos(0.5 * (a[0] + b[0]))
                               : (std::sin(b[0]) - std::sin(a[0])) / d);
    return rho;
  };
  return m;
}

AffineMatrixFunction differentialEmbeddingA() {
  Matrix A0(2, 2), A1(2, 2);
  A0 << 0.1, -1.0, 0.0, 1.0;
  A1 << 0.0, 0.0, 0.9, 0.0;
  return AffineMatrixFunction(A0, {A1});
}

SchedulingMap standardScheduling() {
  SchedulingMap m;
  m.state_dim = 2;
  m.rho_dim = 1;
  m.psi = [](const Vector& x) {
    Vector rho(1);
    rho << sinc(x[0]);
    return rho;
  };
  m.target = SchedulingPolytope::interval(-0.22, 1.0);
  m.region = Region::all(2);
  m.sampling_box = Region::box(Vector::Constant(2, -4.0), Vector::Constant(2, 4.0));
  return m;
}

AffineMatrixFunction standardEmbeddingA() { return differentialEmbeddingA(); }

WeightingScheme trackingWeights(double integrator_eps) {
  WeightingScheme w;
  w.error_weight = TransferFunction({0.2, -0.1}, {1.0, kAlpha});  // 0.2(q-0.5)/(q+a)
  w.reference_model = TransferFunction({1.0, kAlpha}, {1.0, -1.0});  // (q+a)/(q-1)
  w.control_weight = TransferFunction::gain(0.2);
  w.integrator_eps = integrator_eps;
  return w;
}

namespace {

GeneralizedPlant build(const SchedulingMap& psi, const AffineMatrixFunction& A_emb,
                       double eps) {
  EmbeddedPlant ep{sinePlant(), psi, A_emb};
  GeneralizedPlant gp = buildGeneralizedPlant(ep, trackingWeights(eps));
  // exact steady-state inversion:
  //   x1*_k = r_k, x2*_k = 0.1 r_k - r_{k+1},
  //   u*_k = x2*_{k+1} - x2*_k - 0.9 sin(r_k), weight states 0
  const int nx = gp.n_x;
  gp.feedforward_lookahead = 2;
  gp.exact_feedforward = [nx](const std::vector<double>& refs) {
    if (refs.size() < 3) throw Error("exact feedforward needs two steps of lookahead");
    const int H = static_cast<int>(refs.size()) - 2;
    std::vector<FeedforwardPoint> pts;
    auto x2s = [&refs](int k) { return 0.1 * refs[k] - refs[k + 1]; };
    for (int k = 0; k <= H; ++k) {
      FeedforwardPoint p;
      p.x = Vector::Zero(nx);
      p.x[0] = refs[k];
      p.x[1] = x2s(k);
      p.u = Vector::Zero(1);
      if (k < H) p.u[0] = x2s(k + 1) - x2s(k) - 0.9 * std::sin(refs[k]);
      pts.push_back(p);
    }
    return pts;
  };
  return gp;
}

}  // namespace

GeneralizedPlant generalizedPlant(double integrator_eps) {
  return build(differentialScheduling(), differentialEmbeddingA(), integrator_eps);
}

AffineLpvStateSpace standardComparatorModel(double integrator_eps) {
  // Identical affine blocks; rho is reinterpreted as sinc(x1) over its range.
  AffineLpvStateSpace m = generalizedPlant(integrator_eps).embedding;
  m.polytope = standardScheduling().target;
  return m;
}

SchedulingMap standardSchedulingLifted(int gp_state_dim) {
  SchedulingMap m = standardScheduling();
  m.state_dim = gp_state_dim;
  m.psi = [](const Vector& x) {
    Vector rho(1);
    rho << sinc(x[0]);
    return rho;
  };
  m.region = Region::all(gp_state_dim);
  return m;
}

}  // namespace builtin
}  // namespace incsyn
