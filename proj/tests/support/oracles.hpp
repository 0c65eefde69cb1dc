#pragma once

// Test-side oracles, independent of the library's solution paths.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>

#include "incsyn/common.hpp"

namespace oracles {

using incsyn::Matrix;
using incsyn::Vector;

// H-infinity norm of a discrete LTI system by dense frequency sweep with
// local refinement.
inline double hinfNormSweep(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                            int coarse = 4096) {
  auto gain = [&](double theta) {
    std::complex<double> q(std::cos(theta), std::sin(theta));
    Eigen::MatrixXcd M =
        q * Eigen::MatrixXcd::Identity(A.rows(), A.rows()) - A.cast<std::complex<double>>();
    Eigen::MatrixXcd T = C.cast<std::complex<double>>() *
                             M.lu().solve(B.cast<std::complex<double>>()) +
                         D.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(T);
    return svd.singularValues()(0);
  };
  double best = 0.0, best_theta = 0.0;
  for (int i = 0; i <= coarse; ++i) {
    double theta = M_PI * i / coarse;
    double g = gain(theta);
    if (g > best) {
      best = g;
      best_theta = theta;
    }
  }
  // golden-section refinement around the coarse peak
  double lo = std::max(0.0, best_theta - M_PI / coarse);
  double hi = std::min(M_PI, best_theta + M_PI / coarse);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
  double fa = gain(a), fb = gain(b);
  for (int it = 0; it < 80; ++it) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      b = lo + gr * (hi - lo);
      fb = gain(b);
    } else {
      hi = b;
      b = a;
      fb = fa;
      a = hi - gr * (hi - lo);
      fa = gain(a);
    }
  }
  return std::max(best, std::max(fa, fb));
}

// composite-trapezoid quadrature of a matrix-valued path integral
inline Matrix trapezoidPathIntegral(const std::function<Matrix(double)>& f, int points) {
  Matrix acc = 0.5 * (f(0.0) + f(1.0));
  for (int i = 1; i < points; ++i) acc += f(static_cast<double>(i) / points);
  return acc / points;
}

inline Matrix centralDiffJacobian(const std::function<Vector(const Vector&)>& fn,
                                  const Vector& at, double step = 1e-6) {
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

inline double spectralRadius(const Matrix& A) {
  return A.eigenvalues().cwiseAbs().maxCoeff();
}

// deterministic pseudo-random stable LTI systems for the LTI sanity checks
struct RandomLti {
  Matrix A, B, C, D;
};

inline RandomLti randomStableLti(incsyn::Rng& rng, int nx, int nw, int nz,
                                 double radius = 0.8) {
  auto fill = [&rng](int r, int c) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    return m;
  };
  RandomLti sys{fill(nx, nx), fill(nx, nw), fill(nz, nx), fill(nz, nw)};
  sys.A *= radius / std::max(spectralRadius(sys.A), 1e-9);
  return sys;
}

}  // namespace oracles
