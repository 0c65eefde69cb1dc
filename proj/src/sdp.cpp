#include "incsyn/sdp.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace incsyn {

std::string toString(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

double SdpSolution::minConstraintEig() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& [name, eig] : constraint_min_eigs) {
    (void)name;
    m = std::min(m, eig);
  }
  return m;
}

namespace {

struct Constraint {
  Matrix F0;  // already shifted by -delta_feas * I
  std::vector<std::pair<int, Matrix>> coeffs;

  Matrix evaluate(const Vector& y) const {
    Matrix F = F0;
    for (const auto& [i, M] : coeffs) F += y[i] * M;
    return F;
  }
};

struct Problem {
  int nvar = 0;
  std::vector<Constraint> cons;
  std::optional<Vector> c;

  int barrierDegree() const {
    int nu = 0;
    for (const Constraint& k : cons) nu += static_cast<int>(k.F0.rows());
    return nu;
  }
};

std::optional<Eigen::LLT<Matrix>> tryChol(const Matrix& F) {
  Eigen::LLT<Matrix> llt(F);
  if (llt.info() != Eigen::Success) return std::nullopt;
  return llt;
}

std::optional<double> barrierValue(const Problem& p, const Vector& y) {
  double val = 0.0;
  for (const Constraint& k : p.cons) {
    auto llt = tryChol(k.evaluate(y));
    if (!llt) return std::nullopt;
    const Matrix& L = llt->matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i) val -= 2.0 * std::log(L(i, i));
  }
  return val;
}

// Newton descent on phi(y) = t * c'y + barrier(y). The iterate must enter
// strictly feasible; it stays in the cone. Damped steps alpha = 1/(1+lambda).
// An optional stop predicate ends the descent early (phase 1 uses it to bail
// out as soon as strict feasibility is reached, before the free variables can
// drift along recession directions).
bool center(const Problem& p, Vector& y, double t, const SdpOptions& opts,
            const std::function<bool(const Vector&)>& stop = nullptr) {
  const int n = p.nvar;
  if (stop && stop(y)) return true;
  Vector tc = Vector::Zero(n);
  if (p.c) tc = t * (*p.c);
  for (int iter = 0; iter < opts.max_newton; ++iter) {
    Vector g = tc;
    Matrix H = Matrix::Zero(n, n);
    for (const Constraint& k : p.cons) {
      Matrix F = k.evaluate(y);
      auto llt = tryChol(F);
      if (!llt) return false;  // left the cone: caller bug or overflow
      const auto& L = llt->matrixL();
      std::vector<Matrix> W;
      W.reserve(k.coeffs.size());
      for (const auto& [idx, Fi] : k.coeffs) {
        Matrix Z = L.solve(Fi);
        Matrix Wi = L.solve(Z.transpose()).transpose();  // L^-1 Fi L^-T
        g[idx] -= Wi.trace();
        W.push_back(std::move(Wi));
      }
      for (std::size_t a = 0; a < k.coeffs.size(); ++a) {
        const int ia = k.coeffs[a].first;
        for (std::size_t b = a; b < k.coeffs.size(); ++b) {
          const int ib = k.coeffs[b].first;
          double v = (W[a].array() * W[b].array()).sum();
          H(ia, ib) += v;
          if (ia != ib) H(ib, ia) += v;
        }
      }
    }
    // Jacobi equilibration keeps the Newton solve usable when variable
    // scales differ by many orders of magnitude.
    Vector d(n);
    for (int i = 0; i < n; ++i) d[i] = 1.0 / std::sqrt(std::max(H(i, i), 1e-300));
    Matrix Hs = d.asDiagonal() * H * d.asDiagonal();
    Vector gs = d.asDiagonal() * g;
    double ridge = 1e-13;
    Vector dy;
    bool solved = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::LDLT<Matrix> hld(Matrix(Hs + ridge * Matrix::Identity(n, n)));
      if (hld.info() == Eigen::Success && hld.isPositive()) {
        dy = d.asDiagonal() * hld.solve(-gs);
        if (dy.allFinite()) {
          solved = true;
          break;
        }
      }
      ridge *= 100.0;
    }
    if (!solved) return false;
    double lam2 = -g.dot(dy);
    if (lam2 <= 0.0) return true;
    if (lam2 / 2.0 < opts.newton_tol) return true;
    double lam = std::sqrt(lam2);
    double alpha = lam < 0.25 ? 1.0 : 1.0 / (1.0 + lam);

    auto phi = [&](const Vector& yv) -> std::optional<double> {
      auto bv = barrierValue(p, yv);
      if (!bv) return std::nullopt;
      return (p.c ? t * p.c->dot(yv) : 0.0) + *bv;
    };
    double phi0 = *phi(y);
    bool moved = false;
    while (alpha > 1e-16) {
      Vector y_trial = y + alpha * dy;
      auto phi1 = phi(y_trial);
      if (phi1 && *phi1 < phi0 - 1e-14 * std::abs(phi0)) {
        y = y_trial;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return true;  // centered as far as doubles allow
    if (stop && stop(y)) return true;
  }
  return true;
}

struct RawResult {
  SdpStatus status;
  Vector y;
  double gap = 0.0;
  double phase1_shift = 0.0;
  std::string message;
};

RawResult solveRaw(const Problem& prob, const SdpOptions& opts) {
  const int n = prob.nvar;
  const int nu = prob.barrierDegree();
  RawResult out;
  out.y = Vector::Zero(n);

  // ---- phase 1: minimize the uniform shift s over F_j(y) + s I > 0 ----
  double lam_min = 0.0;
  for (const Constraint& k : prob.cons) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(k.evaluate(out.y), Eigen::EigenvaluesOnly);
    lam_min = std::min(lam_min, es.eigenvalues().minCoeff());
  }
  if (lam_min <= 0.0) {
    Problem aug;
    aug.nvar = n + 1;
    for (const Constraint& k : prob.cons) {
      Constraint a = k;
      a.coeffs.push_back({n, Matrix::Identity(k.F0.rows(), k.F0.cols())});
      aug.cons.push_back(std::move(a));
    }
    Vector c1 = Vector::Zero(n + 1);
    c1[n] = 1.0;
    aug.c = c1;
    Vector ya = Vector::Zero(n + 1);
    ya[n] = -lam_min + 1.0;
    double t = opts.t0;
    int rounds = 0;
    auto feasible_now = [n, &opts](const Vector& yv) { return yv[n] < -opts.feas_margin; };
    while (true) {
      if (!center(aug, ya, t, opts, feasible_now)) {
        out.status = SdpStatus::NumericalFailure;
        out.message = "phase 1 centering failed";
        return out;
      }
      if (ya[n] < -opts.feas_margin) break;
      if (nu / t < 1e-12 * std::max(1.0, std::abs(ya[n])) || ++rounds > opts.max_outer) {
        out.phase1_shift = ya[n];
        if (ya[n] >= 0.0) {
          out.status = SdpStatus::Infeasible;
          out.message = "phase 1 optimum shift " + std::to_string(ya[n]);
          return out;
        }
        break;
      }
      t *= opts.mu;
    }
    out.phase1_shift = ya[n];
    out.y = ya.head(n);
  }

  // ---- phase 2 ----
  if (!prob.c) {
    SdpOptions center_opts = opts;
    center_opts.newton_tol = 1e-12;
    if (!center(prob, out.y, 1.0, center_opts)) {
      out.status = SdpStatus::NumericalFailure;
      out.message = "analytic centering failed";
      return out;
    }
    out.status = SdpStatus::Optimal;
    return out;
  }
  double t = opts.t0;
  int rounds = 0;
  while (true) {
    if (!center(prob, out.y, t, opts)) {
      out.status = SdpStatus::NumericalFailure;
      out.message = "path-following centering failed at t=" + std::to_string(t);
      return out;
    }
    double scale = std::max(1.0, std::abs(prob.c->dot(out.y)));
    out.gap = nu / t;
    if (out.gap <= opts.gap_tol * scale) break;
    if (++rounds > opts.max_outer) {
      out.message = "outer-iteration cap reached; achieved gap " + std::to_string(out.gap);
      break;
    }
    t *= opts.mu;
  }
  out.status = SdpStatus::Optimal;
  return out;
}

}  // namespace

SdpSolution solve(const LmiSystem& sys, const SdpOptions& opts) {
  Problem prob;
  prob.nvar = sys.scalarCount();
  for (const auto& cc : sys.constraints()) {
    Constraint k;
    k.F0 = cc.F0 - opts.delta_feas * Matrix::Identity(cc.dim(), cc.dim());
    k.coeffs = cc.coeffs;
    prob.cons.push_back(std::move(k));
  }
  if (sys.objective()) {
    Vector c = Vector::Zero(prob.nvar);
    for (const auto& [i, v] : sys.objective()->terms) c[i] = v;
    prob.c = c;
  }

  RawResult raw = solveRaw(prob, opts);
  SdpSolution sol;
  sol.status = raw.status;
  sol.gap = raw.gap;
  sol.phase1_shift = raw.phase1_shift;
  sol.message = raw.message;
  if (raw.status != SdpStatus::Optimal) return sol;

  sol.y = raw.y;
  for (const auto& info : sys.variables()) sol.values[info.name] = sys.value(info.name, raw.y);
  if (sys.objective()) sol.objective = sys.objective()->evaluate(raw.y);
  for (const auto& cc : sys.constraints())
    sol.constraint_min_eigs.push_back({cc.name, minEigSym(cc.evaluate(raw.y))});
  return sol;
}

}  // namespace incsyn
