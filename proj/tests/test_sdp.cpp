#include <doctest.h>

#include <cmath>
#include <sstream>

#include "incsyn/lmi.hpp"
#include "incsyn/sdp.hpp"
#include "support/oracles.hpp"

using namespace incsyn;

TEST_CASE("minimize gamma over [[gamma, 1],[1, gamma]] >= 0 gives 1") {
  LmiSystem sys;
  int g = sys.addScalar("gamma");
  MatrixExpr M(2, 2);
  M.at(0, 0) = sys.scalarVar(g);
  M.at(1, 1) = sys.scalarVar(g);
  M.at(0, 1) = AffineScalar(1.0);
  M.at(1, 0) = AffineScalar(1.0);
  sys.addConstraint("m", M);
  sys.setObjective(sys.scalarVar(g));
  SdpSolution sol = solve(sys);
  REQUIRE((sol.status == SdpStatus::Optimal));
  CHECK(*sol.objective == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.minConstraintEig() >= -1e-7);
}

TEST_CASE("scalar Lyapunov feasibility for a = 0.5") {
  LmiSystem sys;
  sys.addSymmetric("P", 1);
  MatrixExpr P = sys.var("P");
  sys.addConstraint("pos", P);
  sys.addConstraint("decay", P - 0.25 * P);  // P - a^2 P > 0
  // bounded set so the analytic center exists
  sys.addConstraint("cap", MatrixExpr::constant(Matrix::Identity(1, 1) * 10.0) - P);
  SdpSolution sol = solve(sys);
  REQUIRE((sol.status == SdpStatus::Optimal));
  CHECK(sol.values.at("P")(0, 0) > 0.0);
}

TEST_CASE("scalar Lyapunov infeasibility for a = 1.1") {
  // spectral radius 1.1 > 1: no certificate exists
  LmiSystem sys;
  sys.addSymmetric("P", 1);
  MatrixExpr P = sys.var("P");
  sys.addConstraint("pos", P);
  sys.addConstraint("decay", P - 1.21 * P);
  SdpSolution sol = solve(sys);
  CHECK((sol.status == SdpStatus::Infeasible));
}

TEST_CASE("solver is deterministic under a zero perturbation") {
  auto build = []() {
    LmiSystem sys;
    int g = sys.addScalar("gamma");
    sys.addSymmetric("P", 2);
    MatrixExpr P = sys.var("P");
    Matrix A(2, 2);
    A << 0.6, 0.3, -0.2, 0.4;
    MatrixExpr M = MatrixExpr::fromBlocks(
        {{P, MatrixExpr::constant(A) * P},
         {(MatrixExpr::constant(A) * P).transpose(), P}});
    sys.addConstraint("lyap", M);
    MatrixExpr G(1, 1);
    G.at(0, 0) = sys.scalarVar(g);
    sys.addConstraint("gpos", G);
    MatrixExpr cap = MatrixExpr::constant(Matrix::Identity(2, 2) * 50.0) - P;
    sys.addConstraint("cap", cap);
    sys.setObjective(sys.scalarVar(g));
    return sys;
  };
  SdpSolution a = solve(build());
  SdpSolution b = solve(build());
  REQUIRE((a.status == SdpStatus::Optimal));
  REQUIRE((b.status == SdpStatus::Optimal));
  CHECK(std::abs(*a.objective - *b.objective) < 1e-8);
  CHECK(maxAbs(a.values.at("P") - b.values.at("P")) < 1e-8);
}

TEST_CASE("constraint symmetry is enforced") {
  LmiSystem sys;
  sys.addRectangular("X", 2, 2);
  CHECK_THROWS_WITH_AS(sys.addConstraint("asym", sys.var("X")),
                       doctest::Contains("asymmetric"), Error);
}

TEST_CASE("enforce_on_vertices expands an affine template per vertex") {
  LmiSystem sys;
  sys.addSymmetric("P", 2);
  auto p = SchedulingPolytope::interval(-1.0, 1.0);
  auto tmpl = [&](const Vector& rho) {
    Matrix A(2, 2);
    A << 0.1, -1.0, 0.9 * rho[0], 1.0;
    MatrixExpr P = sys.var("P");
    return MatrixExpr::fromBlocks({{P, A * P}, {(A * P).transpose(), P}});
  };
  auto lmis = enforceOnVertices(tmpl, p);
  CHECK(lmis.size() == 2);
}

TEST_CASE("enforce_on_vertices deduplicates constant templates") {
  LmiSystem sys;
  sys.addSymmetric("P", 1);
  auto p = SchedulingPolytope::interval(-1.0, 1.0);
  auto tmpl = [&](const Vector&) { return sys.var("P"); };
  CHECK(enforceOnVertices(tmpl, p).size() == 1);
}

TEST_CASE("enforce_on_vertices rejects quadratic scheduling dependence") {
  LmiSystem sys;
  sys.addSymmetric("P", 1);
  auto p = SchedulingPolytope::interval(-1.0, 1.0);
  auto tmpl = [&](const Vector& rho) {
    MatrixExpr M = sys.var("P");
    M.at(0, 0) += AffineScalar(rho[0] * rho[0]);  // curvature
    return M;
  };
  CHECK_THROWS_WITH_AS(enforceOnVertices(tmpl, p), doctest::Contains("not affine"), Error);
}

TEST_CASE("vertex sufficiency: affine template at interior rho is a convex combination") {
  Rng rng(13);
  Matrix A0(2, 2), A1(2, 2);
  A0 << 0.5, 0.1, -0.3, 0.2;
  A1 << 0.1, 0.0, 0.4, -0.2;
  auto p = SchedulingPolytope::interval(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    double lam = rng.uniform();
    Vector rho(1);
    rho << lam * 1.0 + (1.0 - lam) * -1.0;
    Matrix at_rho = A0 + rho[0] * A1;
    Matrix combo = lam * (A0 + A1) + (1.0 - lam) * (A0 - A1);
    CHECK(maxAbs(at_rho - combo) < 1e-12);
  }
}

TEST_CASE("affine products with two variable factors are rejected") {
  LmiSystem sys;
  sys.addRectangular("X", 1, 1);
  sys.addRectangular("Y", 1, 1);
  CHECK_THROWS_AS(sys.var("X") * sys.var("Y"), AffineClosureError);
}

TEST_CASE("sdpa-like dump emits the expected block structure") {
  LmiSystem sys;
  int g = sys.addScalar("gamma");
  MatrixExpr M(2, 2);
  M.at(0, 0) = sys.scalarVar(g);
  M.at(1, 1) = sys.scalarVar(g);
  M.at(0, 1) = AffineScalar(1.0);
  M.at(1, 0) = AffineScalar(1.0);
  sys.addConstraint("m", M);
  sys.setObjective(sys.scalarVar(g));
  std::ostringstream os;
  sys.writeSdpaSparse(os);
  std::string dump = os.str();
  CHECK(dump.find("1 = mDIM") != std::string::npos);
  CHECK(dump.find("1 = nBLOCK") != std::string::npos);
}

TEST_CASE("quadratic matrix sizes: solving a small trace-style bound") {
  // min t s.t. [[t, b'],[b, I]] >= 0  -> t = b'b ... t >= b' I^-1 b by Schur
  LmiSystem sys;
  int t = sys.addScalar("t");
  Vector b(3);
  b << 0.3, -0.4, 1.2;
  MatrixExpr M(4, 4);
  M.at(0, 0) = sys.scalarVar(t);
  for (int i = 0; i < 3; ++i) {
    M.at(0, i + 1) = AffineScalar(b[i]);
    M.at(i + 1, 0) = AffineScalar(b[i]);
    M.at(i + 1, i + 1) = AffineScalar(1.0);
  }
  sys.addConstraint("schur", M);
  sys.setObjective(sys.scalarVar(t));
  SdpSolution sol = solve(sys);
  REQUIRE((sol.status == SdpStatus::Optimal));
  CHECK(*sol.objective == doctest::Approx(b.squaredNorm()).epsilon(1e-5));
}
