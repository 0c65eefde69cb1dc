#include "incsyn/synthesis.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace incsyn {

Matrix SynthesisCertificate::storageP() const {
  const int n = static_cast<int>(P_x.rows());
  Matrix P(2 * n, 2 * n);
  P << P_x, P_y, P_y.transpose(), P_z;
  return P;
}

namespace {

struct PlantBlocks {
  AffineMatrixFunction A, Cz;
  Matrix Bw, Bu, Dzw, Dzu, Cy, Dyw;
  int nx, nw, nu, nz, ny, nr;
};

PlantBlocks extractBlocks(const AffineLpvStateSpace& plant) {
  plant.validate();
  for (const char* ch : {"w", "u"})
    if (!plant.inputs.has(ch))
      throw Error(std::string("synthesis: plant lacks input channel '") + ch + "'");
  for (const char* ch : {"z", "y"})
    if (!plant.outputs.has(ch))
      throw Error(std::string("synthesis: plant lacks output channel '") + ch + "'");

  PlantBlocks b;
  b.nx = plant.stateDim();
  b.nw = plant.inputs.size("w");
  b.nu = plant.inputs.size("u");
  b.nz = plant.outputs.size("z");
  b.ny = plant.outputs.size("y");
  b.nr = plant.polytope.dimension();
  b.A = plant.A;
  b.Cz = plant.outputSlice(plant.C, "z");

  AffineMatrixFunction Bw = plant.inputSlice(plant.B, "w");
  AffineMatrixFunction Bu = plant.inputSlice(plant.B, "u");
  AffineMatrixFunction Cy = plant.outputSlice(plant.C, "y");
  AffineMatrixFunction Dzw = plant.inputSlice(plant.outputSlice(plant.D, "z"), "w");
  AffineMatrixFunction Dzu = plant.inputSlice(plant.outputSlice(plant.D, "z"), "u");
  AffineMatrixFunction Dyw = plant.inputSlice(plant.outputSlice(plant.D, "y"), "w");
  AffineMatrixFunction Dyu = plant.inputSlice(plant.outputSlice(plant.D, "y"), "u");
  for (const auto& [name, f] :
       std::initializer_list<std::pair<const char*, const AffineMatrixFunction*>>{
           {"B_w", &Bw}, {"B_u", &Bu}, {"C_y", &Cy}, {"D_zw", &Dzw}, {"D_zu", &Dzu},
           {"D_yw", &Dyw}, {"D_yu", &Dyu}})
    if (!f->isConstant())
      throw AffineClosureError(std::string("synthesis: block ") + name +
                               " is scheduling-dependent; the vertex LMI would not be affine");
  if (maxAbs(Dyu.constant()) > 0.0)
    throw Error("synthesis: plant has u->y feedthrough; the loop would be algebraic");
  b.Bw = Bw.constant();
  b.Bu = Bu.constant();
  b.Cy = Cy.constant();
  b.Dzw = Dzw.constant();
  b.Dzu = Dzu.constant();
  b.Dyw = Dyw.constant();
  return b;
}

struct SynthesisVars {
  int gam = -1;  // absent when gamma is fixed
  int Px, Pz, Py, J, N, S;
  std::vector<int> U, V, W, X;
};

SynthesisVars declareVars(LmiSystem& sys, const PlantBlocks& b, bool fixed_gamma) {
  SynthesisVars v;
  if (!fixed_gamma) v.gam = sys.addScalar("gamma");
  v.Px = sys.addSymmetric("P_x", b.nx);
  v.Pz = sys.addSymmetric("P_z", b.nx);
  v.Py = sys.addRectangular("P_y", b.nx, b.nx);
  v.J = sys.addRectangular("J", b.nx, b.nx);
  v.N = sys.addRectangular("N", b.nx, b.nx);
  v.S = sys.addRectangular("S", b.nx, b.nx);
  for (int t = 0; t <= b.nr; ++t) {
    std::string suff = std::to_string(t);
    v.U.push_back(sys.addRectangular("U" + suff, b.nx, b.nx));
    v.V.push_back(sys.addRectangular("V" + suff, b.nx, b.ny));
    v.W.push_back(sys.addRectangular("W" + suff, b.nu, b.nx));
    v.X.push_back(sys.addRectangular("X" + suff, b.nu, b.ny));
  }
  return v;
}

MatrixExpr affineAt(const LmiSystem& sys, const std::vector<int>& ids, const Vector& rho) {
  MatrixExpr out = sys.var(ids[0]);
  for (int i = 0; i < rho.size(); ++i) out = out + rho[i] * sys.var(ids[i + 1]);
  return out;
}

// the Lemma-1 block inequality at one scheduling point
MatrixExpr synthesisBlock(const LmiSystem& sys, const SynthesisVars& v, const PlantBlocks& b,
                          const Vector& rho, const AffineScalar& gamma) {
  const Matrix Av = b.A.evaluate(rho);
  const Matrix Czv = b.Cz.evaluate(rho);
  MatrixExpr Px = sys.var(v.Px), Pz = sys.var(v.Pz), Py = sys.var(v.Py);
  MatrixExpr J = sys.var(v.J), N = sys.var(v.N), S = sys.var(v.S);
  MatrixExpr U = affineAt(sys, v.U, rho), Vv = affineAt(sys, v.V, rho);
  MatrixExpr W = affineAt(sys, v.W, rho), X = affineAt(sys, v.X, rho);

  MatrixExpr P = MatrixExpr::fromBlocks({{Px, Py}, {Py.transpose(), Pz}});
  MatrixExpr I = MatrixExpr::identity(b.nx);
  MatrixExpr G = MatrixExpr::fromBlocks(
      {{J + J.transpose() - Px, I + S.transpose() - Py},
       {(I + S.transpose() - Py).transpose(), N + N.transpose() - Pz}});

  MatrixExpr AA = MatrixExpr::fromBlocks(
      {{Av * J + b.Bu * W, MatrixExpr::constant(Av) + b.Bu * (X * b.Cy)},
       {U, N * Av + Vv * b.Cy}});
  MatrixExpr BB = MatrixExpr::fromBlocks(
      {{MatrixExpr::constant(b.Bw) + b.Bu * (X * b.Dyw)},
       {N * b.Bw + Vv * b.Dyw}});
  MatrixExpr CC = MatrixExpr::fromBlocks(
      {{Czv * J + b.Dzu * W, MatrixExpr::constant(Czv) + b.Dzu * (X * b.Cy)}});
  MatrixExpr DD = MatrixExpr::constant(b.Dzw) + b.Dzu * (X * b.Dyw);

  MatrixExpr gIw(b.nw, b.nw), gIz(b.nz, b.nz);
  for (int i = 0; i < b.nw; ++i) gIw.at(i, i) = gamma;
  for (int i = 0; i < b.nz; ++i) gIz.at(i, i) = gamma;

  return MatrixExpr::fromBlocks(
      {{P, AA, BB, MatrixExpr::zero(2 * b.nx, b.nz)},
       {AA.transpose(), G, MatrixExpr::zero(2 * b.nx, b.nw), CC.transpose()},
       {BB.transpose(), MatrixExpr::zero(b.nw, 2 * b.nx), gIw, DD.transpose()},
       {MatrixExpr::zero(b.nz, 2 * b.nx), CC, DD, gIz}});
}

LmiSystem assembleImpl(const PlantBlocks& b, const SchedulingPolytope& polytope,
                       std::optional<double> gamma_fixed, double variable_bound) {
  LmiSystem sys;
  SynthesisVars v = declareVars(sys, b, gamma_fixed.has_value());
  AffineScalar gamma =
      gamma_fixed ? AffineScalar(*gamma_fixed) : sys.scalarVar(v.gam);

  auto tmpl = [&](const Vector& rho) { return synthesisBlock(sys, v, b, rho, gamma); };
  std::vector<MatrixExpr> vertex_lmis = enforceOnVertices(tmpl, polytope);
  for (std::size_t k = 0; k < vertex_lmis.size(); ++k)
    sys.addConstraint("vertex" + std::to_string(k), vertex_lmis[k]);

  MatrixExpr P = MatrixExpr::fromBlocks(
      {{sys.var(v.Px), sys.var(v.Py)},
       {sys.var(v.Py).transpose(), sys.var(v.Pz)}});
  sys.addConstraint("storage", P);

  if (variable_bound > 0.0) {
    // sigma_max bounds keep the gamma-fixed set bounded so its analytic
    // center exists; far above any binding solution scale
    auto bound = [&](const std::string& name) {
      MatrixExpr M = sys.var(name);
      MatrixExpr top = MatrixExpr::fromBlocks(
          {{variable_bound * MatrixExpr::identity(M.rows()), M},
           {M.transpose(), variable_bound * MatrixExpr::identity(M.cols())}});
      sys.addConstraint("bound_" + name, top);
    };
    for (const auto& info : sys.variables()) {
      if (info.name == "gamma") continue;
      if (info.shape == VarShape::Symmetric) {
        MatrixExpr cap = variable_bound * MatrixExpr::identity(info.rows) - sys.var(info.name);
        sys.addConstraint("bound_" + info.name, cap);
      } else {
        bound(info.name);
      }
    }
  }

  if (!gamma_fixed) sys.setObjective(sys.scalarVar(v.gam));
  return sys;
}

struct Reconstruction {
  DifferentialController ctrl;
  Matrix R, L;
  double condR = 0.0;
};

Reconstruction buildController(const SdpSolution& sol, const PlantBlocks& b,
                               const SchedulingPolytope& polytope, Factorization fact) {
  const Matrix J = sol.values.at("J");
  const Matrix N = sol.values.at("N");
  const Matrix S = sol.values.at("S");
  const int nx = b.nx;

  Matrix R, L;
  Matrix SNJ = S - N * J;
  if (fact == Factorization::Identity) {
    R = SNJ;
    L = Matrix::Identity(nx, nx);
  } else {
    Eigen::PartialPivLU<Matrix> lu(SNJ);
    Matrix Llu = Matrix(lu.matrixLU().triangularView<Eigen::UnitLower>());
    Matrix Ulu = Matrix(lu.matrixLU().triangularView<Eigen::Upper>());
    R = lu.permutationP().transpose() * Llu;
    L = Ulu;
  }

  Eigen::JacobiSVD<Matrix> svd(SNJ);
  double condR = svd.singularValues()(0) /
                 std::max(svd.singularValues()(svd.singularValues().size() - 1), 1e-300);

  Matrix E(nx + b.nu, nx + b.nu);
  E << R, N * b.Bu, Matrix::Zero(b.nu, nx), Matrix::Identity(b.nu, b.nu);
  Matrix F(nx + b.ny, nx + b.ny);
  F << L, Matrix::Zero(nx, b.ny), b.Cy * J, Matrix::Identity(b.ny, b.ny);

  Eigen::PartialPivLU<Matrix> Elu(E);
  Eigen::PartialPivLU<Matrix> FTlu(Matrix(F.transpose()));

  const int nr = polytope.dimension();
  std::vector<Matrix> Ks;
  for (int t = 0; t <= nr; ++t) {
    Matrix Theta(nx + b.nu, nx + b.ny);
    Theta << sol.values.at("U" + std::to_string(t)), sol.values.at("V" + std::to_string(t)),
        sol.values.at("W" + std::to_string(t)), sol.values.at("X" + std::to_string(t));
    Theta.topLeftCorner(nx, nx) -= N * b.A.term(t) * J;
    Matrix K = Elu.solve(Theta);
    K = FTlu.solve(K.transpose()).transpose();  // K F = E^{-1} Theta
    Ks.push_back(K);
  }

  Reconstruction out;
  out.R = R;
  out.L = L;
  out.condR = condR;
  auto slice = [&](int r0, int c0, int rr, int cc) {
    std::vector<Matrix> coeffs;
    for (int t = 1; t <= nr; ++t) coeffs.push_back(Ks[t].block(r0, c0, rr, cc));
    return AffineMatrixFunction(Ks[0].block(r0, c0, rr, cc), coeffs);
  };
  out.ctrl.A = slice(0, 0, nx, nx);
  out.ctrl.B = slice(0, nx, nx, b.ny);
  out.ctrl.C = slice(nx, 0, b.nu, nx);
  out.ctrl.D = slice(nx, nx, b.nu, b.ny);
  out.ctrl.polytope = polytope;
  return out;
}

SynthesisCertificate makeCertificate(const SdpSolution& sol, const PlantBlocks& b,
                                     const Reconstruction& rec, double gamma_used,
                                     double gamma_opt, double relax) {
  SynthesisCertificate cert;
  cert.gamma = gamma_used;
  cert.gamma_optimal = gamma_opt;
  cert.gamma_relax = relax;
  cert.P_x = sol.values.at("P_x");
  cert.P_y = sol.values.at("P_y");
  cert.P_z = sol.values.at("P_z");
  cert.J = sol.values.at("J");
  cert.N = sol.values.at("N");
  cert.S = sol.values.at("S");
  const int nr = b.nr;
  auto collect = [&](const char* base) {
    std::vector<Matrix> coeffs;
    for (int t = 1; t <= nr; ++t) coeffs.push_back(sol.values.at(base + std::to_string(t)));
    return AffineMatrixFunction(sol.values.at(base + std::string("0")), coeffs);
  };
  cert.U = collect("U");
  cert.V = collect("V");
  cert.W = collect("W");
  cert.X = collect("X");
  cert.R = rec.R;
  cert.L = rec.L;
  cert.cond_R = rec.condR;
  for (const auto& [name, eig] : sol.constraint_min_eigs)
    if (name.rfind("bound_", 0) != 0) cert.constraint_min_eigs.push_back({name, eig});
  cert.plant_A = b.A;
  cert.B_u = b.Bu;
  cert.C_y = b.Cy;
  return cert;
}

}  // namespace

LmiSystem assembleSynthesisLmi(const AffineLpvStateSpace& plant, const SdpOptions&) {
  PlantBlocks b = extractBlocks(plant);
  return assembleImpl(b, plant.polytope, std::nullopt, 0.0);
}

SynthesisResult synthesize(const AffineLpvStateSpace& plant, const SynthesisOptions& opts) {
  PlantBlocks b = extractBlocks(plant);

  LmiSystem sys = assembleImpl(b, plant.polytope, std::nullopt, 0.0);
  SdpSolution opt = solve(sys, opts.sdp);
  if (opt.status == SdpStatus::Infeasible)
    throw InfeasibleError("synthesis LMI infeasible: " + opt.message);
  if (opt.status != SdpStatus::Optimal)
    throw Error("synthesis SDP failed: " + opt.message);
  const double gamma_opt = *opt.objective;

  // Reconstruction ladder: the gamma-minimal face generically has singular
  // S - N J, so the controller is built from the analytic center of the
  // norm-bounded feasible set at slightly relaxed gamma. Relax escalates
  // until the construction identity holds to recon_tol.
  double relax = opts.gamma_relax;
  double bound = opts.variable_bound;
  std::optional<SynthesisResult> best;
  double best_resid = std::numeric_limits<double>::infinity();
  std::vector<std::string> notes;
  for (int rung = 0; rung < opts.max_relax_steps; ++rung, relax *= 10.0) {
    const double gamma_used = (1.0 + relax) * gamma_opt;
    SdpSolution centered;
    double bound_used = bound;
    for (int btry = 0; btry < 3; ++btry, bound_used *= 10.0) {
      LmiSystem fixed = assembleImpl(b, plant.polytope, gamma_used, bound_used);
      centered = solve(fixed, opts.sdp);
      if (centered.status == SdpStatus::Optimal) break;
    }
    if (centered.status != SdpStatus::Optimal) continue;

    Reconstruction rec = buildController(centered, b, plant.polytope, opts.factorization);
    SynthesisCertificate cert =
        makeCertificate(centered, b, rec, gamma_used, gamma_opt, relax);

    double resid = 0.0;
    for (const Vector& v : plant.polytope.vertices())
      resid = std::max(resid, reconstructTheta(cert, rec.ctrl, v));
    resid = std::max(resid, reconstructTheta(cert, rec.ctrl, plant.polytope.centroid()));
    cert.reconstruction_residual = resid;

    if (resid < best_resid) {
      best_resid = resid;
      best = SynthesisResult{cert, rec.ctrl};
    }
    if (resid <= opts.recon_tol && rec.condR <= opts.cond_limit) break;
    notes.push_back("relax " + std::to_string(relax) + " gave reconstruction residual " +
                    std::to_string(resid) + ", cond(R) " + std::to_string(rec.condR) +
                    "; escalating");
  }
  if (!best) throw Error("synthesis: controller reconstruction failed at every relax level");
  best->certificate.notes = notes;
  return *best;
}

double reconstructTheta(const SynthesisCertificate& cert, const DifferentialController& ctrl,
                        const Vector& rho) {
  const int nx = static_cast<int>(cert.J.rows());
  const int nu = ctrl.outputDim();
  const int ny = ctrl.inputDim();
  Matrix E(nx + nu, nx + nu);
  E << cert.R, cert.N * cert.B_u, Matrix::Zero(nu, nx), Matrix::Identity(nu, nu);
  Matrix F(nx + ny, nx + ny);
  F << cert.L, Matrix::Zero(nx, ny), cert.C_y * cert.J, Matrix::Identity(ny, ny);
  auto K = ctrl.evaluate(rho);
  Matrix Kmat(nx + nu, nx + ny);
  Kmat << K.A, K.B, K.C, K.D;
  Matrix NAJ = Matrix::Zero(nx + nu, nx + ny);
  NAJ.topLeftCorner(nx, nx) = cert.N * cert.plant_A.evaluate(rho) * cert.J;
  Matrix UVWX(nx + nu, nx + ny);
  UVWX << cert.U.evaluate(rho), cert.V.evaluate(rho), cert.W.evaluate(rho),
      cert.X.evaluate(rho);
  return maxAbs(E * Kmat * F + NAJ - UVWX);
}

std::string SynthesisCertificate::report() const {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "synthesis certificate\n";
  os << "  gamma (certified for constructed controller): " << gamma << "\n";
  os << "  gamma (LMI optimum):                          " << gamma_optimal << "\n";
  os << "  gamma relax used:                             " << gamma_relax << "\n";
  os << "  reconstruction residual: " << reconstruction_residual << "\n";
  os << "  cond(R): " << cond_R << "\n";
  os << "  constraint margins (min eigenvalues):\n";
  for (const auto& [name, eig] : constraint_min_eigs)
    os << "    " << name << ": " << eig << "\n";
  auto dump = [&os](const char* name, const Matrix& m) {
    os << "  " << name << " =\n";
    for (int i = 0; i < m.rows(); ++i) {
      os << "    ";
      for (int j = 0; j < m.cols(); ++j) os << m(i, j) << (j + 1 == m.cols() ? "" : " ");
      os << "\n";
    }
  };
  dump("P_x", P_x);
  dump("P_y", P_y);
  dump("P_z", P_z);
  dump("J", J);
  dump("N", N);
  dump("S", S);
  dump("R", R);
  dump("L", L);
  for (int t = 0; t <= U.schedulingDim(); ++t) {
    dump(("U" + std::to_string(t)).c_str(), U.term(t));
    dump(("V" + std::to_string(t)).c_str(), V.term(t));
    dump(("W" + std::to_string(t)).c_str(), W.term(t));
    dump(("X" + std::to_string(t)).c_str(), X.term(t));
  }
  for (const auto& n : notes) os << "  note: " << n << "\n";
  return os.str();
}

}  // namespace incsyn
