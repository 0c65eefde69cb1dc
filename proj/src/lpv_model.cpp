#include "incsyn/lpv_model.hpp"

#include <algorithm>

namespace incsyn {

AffineMatrixFunction::AffineMatrixFunction(Matrix constant) : constant_(std::move(constant)) {}

AffineMatrixFunction::AffineMatrixFunction(Matrix constant, std::vector<Matrix> coefficients)
    : constant_(std::move(constant)), coefficients_(std::move(coefficients)) {
  for (const Matrix& m : coefficients_)
    if (m.rows() != constant_.rows() || m.cols() != constant_.cols())
      throw DimensionError("AffineMatrixFunction: coefficient shape mismatch");
}

AffineMatrixFunction AffineMatrixFunction::zero(int rows, int cols, int n_rho) {
  return AffineMatrixFunction(Matrix::Zero(rows, cols),
                              std::vector<Matrix>(n_rho, Matrix::Zero(rows, cols)));
}

bool AffineMatrixFunction::isConstant(double tol) const {
  for (const Matrix& m : coefficients_)
    if (maxAbs(m) > tol) return false;
  return true;
}

Matrix AffineMatrixFunction::evaluate(const Vector& rho) const {
  if (rho.size() != schedulingDim())
    throw DimensionError("AffineMatrixFunction::evaluate: rho has dimension " +
                         std::to_string(rho.size()) + ", expected " +
                         std::to_string(schedulingDim()));
  Matrix out = constant_;
  for (int i = 0; i < schedulingDim(); ++i) out += rho[i] * coefficients_[i];
  return out;
}

AffineMatrixFunction AffineMatrixFunction::withSchedulingDim(int n_rho) const {
  if (n_rho < schedulingDim())
    throw DimensionError("withSchedulingDim: cannot drop scheduling terms");
  auto coeffs = coefficients_;
  while (static_cast<int>(coeffs.size()) < n_rho)
    coeffs.push_back(Matrix::Zero(rows(), cols()));
  return AffineMatrixFunction(constant_, std::move(coeffs));
}

AffineMatrixFunction AffineMatrixFunction::transpose() const {
  std::vector<Matrix> coeffs;
  coeffs.reserve(coefficients_.size());
  for (const Matrix& m : coefficients_) coeffs.push_back(m.transpose());
  return AffineMatrixFunction(constant_.transpose(), std::move(coeffs));
}

namespace {
void requireSameShapeAndDim(const AffineMatrixFunction& a, const AffineMatrixFunction& b,
                            const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.schedulingDim() != b.schedulingDim())
    throw DimensionError(std::string("AffineMatrixFunction ") + op + ": shape mismatch");
}
}  // namespace

AffineMatrixFunction AffineMatrixFunction::operator+(const AffineMatrixFunction& o) const {
  requireSameShapeAndDim(*this, o, "+");
  std::vector<Matrix> coeffs;
  for (int i = 0; i < schedulingDim(); ++i) coeffs.push_back(coefficients_[i] + o.coefficients_[i]);
  return AffineMatrixFunction(constant_ + o.constant_, std::move(coeffs));
}

AffineMatrixFunction AffineMatrixFunction::operator-(const AffineMatrixFunction& o) const {
  requireSameShapeAndDim(*this, o, "-");
  std::vector<Matrix> coeffs;
  for (int i = 0; i < schedulingDim(); ++i) coeffs.push_back(coefficients_[i] - o.coefficients_[i]);
  return AffineMatrixFunction(constant_ - o.constant_, std::move(coeffs));
}

AffineMatrixFunction AffineMatrixFunction::scaled(double s) const {
  std::vector<Matrix> coeffs;
  for (const Matrix& m : coefficients_) coeffs.push_back(s * m);
  return AffineMatrixFunction(s * constant_, std::move(coeffs));
}

AffineMatrixFunction AffineMatrixFunction::leftMultiply(const Matrix& m) const {
  std::vector<Matrix> coeffs;
  for (const Matrix& c : coefficients_) coeffs.push_back(m * c);
  return AffineMatrixFunction(m * constant_, std::move(coeffs));
}

AffineMatrixFunction AffineMatrixFunction::rightMultiply(const Matrix& m) const {
  std::vector<Matrix> coeffs;
  for (const Matrix& c : coefficients_) coeffs.push_back(c * m);
  return AffineMatrixFunction(constant_ * m, std::move(coeffs));
}

AffineMatrixFunction AffineMatrixFunction::multiply(const AffineMatrixFunction& o) const {
  if (cols() != o.rows()) throw DimensionError("AffineMatrixFunction multiply: inner dims");
  if (isConstant()) return o.leftMultiply(constant_).withSchedulingDim(
      std::max(schedulingDim(), o.schedulingDim()));
  if (o.isConstant())
    return rightMultiply(o.constant()).withSchedulingDim(
        std::max(schedulingDim(), o.schedulingDim()));
  throw AffineClosureError(
      "product of two scheduling-dependent matrix functions is not affine in rho");
}

std::vector<Matrix> vertexImages(const AffineMatrixFunction& f, const SchedulingPolytope& p) {
  if (f.schedulingDim() != p.dimension())
    throw DimensionError("vertexImages: scheduling dimension mismatch");
  std::vector<Matrix> out;
  out.reserve(p.vertexCount());
  for (const Vector& v : p.vertices()) out.push_back(f.evaluate(v));
  return out;
}

ChannelLayout::ChannelLayout(std::vector<std::pair<std::string, int>> parts)
    : parts_(std::move(parts)) {
  for (const auto& [name, size] : parts_) {
    if (size <= 0) throw Error("ChannelLayout: channel '" + name + "' must have positive size");
    total_ += size;
  }
  for (std::size_t i = 0; i < parts_.size(); ++i)
    for (std::size_t j = i + 1; j < parts_.size(); ++j)
      if (parts_[i].first == parts_[j].first)
        throw Error("ChannelLayout: duplicate channel '" + parts_[i].first + "'");
}

int ChannelLayout::offset(const std::string& name) const {
  int off = 0;
  for (const auto& [n, size] : parts_) {
    if (n == name) return off;
    off += size;
  }
  throw Error("ChannelLayout: no channel named '" + name + "'");
}

int ChannelLayout::size(const std::string& name) const {
  for (const auto& [n, size] : parts_)
    if (n == name) return size;
  throw Error("ChannelLayout: no channel named '" + name + "'");
}

bool ChannelLayout::has(const std::string& name) const {
  for (const auto& [n, size] : parts_) {
    (void)size;
    if (n == name) return true;
  }
  return false;
}

void AffineLpvStateSpace::validate() const {
  const int nx = A.rows();
  if (A.cols() != nx) throw DimensionError("lpv model: A must be square");
  if (B.rows() != nx) throw DimensionError("lpv model: B row count");
  if (C.cols() != nx) throw DimensionError("lpv model: C column count");
  if (D.rows() != C.rows() || D.cols() != B.cols())
    throw DimensionError("lpv model: D shape");
  const int nr = polytope.dimension();
  for (const AffineMatrixFunction* f : {&A, &B, &C, &D})
    if (f->schedulingDim() != nr)
      throw DimensionError("lpv model: scheduling dimension mismatch with polytope");
  if (inputs.total() != 0 && inputs.total() != B.cols())
    throw DimensionError("lpv model: input channels do not tile the input range");
  if (outputs.total() != 0 && outputs.total() != C.rows())
    throw DimensionError("lpv model: output channels do not tile the output range");
}

Matrix AffineLpvStateSpace::inputSlice(const Matrix& m, const std::string& ch) const {
  return m.middleCols(inputs.offset(ch), inputs.size(ch));
}

Matrix AffineLpvStateSpace::outputSlice(const Matrix& m, const std::string& ch) const {
  return m.middleRows(outputs.offset(ch), outputs.size(ch));
}

AffineMatrixFunction AffineLpvStateSpace::inputSlice(const AffineMatrixFunction& f,
                                                     const std::string& ch) const {
  std::vector<Matrix> coeffs;
  for (const Matrix& m : f.coefficients()) coeffs.push_back(inputSlice(m, ch));
  return AffineMatrixFunction(inputSlice(f.constant(), ch), std::move(coeffs));
}

AffineMatrixFunction AffineLpvStateSpace::outputSlice(const AffineMatrixFunction& f,
                                                      const std::string& ch) const {
  std::vector<Matrix> coeffs;
  for (const Matrix& m : f.coefficients()) coeffs.push_back(outputSlice(m, ch));
  return AffineMatrixFunction(outputSlice(f.constant(), ch), std::move(coeffs));
}

AffineLpvStateSpace::Frozen AffineLpvStateSpace::evaluate(const Vector& rho) const {
  return Frozen{A.evaluate(rho), B.evaluate(rho), C.evaluate(rho), D.evaluate(rho)};
}

AffineLpvStateSpace seriesInterconnect(const AffineLpvStateSpace& sys1,
                                       const AffineLpvStateSpace& sys2) {
  sys1.validate();
  sys2.validate();
  if (sys1.outputDim() != sys2.inputDim())
    throw DimensionError("seriesInterconnect: output/input dimension mismatch");

  auto isLti = [](const AffineLpvStateSpace& s) {
    return s.A.isConstant() && s.B.isConstant() && s.C.isConstant() && s.D.isConstant();
  };
  // constant systems are polytope-agnostic; otherwise the polytopes must agree
  SchedulingPolytope poly = isLti(sys1) && !isLti(sys2) ? sys2.polytope : sys1.polytope;
  if (!isLti(sys1) && !isLti(sys2)) {
    bool same = sys1.polytope.dimension() == sys2.polytope.dimension() &&
                sys1.polytope.vertexCount() == sys2.polytope.vertexCount();
    for (int i = 0; same && i < sys1.polytope.vertexCount(); ++i)
      same = (sys1.polytope.vertices()[i] - sys2.polytope.vertices()[i]).norm() < 1e-12;
    if (!same) throw Error("seriesInterconnect: systems use different scheduling polytopes");
  }
  const int nr = poly.dimension();
  for (const AffineLpvStateSpace* s : {&sys1, &sys2})
    if (!isLti(*s) && s->polytope.dimension() != nr)
      throw Error("seriesInterconnect: scheduling dimension mismatch");

  const int n1 = sys1.stateDim(), n2 = sys2.stateDim();
  const int nu = sys1.inputDim(), ny = sys2.outputDim();

  // x = (x1, x2);  x2+ = A2 x2 + B2 (C1 x1 + D1 u);  y = C2 x2 + D2 (C1 x1 + D1 u)
  auto embed = [nr](const AffineMatrixFunction& f) {
    if (f.schedulingDim() <= nr) return f.withSchedulingDim(nr);
    if (!f.isConstant()) throw Error("seriesInterconnect: scheduling dimension mismatch");
    return AffineMatrixFunction(f.constant()).withSchedulingDim(nr);
  };
  AffineMatrixFunction B2C1 = embed(sys2.B).multiply(embed(sys1.C));
  AffineMatrixFunction B2D1 = embed(sys2.B).multiply(embed(sys1.D));
  AffineMatrixFunction D2C1 = embed(sys2.D).multiply(embed(sys1.C));
  AffineMatrixFunction D2D1 = embed(sys2.D).multiply(embed(sys1.D));

  const int n = n1 + n2;
  std::vector<Matrix> Ac(nr, Matrix::Zero(n, n)), Bc(nr, Matrix::Zero(n, nu)),
      Cc(nr, Matrix::Zero(ny, n)), Dc(nr, Matrix::Zero(ny, nu));
  Matrix A0 = Matrix::Zero(n, n), B0 = Matrix::Zero(n, nu), C0 = Matrix::Zero(ny, n),
         D0 = Matrix::Zero(ny, nu);
  for (int t = 0; t <= nr; ++t) {
    Matrix& At = t == 0 ? A0 : Ac[t - 1];
    Matrix& Bt = t == 0 ? B0 : Bc[t - 1];
    Matrix& Ct = t == 0 ? C0 : Cc[t - 1];
    Matrix& Dt = t == 0 ? D0 : Dc[t - 1];
    At.topLeftCorner(n1, n1) = embed(sys1.A).term(t);
    At.bottomLeftCorner(n2, n1) = B2C1.term(t);
    At.bottomRightCorner(n2, n2) = embed(sys2.A).term(t);
    Bt.topRows(n1) = embed(sys1.B).term(t);
    Bt.bottomRows(n2) = B2D1.term(t);
    Ct.leftCols(n1) = D2C1.term(t);
    Ct.rightCols(n2) = embed(sys2.C).term(t);
    Dt = D2D1.term(t);
  }

  AffineLpvStateSpace out;
  out.A = AffineMatrixFunction(A0, Ac);
  out.B = AffineMatrixFunction(B0, Bc);
  out.C = AffineMatrixFunction(C0, Cc);
  out.D = AffineMatrixFunction(D0, Dc);
  out.polytope = poly;
  out.inputs = sys1.inputs;
  out.outputs = sys2.outputs;
  out.validate();
  return out;
}

}  // namespace incsyn
