#include "incsyn/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace incsyn {

AffineScalar AffineScalar::variable(int index, double coeff) {
  AffineScalar s;
  if (coeff != 0.0) s.terms.push_back({index, coeff});
  return s;
}

double AffineScalar::evaluate(const Vector& y) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * y[i];
  return v;
}

AffineScalar& AffineScalar::operator+=(const AffineScalar& o) {
  constant += o.constant;
  if (o.terms.empty()) return *this;
  std::vector<std::pair<int, double>> merged;
  merged.reserve(terms.size() + o.terms.size());
  std::size_t a = 0, b = 0;
  while (a < terms.size() || b < o.terms.size()) {
    if (b == o.terms.size() || (a < terms.size() && terms[a].first < o.terms[b].first)) {
      merged.push_back(terms[a++]);
    } else if (a == terms.size() || o.terms[b].first < terms[a].first) {
      merged.push_back(o.terms[b++]);
    } else {
      double c = terms[a].second + o.terms[b].second;
      if (c != 0.0) merged.push_back({terms[a].first, c});
      ++a;
      ++b;
    }
  }
  terms = std::move(merged);
  return *this;
}

AffineScalar AffineScalar::operator*(double s) const {
  AffineScalar out;
  out.constant = constant * s;
  if (s != 0.0) {
    out.terms = terms;
    for (auto& [i, c] : out.terms) c *= s;
  }
  return out;
}

AffineScalar operator+(AffineScalar a, const AffineScalar& b) {
  a += b;
  return a;
}

AffineScalar operator-(AffineScalar a, const AffineScalar& b) {
  a += b * -1.0;
  return a;
}

AffineScalar operator*(const AffineScalar& a, const AffineScalar& b) {
  if (!a.isConstant() && !b.isConstant())
    throw AffineClosureError("product of two variable-bearing scalar expressions");
  if (a.isConstant()) return b * a.constant;
  return a * b.constant;
}

MatrixExpr::MatrixExpr(int rows, int cols)
    : rows_(rows), cols_(cols), entries_(static_cast<std::size_t>(rows) * cols) {}

MatrixExpr MatrixExpr::constant(const Matrix& m) {
  MatrixExpr e(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < e.rows_; ++i)
    for (int j = 0; j < e.cols_; ++j) e.at(i, j) = AffineScalar(m(i, j));
  return e;
}

bool MatrixExpr::isConstant() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const AffineScalar& s) { return s.isConstant(); });
}

Matrix MatrixExpr::constantPart() const {
  Matrix m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = at(i, j).constant;
  return m;
}

Matrix MatrixExpr::evaluate(const Vector& y) const {
  Matrix m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = at(i, j).evaluate(y);
  return m;
}

MatrixExpr MatrixExpr::transpose() const {
  MatrixExpr out(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out.at(j, i) = at(i, j);
  return out;
}

MatrixExpr MatrixExpr::block(int i0, int j0, int r, int c) const {
  if (i0 < 0 || j0 < 0 || i0 + r > rows_ || j0 + c > cols_)
    throw DimensionError("MatrixExpr::block out of range");
  MatrixExpr out(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out.at(i, j) = at(i0 + i, j0 + j);
  return out;
}

void MatrixExpr::assign(int i0, int j0, const MatrixExpr& sub) {
  if (i0 + sub.rows() > rows_ || j0 + sub.cols() > cols_)
    throw DimensionError("MatrixExpr::assign out of range");
  for (int i = 0; i < sub.rows(); ++i)
    for (int j = 0; j < sub.cols(); ++j) at(i0 + i, j0 + j) = sub.at(i, j);
}

MatrixExpr MatrixExpr::fromBlocks(const std::vector<std::vector<MatrixExpr>>& blocks) {
  if (blocks.empty()) throw DimensionError("fromBlocks: empty grid");
  std::vector<int> row_h(blocks.size(), -1), col_w(blocks[0].size(), -1);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].size() != blocks[0].size()) throw DimensionError("fromBlocks: ragged grid");
    for (std::size_t j = 0; j < blocks[i].size(); ++j) {
      const MatrixExpr& b = blocks[i][j];
      if (row_h[i] < 0) row_h[i] = b.rows();
      if (col_w[j] < 0) col_w[j] = b.cols();
      if (b.rows() != row_h[i] || b.cols() != col_w[j])
        throw DimensionError("fromBlocks: inconsistent block shapes");
    }
  }
  int total_r = 0, total_c = 0;
  for (int h : row_h) total_r += h;
  for (int w : col_w) total_c += w;
  MatrixExpr out(total_r, total_c);
  int i0 = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    int j0 = 0;
    for (std::size_t j = 0; j < blocks[i].size(); ++j) {
      out.assign(i0, j0, blocks[i][j]);
      j0 += col_w[j];
    }
    i0 += row_h[i];
  }
  return out;
}

MatrixExpr operator+(const MatrixExpr& a, const MatrixExpr& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("MatrixExpr +: shape mismatch");
  MatrixExpr out = a;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.at(i, j) += b.at(i, j);
  return out;
}

MatrixExpr operator-(const MatrixExpr& a, const MatrixExpr& b) { return a + (-1.0 * b); }

MatrixExpr operator*(double s, const MatrixExpr& a) {
  MatrixExpr out = a;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.at(i, j) = a.at(i, j) * s;
  return out;
}

MatrixExpr operator*(const MatrixExpr& a, const MatrixExpr& b) {
  if (a.cols() != b.rows()) throw DimensionError("MatrixExpr *: inner dimension mismatch");
  MatrixExpr out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      AffineScalar acc;
      for (int k = 0; k < a.cols(); ++k) acc += a.at(i, k) * b.at(k, j);
      out.at(i, j) = acc;
    }
  return out;
}

MatrixExpr operator*(const Matrix& m, const MatrixExpr& a) {
  return MatrixExpr::constant(m) * a;
}

MatrixExpr operator*(const MatrixExpr& a, const Matrix& m) {
  return a * MatrixExpr::constant(m);
}

int LmiSystem::addVariable(const std::string& name, VarShape shape, int rows, int cols) {
  if (by_name_.count(name)) throw Error("LmiSystem: duplicate variable '" + name + "'");
  if (rows <= 0 || cols <= 0) throw DimensionError("LmiSystem: variable dims must be positive");
  VariableInfo info{name, shape, rows, cols, scalar_count_};
  scalar_count_ += info.scalarCount();
  variables_.push_back(info);
  by_name_[name] = static_cast<int>(variables_.size()) - 1;
  return static_cast<int>(variables_.size()) - 1;
}

int LmiSystem::addSymmetric(const std::string& name, int n) {
  return addVariable(name, VarShape::Symmetric, n, n);
}

int LmiSystem::addRectangular(const std::string& name, int rows, int cols) {
  return addVariable(name, VarShape::Rectangular, rows, cols);
}

MatrixExpr LmiSystem::var(int id) const {
  const VariableInfo& info = variables_.at(id);
  MatrixExpr out(info.rows, info.cols);
  if (info.shape == VarShape::Symmetric) {
    int k = info.offset;
    for (int i = 0; i < info.rows; ++i)
      for (int j = i; j < info.cols; ++j) {
        out.at(i, j) = AffineScalar::variable(k);
        out.at(j, i) = AffineScalar::variable(k);
        ++k;
      }
  } else {
    int k = info.offset;
    for (int i = 0; i < info.rows; ++i)
      for (int j = 0; j < info.cols; ++j) out.at(i, j) = AffineScalar::variable(k++);
  }
  return out;
}

MatrixExpr LmiSystem::var(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw Error("LmiSystem: no variable named '" + name + "'");
  return var(it->second);
}

AffineScalar LmiSystem::scalarVar(int id) const {
  const VariableInfo& info = variables_.at(id);
  if (info.rows != 1 || info.cols != 1) throw Error("scalarVar: variable is not 1x1");
  return AffineScalar::variable(info.offset);
}

const VariableInfo& LmiSystem::variable(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw Error("LmiSystem: no variable named '" + name + "'");
  return variables_[it->second];
}

Matrix LmiSystem::CompiledConstraint::evaluate(const Vector& y) const {
  Matrix F = F0;
  for (const auto& [i, M] : coeffs) F += y[i] * M;
  return F;
}

void LmiSystem::addConstraint(const std::string& name, const MatrixExpr& expr) {
  if (expr.rows() != expr.cols()) throw DimensionError("constraint '" + name + "' is not square");
  const int d = expr.rows();

  // symmetry check on the affine data itself
  double scale = 1e-300;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      scale = std::max(scale, std::abs(expr.at(i, j).constant));
      for (const auto& [idx, c] : expr.at(i, j).terms) {
        (void)idx;
        scale = std::max(scale, std::abs(c));
      }
    }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      AffineScalar diff = expr.at(i, j) - expr.at(j, i);
      double asym = std::abs(diff.constant);
      for (const auto& [idx, c] : diff.terms) {
        (void)idx;
        asym = std::max(asym, std::abs(c));
      }
      if (asym > 1e-12 * std::max(1.0, scale))
        throw Error("constraint '" + name + "' is asymmetric (residual " + std::to_string(asym) +
                    ")");
    }

  CompiledConstraint cc;
  cc.name = name;
  cc.F0 = Matrix::Zero(d, d);
  std::map<int, Matrix> coeff_map;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const AffineScalar& s = expr.at(i, j);
      cc.F0(i, j) = s.constant;
      for (const auto& [idx, c] : s.terms) {
        auto [it, inserted] = coeff_map.try_emplace(idx, Matrix::Zero(d, d));
        it->second(i, j) += c;
      }
    }
  cc.F0 = 0.5 * (cc.F0 + cc.F0.transpose()).eval();
  for (auto& [idx, M] : coeff_map) {
    M = 0.5 * (M + M.transpose()).eval();
    cc.coeffs.push_back({idx, M});
  }

  // linearity probe: value at a+b equals value(a) + value(b) - value(0)
  {
    Vector a = Vector::Zero(scalar_count_), b = Vector::Zero(scalar_count_);
    for (int i = 0; i < scalar_count_; ++i) {
      a[i] = 0.5 + 0.01 * i;
      b[i] = -1.25 + 0.007 * i;
    }
    Matrix lhs = cc.evaluate(a + b);
    Matrix rhs = cc.evaluate(a) + cc.evaluate(b) - cc.F0;
    if (maxAbs(lhs - rhs) > 1e-9 * std::max(1.0, maxAbs(lhs)))
      throw Error("constraint '" + name + "' failed the linearity probe");
  }

  constraints_.push_back(std::move(cc));
}

void LmiSystem::setObjective(const AffineScalar& objective) { objective_ = objective; }

Matrix LmiSystem::value(const std::string& name, const Vector& y) const {
  return var(name).evaluate(y);
}

void LmiSystem::writeSdpaSparse(std::ostream& os) const {
  // min c'x s.t. sum_i x_i F_i - F0 >= 0 in block-diagonal form
  os << "\" incsyn LMI dump\n";
  os << scalar_count_ << " = mDIM\n";
  os << constraints_.size() << " = nBLOCK\n";
  for (std::size_t k = 0; k < constraints_.size(); ++k)
    os << constraints_[k].dim() << (k + 1 == constraints_.size() ? "\n" : " ");
  Vector c = Vector::Zero(scalar_count_);
  if (objective_)
    for (const auto& [i, v] : objective_->terms) c[i] = v;
  for (int i = 0; i < scalar_count_; ++i) os << c[i] << (i + 1 == scalar_count_ ? "\n" : " ");
  auto emit = [&os](int matno, int blkno, const Matrix& M) {
    for (int i = 0; i < M.rows(); ++i)
      for (int j = i; j < M.cols(); ++j)
        if (M(i, j) != 0.0)
          os << matno << " " << blkno << " " << i + 1 << " " << j + 1 << " " << M(i, j) << "\n";
  };
  for (std::size_t k = 0; k < constraints_.size(); ++k) {
    emit(0, static_cast<int>(k) + 1, -constraints_[k].F0);
    for (const auto& [idx, M] : constraints_[k].coeffs)
      emit(idx + 1, static_cast<int>(k) + 1, M);
  }
}

std::vector<MatrixExpr> enforceOnVertices(
    const std::function<MatrixExpr(const Vector&)>& constraint_template,
    const SchedulingPolytope& polytope, double probe_tol) {
  const auto& verts = polytope.vertices();
  std::vector<MatrixExpr> images;
  images.reserve(verts.size());
  for (const Vector& v : verts) images.push_back(constraint_template(v));

  auto coeffNorm = [](const MatrixExpr& e) {
    double n = 0.0;
    for (int i = 0; i < e.rows(); ++i)
      for (int j = 0; j < e.cols(); ++j) {
        n = std::max(n, std::abs(e.at(i, j).constant));
        for (const auto& [idx, c] : e.at(i, j).terms) {
          (void)idx;
          n = std::max(n, std::abs(c));
        }
      }
    return n;
  };

  // affinity probe along every vertex pair
  double scale = 1e-300;
  for (const MatrixExpr& e : images) scale = std::max(scale, coeffNorm(e));
  for (std::size_t a = 0; a < verts.size(); ++a)
    for (std::size_t b = a + 1; b < verts.size(); ++b) {
      Vector mid = 0.5 * (verts[a] + verts[b]);
      MatrixExpr probe = constraint_template(mid) - 0.5 * (images[a] + images[b]);
      double resid = coeffNorm(probe);
      if (resid > probe_tol * scale)
        throw Error("constraint template is not affine in rho (probe residual " +
                    std::to_string(resid) + ")");
    }

  // deduplicate identical images (constant templates collapse to one)
  std::vector<MatrixExpr> out;
  for (const MatrixExpr& e : images) {
    bool dup = false;
    for (const MatrixExpr& seen : out)
      if (coeffNorm(e - seen) <= 1e-14 * scale) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(e);
  }
  return out;
}

}  // namespace incsyn
