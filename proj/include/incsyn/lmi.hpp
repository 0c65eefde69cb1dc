#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "incsyn/common.hpp"
#include "incsyn/lpv_model.hpp"
#include "incsyn/polytope.hpp"

namespace incsyn {

/// Scalar affine form c0 + sum_i c_i * y_i over the registry's scalar vector.
struct AffineScalar {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;  // sorted by index, merged

  AffineScalar() = default;
  explicit AffineScalar(double c) : constant(c) {}
  static AffineScalar variable(int index, double coeff = 1.0);

  bool isConstant() const { return terms.empty(); }
  double evaluate(const Vector& y) const;

  AffineScalar& operator+=(const AffineScalar& o);
  AffineScalar operator*(double s) const;
  AffineScalar operator-() const { return *this * -1.0; }
};

AffineScalar operator+(AffineScalar a, const AffineScalar& b);
AffineScalar operator-(AffineScalar a, const AffineScalar& b);
/// Throws AffineClosureError when both factors carry decision variables.
AffineScalar operator*(const AffineScalar& a, const AffineScalar& b);

/// Dense matrix of affine scalars; the modeling currency for LMI assembly.
class MatrixExpr {
 public:
  MatrixExpr() = default;
  MatrixExpr(int rows, int cols);
  static MatrixExpr constant(const Matrix& m);
  static MatrixExpr identity(int n) { return constant(Matrix::Identity(n, n)); }
  static MatrixExpr zero(int rows, int cols) { return MatrixExpr(rows, cols); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  AffineScalar& at(int i, int j) { return entries_[static_cast<std::size_t>(i) * cols_ + j]; }
  const AffineScalar& at(int i, int j) const {
    return entries_[static_cast<std::size_t>(i) * cols_ + j];
  }

  bool isConstant() const;
  Matrix constantPart() const;
  Matrix evaluate(const Vector& y) const;

  MatrixExpr transpose() const;
  MatrixExpr block(int i0, int j0, int r, int c) const;
  void assign(int i0, int j0, const MatrixExpr& sub);

  /// Stacks a rectangular grid of blocks; row heights / column widths must agree.
  static MatrixExpr fromBlocks(const std::vector<std::vector<MatrixExpr>>& blocks);

  friend MatrixExpr operator+(const MatrixExpr& a, const MatrixExpr& b);
  friend MatrixExpr operator-(const MatrixExpr& a, const MatrixExpr& b);
  friend MatrixExpr operator*(double s, const MatrixExpr& a);
  friend MatrixExpr operator*(const MatrixExpr& a, const MatrixExpr& b);
  friend MatrixExpr operator*(const Matrix& m, const MatrixExpr& a);
  friend MatrixExpr operator*(const MatrixExpr& a, const Matrix& m);

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<AffineScalar> entries_;
};

enum class VarShape { Symmetric, Rectangular };

struct VariableInfo {
  std::string name;
  VarShape shape;
  int rows, cols;
  int offset;  // first scalar index
  int scalarCount() const {
    return shape == VarShape::Symmetric ? rows * (rows + 1) / 2 : rows * cols;
  }
};

/// A system of affine matrix inequalities F_k(y) > 0 over named matrix
/// variables, with an optional linear objective.
class LmiSystem {
 public:
  int addSymmetric(const std::string& name, int n);
  int addRectangular(const std::string& name, int rows, int cols);
  /// 1x1 rectangular convenience.
  int addScalar(const std::string& name) { return addRectangular(name, 1, 1); }

  MatrixExpr var(int id) const;
  MatrixExpr var(const std::string& name) const;
  AffineScalar scalarVar(int id) const;

  /// expr must be symmetric up to 1e-12 in its affine coefficients; it is
  /// symmetrized and required positive definite (the solver enforces a
  /// delta_feas slack). Linearity in the decision variables is re-verified by
  /// probing value(a + b) = value(a) + value(b) - value(0).
  void addConstraint(const std::string& name, const MatrixExpr& expr);

  void setObjective(const AffineScalar& objective);  // minimized
  const std::optional<AffineScalar>& objective() const { return objective_; }

  int scalarCount() const { return scalar_count_; }
  const std::vector<VariableInfo>& variables() const { return variables_; }
  const VariableInfo& variable(const std::string& name) const;

  struct CompiledConstraint {
    std::string name;
    Matrix F0;
    std::vector<std::pair<int, Matrix>> coeffs;  // scalar index -> coefficient
    int dim() const { return static_cast<int>(F0.rows()); }
    Matrix evaluate(const Vector& y) const;
  };
  const std::vector<CompiledConstraint>& constraints() const { return constraints_; }

  Matrix value(const std::string& name, const Vector& y) const;

  /// Sparse SDPA-like dump of min c'x s.t. sum x_i F_i - F_0 >= 0 (blocks).
  void writeSdpaSparse(std::ostream& os) const;

 private:
  int addVariable(const std::string& name, VarShape shape, int rows, int cols);

  std::vector<VariableInfo> variables_;
  std::map<std::string, int> by_name_;
  std::vector<CompiledConstraint> constraints_;
  std::optional<AffineScalar> objective_;
  int scalar_count_ = 0;
};

/// Expands a rho-parameterized constraint template into one constraint per
/// polytope vertex. The template must be affine in rho (probed on vertex-pair
/// midpoints; curvature is rejected with the probe residual). Identical
/// vertex images are deduplicated.
std::vector<MatrixExpr> enforceOnVertices(
    const std::function<MatrixExpr(const Vector&)>& constraint_template,
    const SchedulingPolytope& polytope, double probe_tol = 1e-9);

}  // namespace incsyn
