#pragma once

#include <string>
#include <vector>

#include "incsyn/common.hpp"
#include "incsyn/polytope.hpp"

namespace incsyn {

/// M(rho) = M0 + sum_i rho_i * Mi, all coefficients sharing one shape.
class AffineMatrixFunction {
 public:
  AffineMatrixFunction() = default;
  explicit AffineMatrixFunction(Matrix constant);
  AffineMatrixFunction(Matrix constant, std::vector<Matrix> coefficients);

  static AffineMatrixFunction zero(int rows, int cols, int n_rho);

  int rows() const { return static_cast<int>(constant_.rows()); }
  int cols() const { return static_cast<int>(constant_.cols()); }
  int schedulingDim() const { return static_cast<int>(coefficients_.size()); }

  const Matrix& constant() const { return constant_; }
  const std::vector<Matrix>& coefficients() const { return coefficients_; }
  /// term(0) is the constant, term(i) the coefficient of rho_i.
  const Matrix& term(int i) const { return i == 0 ? constant_ : coefficients_[i - 1]; }

  bool isConstant(double tol = 0.0) const;

  Matrix evaluate(const Vector& rho) const;

  /// Extends the coefficient list with zero matrices up to n_rho terms.
  AffineMatrixFunction withSchedulingDim(int n_rho) const;

  AffineMatrixFunction transpose() const;
  AffineMatrixFunction operator+(const AffineMatrixFunction& o) const;
  AffineMatrixFunction operator-(const AffineMatrixFunction& o) const;
  AffineMatrixFunction scaled(double s) const;
  /// Constant-side products (these preserve affinity in rho).
  AffineMatrixFunction leftMultiply(const Matrix& m) const;   // m * f
  AffineMatrixFunction rightMultiply(const Matrix& m) const;  // f * m

  /// f * g, defined only when at least one factor is constant.
  AffineMatrixFunction multiply(const AffineMatrixFunction& o) const;

 private:
  Matrix constant_;
  std::vector<Matrix> coefficients_;
};

std::vector<Matrix> vertexImages(const AffineMatrixFunction& f, const SchedulingPolytope& p);

/// Named, contiguous partition of an index range (e.g. inputs split into w|u).
class ChannelLayout {
 public:
  ChannelLayout() = default;
  explicit ChannelLayout(std::vector<std::pair<std::string, int>> parts);

  int total() const { return total_; }
  int offset(const std::string& name) const;
  int size(const std::string& name) const;
  bool has(const std::string& name) const;
  const std::vector<std::pair<std::string, int>>& parts() const { return parts_; }

 private:
  std::vector<std::pair<std::string, int>> parts_;
  int total_ = 0;
};

/// State-space model with affine scheduling dependence over a vertex polytope.
struct AffineLpvStateSpace {
  AffineMatrixFunction A, B, C, D;
  SchedulingPolytope polytope = SchedulingPolytope::interval(0.0, 1.0);
  ChannelLayout inputs, outputs;

  int stateDim() const { return A.rows(); }
  int inputDim() const { return B.cols(); }
  int outputDim() const { return C.rows(); }

  void validate() const;

  Matrix inputSlice(const Matrix& m, const std::string& ch) const;
  Matrix outputSlice(const Matrix& m, const std::string& ch) const;
  AffineMatrixFunction inputSlice(const AffineMatrixFunction& f, const std::string& ch) const;
  AffineMatrixFunction outputSlice(const AffineMatrixFunction& f, const std::string& ch) const;

  /// Frozen LTI evaluation at a scheduling point.
  struct Frozen {
    Matrix A, B, C, D;
  };
  Frozen evaluate(const Vector& rho) const;
};

/// Series composition u -> sys1 -> sys2 -> y with stacked state (x1, x2).
/// Rejects compositions whose block products would be quadratic in rho.
AffineLpvStateSpace seriesInterconnect(const AffineLpvStateSpace& sys1,
                                       const AffineLpvStateSpace& sys2);

}  // namespace incsyn
