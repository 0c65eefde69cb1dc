#pragma once

#include <complex>
#include <vector>

#include "incsyn/common.hpp"

namespace incsyn {

/// SISO discrete-time rational function num(q)/den(q), coefficients stored
/// highest power first. Proper (deg num <= deg den).
class TransferFunction {
 public:
  TransferFunction(std::vector<double> num, std::vector<double> den);

  static TransferFunction gain(double k) { return TransferFunction({k}, {1.0}); }

  const std::vector<double>& num() const { return num_; }
  const std::vector<double>& den() const { return den_; }
  int order() const { return static_cast<int>(den_.size()) - 1; }

  std::complex<double> evaluate(std::complex<double> q) const;

  TransferFunction series(const TransferFunction& other) const;

  /// Removes factors (q - r) common to numerator and denominator, detected by
  /// synthetic division with remainder below tol. Exact cancellation on the
  /// coefficients, no root pairing heuristics beyond the divisibility test.
  TransferFunction cancelCommonFactors(double tol = 1e-9) const;

  /// Roots of the denominator (companion-matrix eigenvalues).
  std::vector<std::complex<double>> poles() const;

  /// Moves every pole with |p| within tol of 1 radially inward to (1-eps)|p|;
  /// returns the perturbed function and how many poles moved.
  std::pair<TransferFunction, int> perturbUnitCirclePoles(double eps, double tol = 1e-9) const;

  struct StateSpace {
    Matrix A, B, C, D;
    int order() const { return static_cast<int>(A.rows()); }
  };
  /// Controllable canonical realization.
  StateSpace realize() const;

 private:
  void normalize();
  std::vector<double> num_, den_;
};

/// C (qI - A)^{-1} B + D at q on the unit circle (or anywhere).
Eigen::MatrixXcd frequencyResponse(const Matrix& A, const Matrix& B, const Matrix& C,
                                   const Matrix& D, std::complex<double> q);

std::vector<double> polynomialMultiply(const std::vector<double>& a,
                                       const std::vector<double>& b);

/// Synthetic division of p by (q - r); returns {quotient, remainder}.
std::pair<std::vector<double>, double> divideByRoot(const std::vector<double>& p,
                                                    std::complex<double> r);

std::vector<std::complex<double>> polynomialRoots(const std::vector<double>& p);

}  // namespace incsyn
