#include "incsyn/lti.hpp"

#include <algorithm>
#include <cmath>

namespace incsyn {

std::vector<double> polynomialMultiply(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

std::pair<std::vector<double>, double> divideByRoot(const std::vector<double>& p,
                                                    std::complex<double> r) {
  // real synthetic division; r must be (numerically) real
  std::vector<double> q(p.size() - 1);
  double carry = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    carry = p[i] + carry * r.real();
    q[i] = carry;
  }
  double rem = p.back() + carry * r.real();
  return {q, rem};
}

std::vector<std::complex<double>> polynomialRoots(const std::vector<double>& p) {
  // strip leading zeros
  std::size_t first = 0;
  while (first + 1 < p.size() && p[first] == 0.0) ++first;
  const int n = static_cast<int>(p.size() - first) - 1;
  if (n <= 0) return {};
  Matrix comp = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) comp(0, i) = -p[first + 1 + i] / p[first];
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  Eigen::EigenSolver<Matrix> es(comp);
  std::vector<std::complex<double>> roots;
  for (int i = 0; i < n; ++i) roots.push_back(es.eigenvalues()[i]);
  std::sort(roots.begin(), roots.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return roots;
}

TransferFunction::TransferFunction(std::vector<double> num, std::vector<double> den)
    : num_(std::move(num)), den_(std::move(den)) {
  normalize();
}

void TransferFunction::normalize() {
  auto strip = [](std::vector<double>& p) {
    std::size_t first = 0;
    while (first + 1 < p.size() && p[first] == 0.0) ++first;
    p.erase(p.begin(), p.begin() + first);
  };
  if (num_.empty() || den_.empty()) throw Error("TransferFunction: empty polynomial");
  strip(num_);
  strip(den_);
  if (den_.size() == 1 && den_[0] == 0.0) throw Error("TransferFunction: zero denominator");
  if (num_.size() > den_.size()) throw Error("TransferFunction: improper (deg num > deg den)");
}

std::complex<double> TransferFunction::evaluate(std::complex<double> q) const {
  auto horner = [&q](const std::vector<double>& p) {
    std::complex<double> v = 0.0;
    for (double c : p) v = v * q + c;
    return v;
  };
  return horner(num_) / horner(den_);
}

TransferFunction TransferFunction::series(const TransferFunction& other) const {
  return TransferFunction(polynomialMultiply(num_, other.num_),
                          polynomialMultiply(den_, other.den_));
}

TransferFunction TransferFunction::cancelCommonFactors(double tol) const {
  std::vector<double> num = num_, den = den_;
  bool changed = true;
  while (changed && den.size() > 1 && num.size() > 1) {
    changed = false;
    for (const auto& r : polynomialRoots(den)) {
      double scale_n = *std::max_element(num.begin(), num.end(),
                                         [](double a, double b) { return std::abs(a) < std::abs(b); });
      double scale_d = *std::max_element(den.begin(), den.end(),
                                         [](double a, double b) { return std::abs(a) < std::abs(b); });
      if (std::abs(r.imag()) <= tol * (1.0 + std::abs(r.real()))) {
        auto [qn, rn] = divideByRoot(num, r);
        auto [qd, rd] = divideByRoot(den, r);
        if (std::abs(rn) <= tol * std::max(1.0, std::abs(scale_n)) &&
            std::abs(rd) <= tol * std::max(1.0, std::abs(scale_d))) {
          num = qn;
          den = qd;
          changed = true;
          break;
        }
      }
    }
  }
  return TransferFunction(num, den);
}

std::vector<std::complex<double>> TransferFunction::poles() const {
  return polynomialRoots(den_);
}

std::pair<TransferFunction, int> TransferFunction::perturbUnitCirclePoles(double eps,
                                                                          double tol) const {
  auto roots = poles();
  int moved = 0;
  for (auto& r : roots) {
    if (std::abs(std::abs(r) - 1.0) <= tol) {
      r *= (1.0 - eps);
      ++moved;
    }
  }
  if (moved == 0) return {*this, 0};
  // rebuild the real denominator from the (conjugate-symmetric) root set
  std::vector<std::complex<double>> poly = {den_[0]};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= poly[i] * r;
    }
    poly = std::move(next);
  }
  std::vector<double> den(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (std::abs(poly[i].imag()) > 1e-9 * (1.0 + std::abs(poly[i].real())))
      throw Error("perturbUnitCirclePoles: perturbed polynomial is not real");
    den[i] = poly[i].real();
  }
  return {TransferFunction(num_, den), moved};
}

TransferFunction::StateSpace TransferFunction::realize() const {
  const int n = order();
  // monic denominator, numerator padded to the same length
  std::vector<double> den = den_, num(den_.size(), 0.0);
  std::copy(num_.begin(), num_.end(), num.end() - num_.size());
  for (auto& c : num) c /= den_[0];
  for (auto& c : den) c /= den_[0];

  StateSpace ss;
  ss.A = Matrix::Zero(n, n);
  ss.B = Matrix::Zero(n, 1);
  ss.C = Matrix::Zero(1, n);
  ss.D = Matrix::Zero(1, 1);
  ss.D(0, 0) = num[0];
  if (n == 0) return ss;
  for (int i = 0; i < n; ++i) ss.A(0, i) = -den[i + 1];
  for (int i = 1; i < n; ++i) ss.A(i, i - 1) = 1.0;
  ss.B(0, 0) = 1.0;
  for (int i = 0; i < n; ++i) ss.C(0, i) = num[i + 1] - den[i + 1] * num[0];
  return ss;
}

Eigen::MatrixXcd frequencyResponse(const Matrix& A, const Matrix& B, const Matrix& C,
                                   const Matrix& D, std::complex<double> q) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXcd M = q * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>();
  return C.cast<std::complex<double>>() * M.lu().solve(B.cast<std::complex<double>>()) +
         D.cast<std::complex<double>>();
}

}  // namespace incsyn
