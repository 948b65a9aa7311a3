#pragma once

#include <cstddef>
#include <vector>

namespace mmdcc {

// Dense univariate polynomial, coefficients in ascending degree order.
struct Polynomial {
  std::vector<double> coeffs;  // coeffs[k] * u^k; empty means zero

  Polynomial() = default;
  explicit Polynomial(std::vector<double> c) : coeffs(std::move(c)) {}
  static Polynomial constant(double v) { return Polynomial({v}); }

  // highest index with a coefficient above 1e-12 relative to the largest one
  int degree() const;
  bool is_zero() const { return degree() < 0; }

  double operator()(double u) const;  // Horner
  Polynomial derivative() const;
};

Polynomial operator+(const Polynomial& a, const Polynomial& b);
Polynomial operator-(const Polynomial& a, const Polynomial& b);
Polynomial operator*(const Polynomial& a, const Polynomial& b);
Polynomial operator*(double s, const Polynomial& a);
Polynomial& operator+=(Polynomial& a, const Polynomial& b);

// Real roots inside [lo, hi] (inclusive), ascending. Closed forms through
// degree 2, companion-matrix eigenvalues above that.
std::vector<double> real_roots_in(const Polynomial& p, double lo, double hi);

}  // namespace mmdcc
