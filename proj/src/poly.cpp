#include "mmdcc/poly.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace mmdcc {

int Polynomial::degree() const {
  double top = 0.0;
  for (const double c : coeffs) top = std::max(top, std::abs(c));
  if (top == 0.0) return -1;
  for (std::size_t k = coeffs.size(); k-- > 0;) {
    if (std::abs(coeffs[k]) > 1e-12 * top) return static_cast<int>(k);
  }
  return -1;
}

double Polynomial::operator()(double u) const {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * u + coeffs[k];
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs.size() <= 1) return Polynomial();
  std::vector<double> d(coeffs.size() - 1);
  for (std::size_t k = 1; k < coeffs.size(); ++k)
    d[k - 1] = static_cast<double>(k) * coeffs[k];
  return Polynomial(std::move(d));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
  for (std::size_t k = 0; k < a.coeffs.size(); ++k) c[k] += a.coeffs[k];
  for (std::size_t k = 0; k < b.coeffs.size(); ++k) c[k] += b.coeffs[k];
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
  for (std::size_t k = 0; k < a.coeffs.size(); ++k) c[k] += a.coeffs[k];
  for (std::size_t k = 0; k < b.coeffs.size(); ++k) c[k] -= b.coeffs[k];
  return Polynomial(std::move(c));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.coeffs.empty() || b.coeffs.empty()) return Polynomial();
  std::vector<double> c(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs.size(); ++j)
      c[i + j] += a.coeffs[i] * b.coeffs[j];
  return Polynomial(std::move(c));
}

Polynomial operator*(double s, const Polynomial& a) {
  Polynomial r = a;
  for (double& c : r.coeffs) c *= s;
  return r;
}

Polynomial& operator+=(Polynomial& a, const Polynomial& b) {
  a = a + b;
  return a;
}

namespace {

// stable quadratic roots of a u^2 + b u + c = 0, a != 0
std::vector<double> quadratic_roots(double a, double b, double c) {
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return {};
  if (disc == 0.0) return {-b / (2.0 * a)};
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0 ? sq : -sq));
  double r1 = q / a;
  double r2 = (q != 0.0) ? c / q : -b / a - r1;
  if (r1 > r2) std::swap(r1, r2);
  return {r1, r2};
}

}  // namespace

std::vector<double> real_roots_in(const Polynomial& p, double lo, double hi) {
  const int deg = p.degree();
  std::vector<double> roots;
  if (deg <= 0) return roots;
  if (deg == 1) {
    roots.push_back(-p.coeffs[0] / p.coeffs[1]);
  } else if (deg == 2) {
    roots = quadratic_roots(p.coeffs[2], p.coeffs[1], p.coeffs[0]);
  } else {
    const std::size_t n = static_cast<std::size_t>(deg);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const double lead = p.coeffs[n];
    for (std::size_t k = 0; k < n; ++k) {
      companion(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n - 1)) =
          -p.coeffs[k] / lead;
      if (k + 1 < n)
        companion(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(k)) = 1.0;
    }
    const Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    const auto vals = es.eigenvalues();
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
      const double re = vals(i).real();
      const double im = vals(i).imag();
      if (std::abs(im) <= 1e-9 * std::max(1.0, std::abs(re))) roots.push_back(re);
    }
  }
  std::vector<double> inside;
  for (const double r : roots)
    if (r >= lo && r <= hi) inside.push_back(r);
  std::sort(inside.begin(), inside.end());
  return inside;
}

}  // namespace mmdcc
