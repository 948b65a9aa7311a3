#pragma once

#include <Eigen/Dense>

namespace mmdcc {

// value(u) = u' quad u + lin' u + constant, quad symmetric.
struct QuadraticObjective {
  Eigen::MatrixXd quad;
  Eigen::VectorXd lin;
  double constant = 0.0;

  static QuadraticObjective zero(int m) {
    return {Eigen::MatrixXd::Zero(m, m), Eigen::VectorXd::Zero(m), 0.0};
  }

  int dim() const { return static_cast<int>(lin.size()); }

  double value(const Eigen::VectorXd& u) const {
    return u.dot(quad * u) + lin.dot(u) + constant;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const {
    return (quad + quad.transpose()) * u + lin;
  }
};

inline QuadraticObjective operator+(const QuadraticObjective& a,
                                    const QuadraticObjective& b) {
  return {a.quad + b.quad, a.lin + b.lin, a.constant + b.constant};
}

inline QuadraticObjective operator*(double s, const QuadraticObjective& a) {
  return {s * a.quad, s * a.lin, s * a.constant};
}

// Least-squares objective 0.5 * ||A u + b||^2.
inline QuadraticObjective least_squares_objective(const Eigen::MatrixXd& A,
                                                  const Eigen::VectorXd& b) {
  return {0.5 * A.transpose() * A, A.transpose() * b, 0.5 * b.squaredNorm()};
}

// Largest-magnitude eigenvalue of a symmetric matrix by power iteration.
double largest_eigenvalue_power(const Eigen::MatrixXd& sym, int iters = 200);

}  // namespace mmdcc
