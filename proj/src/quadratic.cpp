#include "mmdcc/quadratic.hpp"

#include <cmath>

namespace mmdcc {

double largest_eigenvalue_power(const Eigen::MatrixXd& sym, int iters) {
  const Eigen::Index n = sym.rows();
  if (n == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
  double lambda = 0.0;
  for (int k = 0; k < iters; ++k) {
    Eigen::VectorXd w = sym * v;
    const double norm = w.norm();
    if (norm < 1e-300) return 0.0;
    v = w / norm;
    const double next = v.dot(sym * v);
    if (std::abs(next - lambda) <= 1e-14 * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::abs(lambda);
}

}  // namespace mmdcc
