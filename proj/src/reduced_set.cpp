#include "mmdcc/reduced_set.hpp"

#include <cmath>
#include <stdexcept>

namespace mmdcc {

namespace detail {

Eigen::VectorXd solve_reduced_kkt(const Eigen::MatrixXd& K_rr,
                                  const Eigen::VectorXd& q, double ridge) {
  const Eigen::Index n = K_rr.rows();
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 1, n + 1);
  kkt.topLeftCorner(n, n) =
      2.0 * (K_rr + ridge * Eigen::MatrixXd::Identity(n, n));
  kkt.block(0, n, n, 1).setOnes();
  kkt.block(n, 0, 1, n).setOnes();
  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = 2.0 * q;
  rhs(n) = 1.0;

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
  const Eigen::VectorXd sol = lu.solve(rhs);
  const double rel_residual = (kkt * sol - rhs).norm() / std::max(1.0, rhs.norm());
  if (!sol.allFinite() || rel_residual > 1e-8)
    throw std::runtime_error(
        "reduced-set KKT system is singular; increase the ridge term");
  Eigen::VectorXd alpha = sol.head(n);
  if (std::abs(alpha.sum() - 1.0) > 1e-9)
    throw std::runtime_error(
        "reduced-set weights violate the sum constraint; increase the ridge term");
  return alpha;
}

}  // namespace detail

double embedding_residual(const std::vector<Eigen::VectorXd>& full,
                          const std::vector<Eigen::VectorXd>& reduced,
                          const Eigen::VectorXd& weights,
                          const KernelSpec& spec) {
  const double N = static_cast<double>(full.size());
  const Eigen::MatrixXd K_ff = gram(full, full, spec);
  const Eigen::MatrixXd K_rf = gram(reduced, full, spec);
  const Eigen::MatrixXd K_rr = gram(reduced, reduced, spec);
  const double c_ff = K_ff.sum() / (N * N);
  const Eigen::VectorXd q = K_rf.rowwise().mean();
  return c_ff - 2.0 * q.dot(weights) + weights.dot(K_rr * weights);
}

ReducedSetFit solve_weights(const std::vector<Eigen::VectorXd>& full,
                            const std::vector<Eigen::VectorXd>& reduced,
                            const KernelSpec& spec,
                            std::optional<double> ridge) {
  const std::size_t N = full.size();
  const std::size_t n = reduced.size();
  if (n == 0 || N == 0) throw std::invalid_argument("solve_weights: empty input");
  if (n > N)
    throw std::invalid_argument("solve_weights: reduced set larger than source");
  if (ridge.has_value() && *ridge < 0.0)
    throw std::invalid_argument("solve_weights: ridge must be >= 0");

  ReducedSetFit fit;
  fit.source_size = static_cast<int>(N);
  fit.reduced_size = static_cast<int>(n);

  if (n == 1) {
    fit.weights = Eigen::VectorXd::Ones(1);  // forced by the sum constraint
  } else {
    const Eigen::MatrixXd K_rr = gram(reduced, reduced, spec);
    const Eigen::MatrixXd K_rf = gram(reduced, full, spec);
    const Eigen::VectorXd q = K_rf.rowwise().mean();
    double r;
    if (!ridge.has_value()) {
      r = 1e-8 * K_rr.trace() / static_cast<double>(n);
    } else if (*ridge == 0.0) {
      r = 1e-10;
    } else {
      r = *ridge;
    }
    fit.weights = detail::solve_reduced_kkt(K_rr, q, r);
  }

  const double res = embedding_residual(full, reduced, fit.weights, spec);
  fit.residual = res < 0.0 ? 0.0 : res;
  fit.low_weight_warning = fit.weights.minCoeff() < -0.1;
  return fit;
}

}  // namespace mmdcc
