#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "mmdcc/kernel.hpp"

namespace mmdcc {

struct ReducedSetFit {
  Eigen::VectorXd weights;  // sums to 1
  double residual = 0.0;    // achieved squared embedding distance
  int source_size = 0;
  int reduced_size = 0;
  bool low_weight_warning = false;  // some weight < -0.1
};

// Re-weights `reduced` to best approximate the kernel mean of `full`:
//   min_a  a'K_rr a - 2 q'a + const   s.t.  1'a = 1,
// with q_i = mean_j k(reduced_i, full_j), solved through the KKT system with
// a Tikhonov term ridge*I on K_rr. The reported residual is the exact squared
// embedding distance at the returned weights.
//
// ridge: unset -> 1e-8 * trace(K_rr)/n; 0 -> 1e-10; otherwise as given.
ReducedSetFit solve_weights(const std::vector<Eigen::VectorXd>& full,
                            const std::vector<Eigen::VectorXd>& reduced,
                            const KernelSpec& spec,
                            std::optional<double> ridge = std::nullopt);

// Exact squared embedding distance between mean_j k(full_j, .) and
// sum_i weights_i k(reduced_i, .); shared by the fit and by tests.
double embedding_residual(const std::vector<Eigen::VectorXd>& full,
                          const std::vector<Eigen::VectorXd>& reduced,
                          const Eigen::VectorXd& weights,
                          const KernelSpec& spec);

namespace detail {
// KKT solve on an explicit Gram matrix; throws on a singular system.
Eigen::VectorXd solve_reduced_kkt(const Eigen::MatrixXd& K_rr,
                                  const Eigen::VectorXd& q, double ridge);
}

}  // namespace mmdcc
