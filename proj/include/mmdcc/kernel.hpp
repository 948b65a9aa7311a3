#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace mmdcc {

enum class KernelFamily { polynomial_scalar, rbf_vector };

// Kernel parameters. The polynomial family acts on scalar constraint values,
// k(a, b) = (scale*a*b + offset)^degree; the RBF family acts on
// uncertainty-space vectors and backs the reduced-set weight fits.
struct KernelSpec {
  KernelFamily family = KernelFamily::polynomial_scalar;
  int degree = 1;             // moment order d
  double offset = 1.0;        // c
  double scale = 1.0;         // gamma
  double rbf_bandwidth = 1.0; // rbf family only

  static KernelSpec polynomial(int degree, double offset = 1.0,
                               double scale = 1.0);
  static KernelSpec rbf(double bandwidth);
  void validate() const;  // throws std::invalid_argument
};

double poly_kernel(double a, double b, const KernelSpec& spec);
double rbf_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                  const KernelSpec& spec);

// entries(i, j) = k(xs[i], ys[j]); shape |xs| x |ys|
Eigen::MatrixXd gram(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                     const KernelSpec& spec);
Eigen::MatrixXd gram(const std::vector<Eigen::VectorXd>& xs,
                     const std::vector<Eigen::VectorXd>& ys,
                     const KernelSpec& spec);

// Bandwidth heuristic: median pairwise distance (1.0 for degenerate inputs).
double median_pairwise_distance(const std::vector<Eigen::VectorXd>& points);

// Conditioning factor for constraint values fed to polynomial kernels:
// median absolute value of the pooled samples, floored away from zero.
double robust_scale(std::span<const double> pooled);

}  // namespace mmdcc
