#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmdcc/objective.hpp"
#include "mmdcc/poly.hpp"

namespace mmdcc {

struct infeasible_baseline_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Bounds {
  Eigen::VectorXd lo, hi;

  static Bounds scalar(double lo, double hi) {
    return {Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi)};
  }
  static Bounds box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
    return {std::move(lo), std::move(hi)};
  }
  int dim() const { return static_cast<int>(lo.size()); }
};

struct SolverConfig {
  double rho1 = 1.0;
  double rho2 = 1.0;
  int degree = 2;           // kernel / moment order d
  double target_eta = 0.9;  // reporting and baseline defaults only
  Bounds bounds = Bounds::scalar(0.0, std::numeric_limits<double>::infinity());
  double grid_resolution = 1e-3;
  double horizon = 5.0;  // truncation for half-line bounds
  std::uint64_t seed = 0;

  void validate() const;
};

struct SolverReport {
  Eigen::VectorXd u_star;
  double objective_value = 0.0;  // rho1*mmd_value + rho2*cost_value
  double mmd_value = 0.0;
  double cost_value = 0.0;
  double rho1 = 0.0, rho2 = 1.0;
  double empirical_eta = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> per_constraint_eta;
  double mmd_scale = 1.0;
  // mean-variance baseline only: the two reported probability bounds
  double implied_eta_stated = std::numeric_limits<double>::quiet_NaN();
  double implied_eta_cantelli = std::numeric_limits<double>::quiet_NaN();
  int n = 0, n_w1 = 0, n_w2 = 0;
  long long holdout_pairs = 0;
  double wall_ms = 0.0;
  bool converged = true;
  std::string warning;
};

// Dense grid scan over the (horizon-truncated) bounds followed by Newton
// polish on the total objective; smallest u wins ties.
SolverReport minimize_univariate(const UnivariatePolyObjective& obj,
                                 const Polynomial& J, const SolverConfig& cfg);

// Projected gradient with fixed step 1/L on rho1*mmd + rho2*J over a box.
SolverReport minimize_box_quadratic(const QuadraticObjective& mmd,
                                    const QuadraticObjective& J,
                                    const SolverConfig& cfg);

// Projected gradient with backtracking for the general-degree affine MMD.
SolverReport minimize_box_smooth(const AffineMmdObjective& mmd,
                                 const QuadraticObjective& J,
                                 const SolverConfig& cfg);

// Scenario approximation over every provided sample pair (the large-n
// baseline); same interval machinery as the desired-distribution solver.
SolverReport baseline_scenario(const PolynomialChanceConstraint& constraint,
                               const std::vector<Eigen::VectorXd>& pool_w1,
                               const std::vector<Eigen::VectorXd>& pool_w2,
                               const Polynomial& J, const SolverConfig& cfg);

// Sample-average approximation: lowest-J grid point whose satisfied fraction
// over the n^2 sample pairs reaches gamma.
SolverReport baseline_saa(const PolynomialChanceConstraint& constraint,
                          const std::vector<Eigen::VectorXd>& pool_w1,
                          const std::vector<Eigen::VectorXd>& pool_w2,
                          const Polynomial& J, double gamma,
                          const SolverConfig& cfg);

// Mean-variance surrogate E[f] + eps*sqrt(Var[f]) <= 0 with sample-grid
// moments expressed as polynomials in u; reports both probability bounds.
SolverReport baseline_mean_var(const PolynomialChanceConstraint& constraint,
                               const std::vector<Eigen::VectorXd>& pool_w1,
                               const std::vector<Eigen::VectorXd>& pool_w2,
                               double epsilon, const Polynomial& J,
                               const SolverConfig& cfg);

// E[f](u) and E[f^2](u) over the sample grid as polynomials (test oracle
// surface for the mean-variance baseline).
std::pair<Polynomial, Polynomial> mean_var_polynomials(
    const PolynomialChanceConstraint& constraint,
    const std::vector<Eigen::VectorXd>& pool_w1,
    const std::vector<Eigen::VectorXd>& pool_w2);

// Precomputed coefficient grids over all sample pairs for scanning the
// satisfied fraction #{f <= 0}/n^2 across many decision values.
class SatisfactionGrid {
 public:
  SatisfactionGrid(const PolynomialChanceConstraint& constraint,
                   const std::vector<Eigen::VectorXd>& pool_w1,
                   const std::vector<Eigen::VectorXd>& pool_w2);
  double fraction(double u) const;
  std::size_t pairs() const { return size_; }

 private:
  std::vector<Eigen::VectorXd> grids_;
  std::size_t size_ = 0;
};

enum class Pairing { grid, paired };

// Fraction of held-out evaluations with f <= 0 at the given decision.
double validate_eta(const PolynomialChanceConstraint& constraint, double u,
                    const std::vector<Eigen::VectorXd>& holdout_w1,
                    const std::vector<Eigen::VectorXd>& holdout_w2, Pairing pairing);
double validate_eta(const AffineChanceConstraint& constraint,
                    const Eigen::VectorXd& u,
                    const std::vector<Eigen::VectorXd>& holdout_w1,
                    const std::vector<Eigen::VectorXd>& holdout_w2, Pairing pairing);

// eps such that Cantelli's bound eps^2/(1+eps^2) equals eta.
double cantelli_epsilon(double eta);
double eta_bound_stated(double eps);    // eps/(1+eps^2), as stated
double eta_bound_cantelli(double eps);  // eps^2/(1+eps^2)

}  // namespace mmdcc
