#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mmdcc/constraint.hpp"
#include "mmdcc/kernel.hpp"
#include "mmdcc/poly.hpp"
#include "mmdcc/quadratic.hpp"

namespace mmdcc {

// Scenario constraints admit no feasible decision; callers retry with a
// different subset draw.
struct infeasible_scenario_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kViolationTolerance = 1e-9;

// Chosen scenario subsets C_w1, C_w2.
struct ScenarioSets {
  std::vector<Eigen::VectorXd> w1, w2;
};

// Scenario-constructed target distribution of constraint values: every stored
// value satisfies f <= kViolationTolerance at u_nom and the weights (outer
// products of the reduced-set weights) sum to 1.
struct DesiredDistribution {
  Eigen::VectorXd values;   // f(w1^i, w2^j, u_nom), row-major over (i, j)
  Eigen::VectorXd weights;  // lambda_i * xi_j, same order
  Eigen::VectorXd u_nom;    // size 1 for scalar decisions
  ScenarioSets sources;
  bool weight_warning = false;  // some weight < -0.1

  double max_value() const { return values.maxCoeff(); }
};

// Draws `trials` random subset pairs and returns the one with the smallest
// summed hinge violation sum_ij max(0, f(w1^i, w2^j, probe_u)); ties break on
// the lexicographically smallest (sorted) index tuple.
ScenarioSets select_scenario_sets(const PolynomialChanceConstraint& constraint,
                                  const std::vector<Eigen::VectorXd>& pool_w1,
                                  const std::vector<Eigen::VectorXd>& pool_w2,
                                  int n_w1, int n_w2, int trials, double probe_u,
                                  std::uint64_t seed);

// Scalar decision (constraint order <= 2): every pair constraint reduces to a
// union of intervals; their intersection is scanned analytically for the
// minimizer of J. `hi` may be +infinity when J is coercive on that side.
double solve_scenario(const PolynomialChanceConstraint& constraint,
                      const ScenarioSets& sets, const Polynomial& J, double lo,
                      double hi);
// Joint variant: one decision, several constraints each with its own sets.
double solve_scenario(const std::vector<PolynomialChanceConstraint>& constraints,
                      const std::vector<ScenarioSets>& sets, const Polynomial& J,
                      double lo, double hi);

// Vector decision, affine constraints: projected gradient on J with
// feasibility restoration over the scenario half-spaces and the box.
Eigen::VectorXd solve_scenario(const std::vector<AffineChanceConstraint>& constraints,
                               const ScenarioSets& sets, const QuadraticObjective& J,
                               const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

// Builds the desired distribution at a solved u_nom. When a reduction kernel
// is set, the subset weights come from reduced-set fits against the full
// pools; otherwise they are uniform. The two-kernel overload allows separate
// bandwidths for the two parameter spaces.
DesiredDistribution build_desired(const PolynomialChanceConstraint& constraint,
                                  const ScenarioSets& sets, double u_nom,
                                  const std::vector<Eigen::VectorXd>& pool_w1,
                                  const std::vector<Eigen::VectorXd>& pool_w2,
                                  const std::optional<KernelSpec>& reduce_kernel);
DesiredDistribution build_desired(const PolynomialChanceConstraint& constraint,
                                  const ScenarioSets& sets, double u_nom,
                                  const std::vector<Eigen::VectorXd>& pool_w1,
                                  const std::vector<Eigen::VectorXd>& pool_w2,
                                  const std::optional<KernelSpec>& reduce_w1,
                                  const std::optional<KernelSpec>& reduce_w2);

// Family sharing one u_nom and one pair of subset weight fits (the arm's 2m
// torque rows and the multi-obstacle cones reuse this).
std::vector<DesiredDistribution> build_desired_family(
    const std::vector<AffineChanceConstraint>& constraints,
    const ScenarioSets& sets, const Eigen::VectorXd& u_nom,
    const std::vector<Eigen::VectorXd>& pool_w1,
    const std::vector<Eigen::VectorXd>& pool_w2,
    const std::optional<KernelSpec>& reduce_kernel);

}  // namespace mmdcc
