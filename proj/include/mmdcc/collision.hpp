#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mmdcc/constraint.hpp"
#include "mmdcc/random.hpp"
#include "mmdcc/solvers.hpp"

namespace mmdcc {

struct AgentState {
  Eigen::Vector2d position{0.0, 0.0};
  Eigen::Vector2d velocity{0.0, 0.0};
  double radius = 0.5;
};

// Quadratic coefficients of the velocity-scaling collision-cone constraint in
// denominator-cleared form: with r = p - p_o, v = u*v_r - v_o and
// R = R_r + R_o,
//   f(u) = (r.v)^2 - (||r||^2 - R^2) ||v||^2 = h0 + h1 u + h2 u^2.
struct CollisionCoefficients {
  double h0 = 0.0, h1 = 0.0, h2 = 0.0;
};

CollisionCoefficients collision_coefficients(const AgentState& robot,
                                             const AgentState& obstacle);

// Same constraint with the agent states as uncertain parameters
// w1 = (x, y, xdot, ydot), w2 = (x_o, y_o, xdot_o, ydot_o).
PolynomialChanceConstraint collision_constraint(double robot_radius,
                                                double obstacle_radius);

// Marginal described by its first four moments (skewness and kurtosis in
// standardized form; 0 and 3 recover the Gaussian).
struct FourMomentSpec {
  double mean = 0.0;
  double variance = 1.0;
  double skewness = 0.0;
  double kurtosis = 3.0;
  void validate() const;  // moment feasibility: kurtosis >= skewness^2 + 1
};

// Draws from a two-component Gaussian mixture fitted to the four target
// moments; location and scale enter only as the final affine shift, so
// changing the mean translates the sample stream sample-for-sample.
class FourMomentSampler {
 public:
  explicit FourMomentSampler(const FourMomentSpec& spec);

  double sample(Rng& rng) const;
  FourMomentSampler with_moments(double mean, double variance) const;
  const FourMomentSpec& spec() const { return spec_; }

  struct Mixture {
    double p, mu1, mu2, sigma1, sigma2;  // standardized components
  };
  const Mixture& mixture() const { return mix_; }

 private:
  FourMomentSampler(const FourMomentSpec& spec, const Mixture& mix)
      : spec_(spec), mix_(mix) {}
  FourMomentSpec spec_;
  Mixture mix_;
};

// Per-coordinate noise shape around a nominal agent state.
struct NoiseShape {
  double variance = 0.01;
  double skewness = 0.0;
  double kurtosis = 3.0;
};

// Samples uncertain agent states (x, y, xdot, ydot) around a nominal state.
class AgentSampler {
 public:
  AgentSampler(const AgentState& nominal, const NoiseShape& position,
               const NoiseShape& velocity);
  Eigen::VectorXd sample(Rng& rng) const;
  std::vector<Eigen::VectorXd> sample_many(int n, Rng& rng) const;
  AgentSampler recentered(const AgentState& nominal) const;

 private:
  std::vector<FourMomentSampler> coord_;
};

struct AvoidanceInstance {
  double robot_radius = 0.5;
  std::vector<double> obstacle_radii;
  std::vector<Eigen::VectorXd> robot_samples;
  std::vector<std::vector<Eigen::VectorXd>> obstacle_samples;  // per obstacle
  // held-out states for the empirical-probability recount (may be empty)
  std::vector<Eigen::VectorXd> holdout_robot;
  std::vector<std::vector<Eigen::VectorXd>> holdout_obstacles;
  int n_scenario = 20;  // desired-subset size per parameter
  int trials = 50;      // subset draws scored per scenario selection
};

// One velocity-scaling decision: scenario-constructs a desired distribution
// per obstacle (shared u_nom), assembles the summed MMD polynomial, minimizes
// rho1*sum MMD^2 + rho2*(u-1)^2 over u >= 0 and validates per-obstacle
// empirical probabilities on the holdout.
SolverReport avoid_step(const AvoidanceInstance& instance, const SolverConfig& cfg);

// Closed-loop variant: per step, beliefs are sampled around the true states,
// the decision is recomputed and the robot executes a freshly drawn velocity
// sample scaled by u*.
struct AvoidanceSimulation {
  std::vector<double> u_history;
  std::vector<Eigen::Vector2d> robot_path;
  std::vector<std::vector<Eigen::Vector2d>> obstacle_paths;
  double min_clearance = 0.0;  // min over time of distance minus summed radii
};

AvoidanceSimulation simulate_avoidance(const AgentState& robot,
                                       const std::vector<AgentState>& obstacles,
                                       const NoiseShape& position_noise,
                                       const NoiseShape& velocity_noise,
                                       int n_samples, int n_scenario, int trials,
                                       int steps, double dt,
                                       const SolverConfig& cfg);

}  // namespace mmdcc
