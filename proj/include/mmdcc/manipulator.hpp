#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "mmdcc/collision.hpp"  // FourMomentSpec / sampler
#include "mmdcc/constraint.hpp"
#include "mmdcc/solvers.hpp"

namespace mmdcc {

// Planar 2R arm, point masses at the link ends, horizontal plane by default.
struct ArmParams {
  double l1 = 1.0, l2 = 1.0;  // link lengths (m)
  double m1 = 1.0, m2 = 1.0;  // point masses (kg)
  double gravity = 0.0;       // m/s^2, 0 for the horizontal plane
  double tau_max = 8.0;       // per-joint torque bound (N m)
  double qdd_max = 10.0;      // per-joint acceleration bound (rad/s^2)
  double k_p = 10.0;          // task-space feedback gain

  void validate() const;
};

struct DynamicsTerms {
  Eigen::Matrix2d inertia;       // M(q), symmetric positive definite
  Eigen::Vector2d coriolis;      // C(q, qd) qd
  Eigen::Vector2d gravity;       // zero on the horizontal plane
  Eigen::Matrix2d jacobian;      // J(q)
  Eigen::Vector2d jdot_qdot;     // Jdot(q, qd) qd
};

DynamicsTerms dynamics_terms(const Eigen::Vector2d& q, const Eigen::Vector2d& qd,
                             const ArmParams& params);

Eigen::Vector2d forward_kinematics(const Eigen::Vector2d& q, const ArmParams& params);
Eigen::Vector2d tip_velocity(const Eigen::Vector2d& q, const Eigen::Vector2d& qd,
                             const ArmParams& params);
// elbow-down closed form; empty when the target is out of reach
std::optional<Eigen::Vector2d> inverse_kinematics(const Eigen::Vector2d& x,
                                                  const ArmParams& params);

Eigen::Vector2d joint_torque(const Eigen::Vector2d& q, const Eigen::Vector2d& qd,
                             const Eigen::Vector2d& qdd, const ArmParams& params);

// The 2m = 4 torque-bound rows +/-(M(q) qdd + C(q,qd) qd + g(q)) - tau_max <= 0
// as affine chance constraints over w1 = q, w2 = qd.
std::vector<AffineChanceConstraint> torque_constraint_fields(const ArmParams& params);

// Joint-state belief: paired position/velocity samples, uniform weights.
struct ArmBelief {
  std::vector<Eigen::VectorXd> q_samples;
  std::vector<Eigen::VectorXd> qd_samples;

  Eigen::Vector2d mean_q() const;
  Eigen::Vector2d mean_qd() const;
};

struct TrackingTarget {
  Eigen::Vector2d x{0, 0}, xdot{0, 0}, xddot{0, 0};
};

struct TrackingStepResult {
  Eigen::Vector2d qdd;
  SolverReport report;
  bool fallback = false;  // scenario infeasible -> qdd = 0 safety stop
};

// One receding-horizon step: scenario-constructs per-constraint desired
// distributions in acceleration space, assembles the summed MMD objective
// (exact quadratic at d = 1, smooth evaluation above) plus the task-space
// tracking cost at the mean state, and solves over |qdd| <= qdd_max.
TrackingStepResult tracking_step(const ArmBelief& belief, const TrackingTarget& target,
                                 const ArmParams& params, const SolverConfig& cfg,
                                 int n_scenario, int trials, std::uint64_t seed);

struct TrackingHistory {
  std::vector<Eigen::Vector2d> qdd;
  std::vector<Eigen::Vector2d> mean_torque;
  std::vector<std::vector<Eigen::Vector2d>> torque_fan;  // per-step belief torques
  std::vector<double> path_deviation;
  std::vector<double> cost;
  std::vector<double> mmd;       // zero for the baseline solvers
  std::vector<double> step_eta;  // fraction of belief torques inside bounds
  std::vector<bool> fallback;
  double satisfaction = 1.0;  // pooled fraction over all (step, sample) pairs
  double mean_deviation = 0.0;
};

// Per-step decision rule for the tracking loop: the RKHS reformulation, the
// all-pairs scenario program, or the mean-variance surrogate on a box grid.
enum class TrackingSolver { rkhs, scenario, meanvar };

TrackingHistory run_tracking(const std::vector<TrackingTarget>& reference,
                             const ArmParams& params, const FourMomentSpec& q_noise,
                             const FourMomentSpec& qd_noise, int n_samples,
                             int n_scenario, int trials, const SolverConfig& cfg,
                             double dt, const Eigen::Vector2d& q0,
                             const Eigen::Vector2d& qd0, std::uint64_t seed,
                             TrackingSolver solver = TrackingSolver::rkhs,
                             double meanvar_epsilon = 0.0);

// Circle reference with matching velocity/acceleration profiles.
std::vector<TrackingTarget> circle_reference(const Eigen::Vector2d& center,
                                             double radius, double omega,
                                             double phase, int steps, double dt);

}  // namespace mmdcc
