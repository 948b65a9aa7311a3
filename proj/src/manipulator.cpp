#include "mmdcc/manipulator.hpp"

#include <cmath>
#include <stdexcept>

#include "mmdcc/desired.hpp"
#include "mmdcc/objective.hpp"
#include "mmdcc/reduced_set.hpp"

namespace mmdcc {

void ArmParams::validate() const {
  if (!(l1 > 0 && l2 > 0 && m1 > 0 && m2 > 0))
    throw std::invalid_argument("arm params: lengths and masses must be > 0");
  if (!(tau_max > 0 && qdd_max > 0 && k_p > 0))
    throw std::invalid_argument("arm params: tau_max, qdd_max, k_p must be > 0");
}

DynamicsTerms dynamics_terms(const Eigen::Vector2d& q, const Eigen::Vector2d& qd,
                             const ArmParams& p) {
  const double c2 = std::cos(q(1));
  const double s2 = std::sin(q(1));
  const double s1 = std::sin(q(0));
  const double c1 = std::cos(q(0));
  const double s12 = std::sin(q(0) + q(1));
  const double c12 = std::cos(q(0) + q(1));

  DynamicsTerms t;
  const double a = (p.m1 + p.m2) * p.l1 * p.l1;
  const double b = p.m2 * p.l2 * p.l2;
  const double h = p.m2 * p.l1 * p.l2;
  t.inertia << a + b + 2.0 * h * c2, b + h * c2, b + h * c2, b;

  t.coriolis << -h * s2 * (2.0 * qd(0) * qd(1) + qd(1) * qd(1)),
      h * s2 * qd(0) * qd(0);

  t.gravity << (p.m1 + p.m2) * p.gravity * p.l1 * c1 + p.m2 * p.gravity * p.l2 * c12,
      p.m2 * p.gravity * p.l2 * c12;

  t.jacobian << -p.l1 * s1 - p.l2 * s12, -p.l2 * s12, p.l1 * c1 + p.l2 * c12,
      p.l2 * c12;

  const double w1 = qd(0);
  const double w12 = qd(0) + qd(1);
  Eigen::Matrix2d jdot;
  jdot << -p.l1 * c1 * w1 - p.l2 * c12 * w12, -p.l2 * c12 * w12,
      -p.l1 * s1 * w1 - p.l2 * s12 * w12, -p.l2 * s12 * w12;
  t.jdot_qdot = jdot * qd;
  return t;
}

Eigen::Vector2d forward_kinematics(const Eigen::Vector2d& q, const ArmParams& p) {
  return {p.l1 * std::cos(q(0)) + p.l2 * std::cos(q(0) + q(1)),
          p.l1 * std::sin(q(0)) + p.l2 * std::sin(q(0) + q(1))};
}

Eigen::Vector2d tip_velocity(const Eigen::Vector2d& q, const Eigen::Vector2d& qd,
                             const ArmParams& p) {
  return dynamics_terms(q, qd, p).jacobian * qd;
}

std::optional<Eigen::Vector2d> inverse_kinematics(const Eigen::Vector2d& x,
                                                  const ArmParams& p) {
  const double d2 = x.squaredNorm();
  const double c2 = (d2 - p.l1 * p.l1 - p.l2 * p.l2) / (2.0 * p.l1 * p.l2);
  if (c2 < -1.0 || c2 > 1.0) return std::nullopt;
  const double q2 = std::acos(c2);  // elbow-down branch
  const double q1 = std::atan2(x(1), x(0)) -
                    std::atan2(p.l2 * std::sin(q2), p.l1 + p.l2 * std::cos(q2));
  return Eigen::Vector2d(q1, q2);
}

Eigen::Vector2d joint_torque(const Eigen::Vector2d& q, const Eigen::Vector2d& qd,
                             const Eigen::Vector2d& qdd, const ArmParams& p) {
  const DynamicsTerms t = dynamics_terms(q, qd, p);
  return t.inertia * qdd + t.coriolis + t.gravity;
}

std::vector<AffineChanceConstraint> torque_constraint_fields(const ArmParams& p) {
  p.validate();
  std::vector<AffineChanceConstraint> rows;
  for (int joint = 0; joint < 2; ++joint) {
    for (const double sign : {+1.0, -1.0}) {
      AffineChanceConstraint c;
      for (int j = 0; j < 2; ++j) {
        c.slope_fields.push_back(
            [=](const Eigen::VectorXd& w1, const Eigen::VectorXd& w2) {
              const DynamicsTerms t =
                  dynamics_terms(Eigen::Vector2d(w1(0), w1(1)),
                                 Eigen::Vector2d(w2(0), w2(1)), p);
              return sign * t.inertia(joint, j);
            });
      }
      c.intercept_field = [=](const Eigen::VectorXd& w1, const Eigen::VectorXd& w2) {
        const DynamicsTerms t = dynamics_terms(Eigen::Vector2d(w1(0), w1(1)),
                                               Eigen::Vector2d(w2(0), w2(1)), p);
        return sign * (t.coriolis(joint) + t.gravity(joint)) - p.tau_max;
      };
      rows.push_back(std::move(c));
    }
  }
  return rows;
}

Eigen::Vector2d ArmBelief::mean_q() const {
  Eigen::Vector2d m = Eigen::Vector2d::Zero();
  for (const auto& q : q_samples) m += Eigen::Vector2d(q(0), q(1));
  return m / static_cast<double>(q_samples.size());
}

Eigen::Vector2d ArmBelief::mean_qd() const {
  Eigen::Vector2d m = Eigen::Vector2d::Zero();
  for (const auto& qd : qd_samples) m += Eigen::Vector2d(qd(0), qd(1));
  return m / static_cast<double>(qd_samples.size());
}

namespace {

// Task-space command acceleration from the mean state. The printed feedback
// law diverges with its plus signs; this is the critically damped form with
// the same 2*sqrt(k_p) damping coefficient.
Eigen::Vector2d command_acceleration(const Eigen::Vector2d& x,
                                     const Eigen::Vector2d& xdot,
                                     const TrackingTarget& target, double k_p) {
  return target.xddot - k_p * (x - target.x) -
         2.0 * std::sqrt(k_p) * (xdot - target.xdot);
}

}  // namespace

TrackingStepResult tracking_step(const ArmBelief& belief, const TrackingTarget& target,
                                 const ArmParams& params, const SolverConfig& cfg,
                                 int n_scenario, int trials, std::uint64_t seed) {
  params.validate();
  if (belief.q_samples.empty() || belief.q_samples.size() != belief.qd_samples.size())
    throw std::invalid_argument("tracking_step: belief samples must be paired");

  const Eigen::Vector2d q_bar = belief.mean_q();
  const Eigen::Vector2d qd_bar = belief.mean_qd();
  const DynamicsTerms mean_terms = dynamics_terms(q_bar, qd_bar, params);
  const Eigen::Vector2d x = forward_kinematics(q_bar, params);
  const Eigen::Vector2d xdot = mean_terms.jacobian * qd_bar;
  const Eigen::Vector2d xdd_cmd = command_acceleration(x, xdot, target, params.k_p);

  // 0.5 || J qdd + (Jdot qd - xdd_cmd) ||^2 at the mean state
  const QuadraticObjective J_cost =
      least_squares_objective(mean_terms.jacobian, mean_terms.jdot_qdot - xdd_cmd);

  const auto constraints = torque_constraint_fields(params);
  const Eigen::VectorXd box_lo = Eigen::VectorXd::Constant(2, -params.qdd_max);
  const Eigen::VectorXd box_hi = Eigen::VectorXd::Constant(2, params.qdd_max);

  SolverConfig box_cfg = cfg;
  box_cfg.bounds = Bounds::box(box_lo, box_hi);

  TrackingStepResult result;
  result.qdd = Eigen::Vector2d::Zero();

  // probe for subset scoring: the mean-collapsed scenario decision
  Eigen::VectorXd probe = Eigen::VectorXd::Zero(2);
  try {
    ScenarioSets mean_sets;
    mean_sets.w1 = {q_bar};
    mean_sets.w2 = {qd_bar};
    probe = solve_scenario(constraints, mean_sets, J_cost, box_lo, box_hi);
  } catch (const infeasible_scenario_error&) {
  }

  const int n_sc = std::min<int>(n_scenario, static_cast<int>(belief.q_samples.size()));
  ScenarioSets sets;
  Eigen::VectorXd qdd_nom;
  bool solved = false;
  for (int attempt = 0; attempt < 10 && !solved; ++attempt) {
    Rng rng(derive_seed(seed, 300 + static_cast<std::uint64_t>(attempt)));
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<int> best_i1, best_i2;
    for (int t = 0; t < trials; ++t) {
      const auto i1 = rng.choose(static_cast<int>(belief.q_samples.size()), n_sc);
      const auto i2 = rng.choose(static_cast<int>(belief.qd_samples.size()), n_sc);
      double score = 0.0;
      for (const auto& c : constraints)
        for (const int a : i1)
          for (const int b : i2) {
            const double f =
                c.evaluate(belief.q_samples[static_cast<std::size_t>(a)],
                           belief.qd_samples[static_cast<std::size_t>(b)], probe);
            if (f > 0.0) score += f;
          }
      const bool better = score < best_score ||
                          (score == best_score &&
                           std::make_pair(i1, i2) < std::make_pair(best_i1, best_i2));
      if (better) {
        best_score = score;
        best_i1 = i1;
        best_i2 = i2;
      }
    }
    sets.w1.clear();
    sets.w2.clear();
    for (const int a : best_i1)
      sets.w1.push_back(belief.q_samples[static_cast<std::size_t>(a)]);
    for (const int b : best_i2)
      sets.w2.push_back(belief.qd_samples[static_cast<std::size_t>(b)]);
    try {
      qdd_nom = solve_scenario(constraints, sets, J_cost, box_lo, box_hi);
      solved = true;
    } catch (const infeasible_scenario_error&) {
    }
  }

  if (!solved) {
    // safety stop: zero acceleration, flagged
    result.fallback = true;
    result.report.u_star = Eigen::VectorXd::Zero(2);
    result.report.cost_value = J_cost.value(result.report.u_star);
    result.report.rho1 = cfg.rho1;
    result.report.rho2 = cfg.rho2;
    result.report.objective_value = cfg.rho2 * result.report.cost_value;
    result.report.warning = "scenario infeasible; zero-acceleration fallback";
    result.report.converged = false;
    return result;
  }

  const std::optional<KernelSpec> reduce_q =
      std::make_optional(KernelSpec::rbf(median_pairwise_distance(belief.q_samples)));
  const std::optional<KernelSpec> reduce_qd =
      std::make_optional(KernelSpec::rbf(median_pairwise_distance(belief.qd_samples)));
  // one weight fit pair shared across the 2m rows
  std::vector<DesiredDistribution> desired;
  {
    const Eigen::VectorXd lambda =
        solve_weights(belief.q_samples, sets.w1, *reduce_q).weights;
    const Eigen::VectorXd xi =
        solve_weights(belief.qd_samples, sets.w2, *reduce_qd).weights;
    const Eigen::VectorXd weights = product_weights(lambda, xi);
    for (const auto& c : constraints) {
      DesiredDistribution d;
      const Eigen::Index n1 = static_cast<Eigen::Index>(sets.w1.size());
      const Eigen::Index n2 = static_cast<Eigen::Index>(sets.w2.size());
      d.values.resize(n1 * n2);
      for (Eigen::Index a = 0; a < n1; ++a)
        for (Eigen::Index b = 0; b < n2; ++b)
          d.values(a * n2 + b) = c.evaluate(sets.w1[static_cast<std::size_t>(a)],
                                            sets.w2[static_cast<std::size_t>(b)],
                                            qdd_nom);
      if (d.values.maxCoeff() > kViolationTolerance)
        throw std::invalid_argument("tracking_step: stale scenario decision");
      d.weights = weights;
      d.u_nom = qdd_nom;
      d.sources = sets;
      d.weight_warning = weights.minCoeff() < -0.1;
      desired.push_back(std::move(d));
    }
  }

  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(belief.q_samples.size()),
      1.0 / static_cast<double>(belief.q_samples.size()));
  std::vector<AffineCoefficientMatrices> cms;
  for (const auto& c : constraints)
    cms.push_back(evaluate_coefficient_matrices(c, belief.q_samples, uniform,
                                                belief.qd_samples, uniform));

  const KernelSpec kernel = KernelSpec::polynomial(cfg.degree);
  SolverReport rep;
  if (cfg.degree == 1) {
    const QuadraticObjective mmd = assemble_affine(cms, desired, kernel);
    rep = minimize_box_quadratic(mmd, J_cost, box_cfg);
  } else {
    const AffineMmdObjective mmd(cms, desired, kernel);
    rep = minimize_box_smooth(mmd, J_cost, box_cfg);
  }
  rep.n = static_cast<int>(belief.q_samples.size());
  rep.n_w1 = static_cast<int>(sets.w1.size());
  rep.n_w2 = static_cast<int>(sets.w2.size());

  result.qdd = Eigen::Vector2d(rep.u_star(0), rep.u_star(1));
  result.report = std::move(rep);
  return result;
}

namespace {

// Mean-variance surrogate on a box grid: per constraint, E[f](u) and
// E[f^2](u) over all belief pairs are affine/quadratic in u; feasible points
// satisfy E + eps*sqrt(Var) <= 0 for every row.
TrackingStepResult meanvar_tracking_step(
    const ArmBelief& belief, const QuadraticObjective& J_cost,
    const std::vector<AffineChanceConstraint>& constraints, const ArmParams& params,
    double epsilon) {
  struct RowStats {
    Eigen::Vector2d s_mean = Eigen::Vector2d::Zero();
    double t_mean = 0.0;
    Eigen::Matrix2d ss = Eigen::Matrix2d::Zero();
    Eigen::Vector2d ts = Eigen::Vector2d::Zero();
    double tt = 0.0;
  };
  std::vector<RowStats> stats(constraints.size());
  const double total =
      static_cast<double>(belief.q_samples.size() * belief.qd_samples.size());
  for (std::size_t c = 0; c < constraints.size(); ++c) {
    for (const auto& w1 : belief.q_samples)
      for (const auto& w2 : belief.qd_samples) {
        Eigen::Vector2d s(constraints[c].slope_fields[0](w1, w2),
                          constraints[c].slope_fields[1](w1, w2));
        const double t = constraints[c].intercept_field(w1, w2);
        stats[c].s_mean += s;
        stats[c].t_mean += t;
        stats[c].ss += s * s.transpose();
        stats[c].ts += t * s;
        stats[c].tt += t * t;
      }
    stats[c].s_mean /= total;
    stats[c].t_mean /= total;
    stats[c].ss /= total;
    stats[c].ts /= total;
    stats[c].tt /= total;
  }

  TrackingStepResult result;
  const int cells = 100;
  const double step = 2.0 * params.qdd_max / cells;
  bool found = false;
  double best_j = 0.0;
  Eigen::Vector2d best = Eigen::Vector2d::Zero();
  for (int i = 0; i <= cells; ++i)
    for (int k = 0; k <= cells; ++k) {
      const Eigen::Vector2d u(-params.qdd_max + i * step, -params.qdd_max + k * step);
      bool ok = true;
      for (const auto& st : stats) {
        const double e = st.s_mean.dot(u) + st.t_mean;
        const double e2 = u.dot(st.ss * u) + 2.0 * st.ts.dot(u) + st.tt;
        const double var = std::max(e2 - e * e, 0.0);
        if (e + epsilon * std::sqrt(var) > 0.0) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      const double j = J_cost.value(u);
      if (!found || j < best_j) {
        found = true;
        best_j = j;
        best = u;
      }
    }
  if (!found) {
    result.fallback = true;
    result.qdd = Eigen::Vector2d::Zero();
    result.report.u_star = Eigen::VectorXd::Zero(2);
    result.report.warning = "mean-variance surrogate infeasible; zero fallback";
  } else {
    result.qdd = best;
    result.report.u_star = best;
  }
  result.report.cost_value = J_cost.value(result.qdd);
  result.report.objective_value = result.report.cost_value;
  result.report.implied_eta_stated = eta_bound_stated(epsilon);
  result.report.implied_eta_cantelli = eta_bound_cantelli(epsilon);
  return result;
}

}  // namespace

TrackingHistory run_tracking(const std::vector<TrackingTarget>& reference,
                             const ArmParams& params, const FourMomentSpec& q_noise,
                             const FourMomentSpec& qd_noise, int n_samples,
                             int n_scenario, int trials, const SolverConfig& cfg,
                             double dt, const Eigen::Vector2d& q0,
                             const Eigen::Vector2d& qd0, std::uint64_t seed,
                             TrackingSolver solver, double meanvar_epsilon) {
  if (reference.empty()) throw std::invalid_argument("run_tracking: empty reference");
  const FourMomentSampler q_sampler(q_noise);
  const FourMomentSampler qd_sampler(qd_noise);
  const double epsilon =
      meanvar_epsilon > 0.0 ? meanvar_epsilon : cantelli_epsilon(cfg.target_eta);

  TrackingHistory hist;
  Eigen::Vector2d q = q0, qd = qd0;
  long long satisfied = 0, total = 0;
  double deviation_sum = 0.0;

  for (std::size_t step = 0; step < reference.size(); ++step) {
    Rng rng(derive_seed(seed, step));
    ArmBelief belief;
    for (int i = 0; i < n_samples; ++i) {
      Eigen::VectorXd qs(2), qds(2);
      qs << q(0) + q_sampler.sample(rng), q(1) + q_sampler.sample(rng);
      qds << qd(0) + qd_sampler.sample(rng), qd(1) + qd_sampler.sample(rng);
      belief.q_samples.push_back(qs);
      belief.qd_samples.push_back(qds);
    }

    TrackingStepResult result;
    if (solver == TrackingSolver::rkhs) {
      result = tracking_step(belief, reference[step], params, cfg, n_scenario,
                             trials, derive_seed(seed, 1u << 20 | step));
    } else {
      const Eigen::Vector2d q_bar = belief.mean_q();
      const Eigen::Vector2d qd_bar = belief.mean_qd();
      const DynamicsTerms mean_terms = dynamics_terms(q_bar, qd_bar, params);
      const Eigen::Vector2d x = forward_kinematics(q_bar, params);
      const Eigen::Vector2d xdd_cmd = command_acceleration(
          x, mean_terms.jacobian * qd_bar, reference[step], params.k_p);
      const QuadraticObjective J_cost = least_squares_objective(
          mean_terms.jacobian, mean_terms.jdot_qdot - xdd_cmd);
      const auto constraints = torque_constraint_fields(params);
      if (solver == TrackingSolver::scenario) {
        const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -params.qdd_max);
        const Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, params.qdd_max);
        try {
          const Eigen::VectorXd u = solve_scenario(
              constraints, ScenarioSets{belief.q_samples, belief.qd_samples},
              J_cost, lo, hi);
          result.qdd = Eigen::Vector2d(u(0), u(1));
          result.report.u_star = u;
        } catch (const infeasible_scenario_error&) {
          result.fallback = true;
          result.qdd = Eigen::Vector2d::Zero();
          result.report.u_star = Eigen::VectorXd::Zero(2);
          result.report.warning = "scenario infeasible; zero-acceleration fallback";
        }
        result.report.cost_value = J_cost.value(result.qdd);
        result.report.objective_value = result.report.cost_value;
      } else {
        result = meanvar_tracking_step(belief, J_cost, constraints, params, epsilon);
      }
    }
    hist.qdd.push_back(result.qdd);
    hist.fallback.push_back(result.fallback);
    hist.cost.push_back(result.report.cost_value);
    hist.mmd.push_back(result.report.mmd_value);

    // torque fan over the paired belief samples at the chosen acceleration
    std::vector<Eigen::Vector2d> fan;
    long long step_ok = 0;
    for (std::size_t i = 0; i < belief.q_samples.size(); ++i) {
      const Eigen::Vector2d tau = joint_torque(
          Eigen::Vector2d(belief.q_samples[i](0), belief.q_samples[i](1)),
          Eigen::Vector2d(belief.qd_samples[i](0), belief.qd_samples[i](1)),
          result.qdd, params);
      fan.push_back(tau);
      const bool ok = std::abs(tau(0)) <= params.tau_max && std::abs(tau(1)) <= params.tau_max;
      if (ok) ++step_ok;
    }
    hist.torque_fan.push_back(std::move(fan));
    hist.step_eta.push_back(static_cast<double>(step_ok) /
                            static_cast<double>(belief.q_samples.size()));
    satisfied += step_ok;
    total += static_cast<long long>(belief.q_samples.size());

    hist.mean_torque.push_back(joint_torque(q, qd, result.qdd, params));

    // perfect actuation, semi-implicit Euler
    qd += dt * result.qdd;
    q += dt * qd;

    const double dev = (forward_kinematics(q, params) - reference[step].x).norm();
    hist.path_deviation.push_back(dev);
    deviation_sum += dev;
  }

  hist.satisfaction = static_cast<double>(satisfied) / static_cast<double>(total);
  hist.mean_deviation = deviation_sum / static_cast<double>(reference.size());
  return hist;
}

std::vector<TrackingTarget> circle_reference(const Eigen::Vector2d& center,
                                             double radius, double omega,
                                             double phase, int steps, double dt) {
  std::vector<TrackingTarget> ref;
  ref.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k + 1) * dt;
    const double a = phase + omega * t;
    TrackingTarget target;
    target.x = center + radius * Eigen::Vector2d(std::cos(a), std::sin(a));
    target.xdot = radius * omega * Eigen::Vector2d(-std::sin(a), std::cos(a));
    target.xddot = -radius * omega * omega * Eigen::Vector2d(std::cos(a), std::sin(a));
    ref.push_back(target);
  }
  return ref;
}

}  // namespace mmdcc
