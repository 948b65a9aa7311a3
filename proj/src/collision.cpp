#include "mmdcc/collision.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mmdcc/desired.hpp"
#include "mmdcc/objective.hpp"

namespace mmdcc {

CollisionCoefficients collision_coefficients(const AgentState& robot,
                                             const AgentState& obstacle) {
  const Eigen::Vector2d r = robot.position - obstacle.position;
  const double a = r.dot(robot.velocity);
  const double b = r.dot(obstacle.velocity);
  const double c = robot.velocity.squaredNorm();
  const double e = robot.velocity.dot(obstacle.velocity);
  const double g = obstacle.velocity.squaredNorm();
  const double R = robot.radius + obstacle.radius;
  const double rho = r.squaredNorm() - R * R;
  return {b * b - rho * g, -2.0 * a * b + 2.0 * rho * e, a * a - rho * c};
}

namespace {

AgentState state_from_vector(const Eigen::VectorXd& w, double radius) {
  AgentState s;
  s.position = Eigen::Vector2d(w(0), w(1));
  s.velocity = Eigen::Vector2d(w(2), w(3));
  s.radius = radius;
  return s;
}

}  // namespace

PolynomialChanceConstraint collision_constraint(double robot_radius,
                                                double obstacle_radius) {
  PolynomialChanceConstraint c;
  for (int i = 0; i <= 2; ++i) {
    c.coefficient_fields.push_back(
        [=](const Eigen::VectorXd& w1, const Eigen::VectorXd& w2) {
          const auto h = collision_coefficients(state_from_vector(w1, robot_radius),
                                                state_from_vector(w2, obstacle_radius));
          return i == 0 ? h.h0 : (i == 1 ? h.h1 : h.h2);
        });
  }
  return c;
}

void FourMomentSpec::validate() const {
  if (!(variance > 0.0))
    throw std::invalid_argument("four-moment spec: variance must be > 0");
  if (kurtosis < skewness * skewness + 1.0)
    throw std::invalid_argument(
        "four-moment spec: kurtosis must be >= skewness^2 + 1");
}

namespace {

// Standardized raw moments (orders 1..4) of a two-component Gaussian mixture.
Eigen::Vector4d mixture_moments(double p, double m1, double m2, double s1,
                                double s2) {
  const double q = 1.0 - p;
  const auto raw = [](double m, double s) {
    const double m2_ = m * m + s * s;
    const double m3_ = m * m * m + 3.0 * m * s * s;
    const double m4_ =
        m * m * m * m + 6.0 * m * m * s * s + 3.0 * s * s * s * s;
    return Eigen::Vector4d(m, m2_, m3_, m4_);
  };
  return p * raw(m1, s1) + q * raw(m2, s2);
}

// Levenberg-damped Gauss-Newton for one start; returns true on ||r||_inf
// below tolerance. theta = (logit p, m1, m2, log s1, log s2).
bool fit_from(Eigen::VectorXd theta, const Eigen::Vector4d& target,
              FourMomentSampler::Mixture& out) {
  const auto unpack = [](const Eigen::VectorXd& th) {
    FourMomentSampler::Mixture m;
    m.p = 1.0 / (1.0 + std::exp(-th(0)));
    m.mu1 = th(1);
    m.mu2 = th(2);
    m.sigma1 = std::exp(th(3));
    m.sigma2 = std::exp(th(4));
    return m;
  };
  const auto residual = [&](const Eigen::VectorXd& th) -> Eigen::Vector4d {
    const auto m = unpack(th);
    return mixture_moments(m.p, m.mu1, m.mu2, m.sigma1, m.sigma2) - target;
  };

  double damping = 1e-6;
  Eigen::Vector4d r = residual(theta);
  for (int it = 0; it < 400; ++it) {
    if (r.lpNorm<Eigen::Infinity>() < 1e-11) {
      out = unpack(theta);
      return true;
    }
    Eigen::Matrix<double, 4, 5> Jac;
    for (int k = 0; k < 5; ++k) {
      const double h = 1e-7 * std::max(1.0, std::abs(theta(k)));
      Eigen::VectorXd th = theta;
      th(k) += h;
      Jac.col(k) = (residual(th) - r) / h;
    }
    const Eigen::MatrixXd JtJ = Jac.transpose() * Jac;
    const Eigen::VectorXd g = Jac.transpose() * r;
    bool stepped = false;
    for (int tries = 0; tries < 20; ++tries) {
      const Eigen::MatrixXd A =
          JtJ + damping * Eigen::MatrixXd::Identity(5, 5);
      const Eigen::VectorXd delta = A.ldlt().solve(g);
      const Eigen::VectorXd next = theta - delta;
      const Eigen::Vector4d rn = residual(next);
      if (rn.squaredNorm() < r.squaredNorm()) {
        theta = next;
        r = rn;
        damping = std::max(damping * 0.3, 1e-12);
        stepped = true;
        break;
      }
      damping *= 10.0;
    }
    if (!stepped) break;
  }
  if (r.lpNorm<Eigen::Infinity>() < 1e-11) {
    out = unpack(theta);
    return true;
  }
  return false;
}

FourMomentSampler::Mixture fit_mixture(double skewness, double kurtosis) {
  if (skewness == 0.0 && kurtosis == 3.0) return {0.5, 0.0, 0.0, 1.0, 1.0};

  const Eigen::Vector4d target(0.0, 1.0, skewness, kurtosis);
  const auto logit = [](double p) { return std::log(p / (1.0 - p)); };

  std::vector<Eigen::VectorXd> starts;
  for (const double p : {0.5, 0.3, 0.7, 0.15, 0.85})
    for (const double m : {0.3, 0.8, -0.3, -0.8})
      for (const double s : {0.6, 1.0}) {
        Eigen::VectorXd th(5);
        th << logit(p), m, -p * m / (1.0 - p), std::log(s), std::log(s);
        starts.push_back(th);
      }
  Rng jitter(0x4d69785475726bull);
  for (int k = 0; k < 40; ++k) {
    Eigen::VectorXd th(5);
    th << jitter.uniform(-2.0, 2.0), jitter.uniform(-1.5, 1.5),
        jitter.uniform(-1.5, 1.5), jitter.uniform(-1.5, 0.5),
        jitter.uniform(-1.5, 0.5);
    starts.push_back(th);
  }

  FourMomentSampler::Mixture mix;
  for (const auto& th : starts)
    if (fit_from(th, target, mix)) return mix;
  throw std::runtime_error(
      "four-moment sampler: no Gaussian mixture matches the requested "
      "skewness/kurtosis");
}

}  // namespace

FourMomentSampler::FourMomentSampler(const FourMomentSpec& spec) : spec_(spec) {
  spec_.validate();
  mix_ = fit_mixture(spec_.skewness, spec_.kurtosis);
}

double FourMomentSampler::sample(Rng& rng) const {
  const bool first = rng.uniform() < mix_.p;
  const double z = rng.normal();
  const double std_draw =
      first ? mix_.mu1 + mix_.sigma1 * z : mix_.mu2 + mix_.sigma2 * z;
  return spec_.mean + std::sqrt(spec_.variance) * std_draw;
}

FourMomentSampler FourMomentSampler::with_moments(double mean,
                                                  double variance) const {
  FourMomentSpec s = spec_;
  s.mean = mean;
  s.variance = variance;
  s.validate();
  return FourMomentSampler(s, mix_);
}

AgentSampler::AgentSampler(const AgentState& nominal, const NoiseShape& position,
                           const NoiseShape& velocity) {
  const auto spec = [](double mean, const NoiseShape& n) {
    return FourMomentSpec{mean, n.variance, n.skewness, n.kurtosis};
  };
  coord_.emplace_back(spec(nominal.position.x(), position));
  coord_.emplace_back(spec(nominal.position.y(), position));
  coord_.emplace_back(spec(nominal.velocity.x(), velocity));
  coord_.emplace_back(spec(nominal.velocity.y(), velocity));
}

Eigen::VectorXd AgentSampler::sample(Rng& rng) const {
  Eigen::VectorXd w(4);
  for (int k = 0; k < 4; ++k) w(k) = coord_[static_cast<std::size_t>(k)].sample(rng);
  return w;
}

std::vector<Eigen::VectorXd> AgentSampler::sample_many(int n, Rng& rng) const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(sample(rng));
  return out;
}

AgentSampler AgentSampler::recentered(const AgentState& nominal) const {
  AgentSampler s = *this;
  s.coord_[0] = coord_[0].with_moments(nominal.position.x(), coord_[0].spec().variance);
  s.coord_[1] = coord_[1].with_moments(nominal.position.y(), coord_[1].spec().variance);
  s.coord_[2] = coord_[2].with_moments(nominal.velocity.x(), coord_[2].spec().variance);
  s.coord_[3] = coord_[3].with_moments(nominal.velocity.y(), coord_[3].spec().variance);
  return s;
}

namespace {

Eigen::VectorXd mean_state(const std::vector<Eigen::VectorXd>& samples) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(samples.front().size());
  for (const auto& s : samples) m += s;
  return m / static_cast<double>(samples.size());
}

// Joint subset selection: one w1 subset shared across obstacles, one w2
// subset per obstacle, scored by the summed hinge violation at probe_u.
struct JointSelection {
  ScenarioSets w1_only;                   // w1 filled, w2 empty
  std::vector<std::vector<Eigen::VectorXd>> w2;  // per obstacle
};

JointSelection select_joint(const std::vector<PolynomialChanceConstraint>& constraints,
                            const std::vector<Eigen::VectorXd>& pool_w1,
                            const std::vector<std::vector<Eigen::VectorXd>>& pools_w2,
                            int n_w1, int n_w2, int trials, double probe_u,
                            std::uint64_t seed) {
  Rng rng(seed);
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<int> best_i1;
  std::vector<std::vector<int>> best_i2;
  for (int t = 0; t < trials; ++t) {
    const auto i1 = rng.choose(static_cast<int>(pool_w1.size()), n_w1);
    std::vector<std::vector<int>> i2;
    for (const auto& pool : pools_w2)
      i2.push_back(rng.choose(static_cast<int>(pool.size()), n_w2));
    double score = 0.0;
    for (std::size_t o = 0; o < constraints.size(); ++o)
      for (const int a : i1)
        for (const int b : i2[o]) {
          const double f = constraints[o].evaluate(
              pool_w1[static_cast<std::size_t>(a)],
              pools_w2[o][static_cast<std::size_t>(b)], probe_u);
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
  JointSelection sel;
  for (const int a : best_i1)
    sel.w1_only.w1.push_back(pool_w1[static_cast<std::size_t>(a)]);
  sel.w2.resize(pools_w2.size());
  for (std::size_t o = 0; o < pools_w2.size(); ++o)
    for (const int b : best_i2[o])
      sel.w2[o].push_back(pools_w2[o][static_cast<std::size_t>(b)]);
  return sel;
}

}  // namespace

SolverReport avoid_step(const AvoidanceInstance& instance, const SolverConfig& cfg) {
  cfg.validate();
  const std::size_t n_obs = instance.obstacle_samples.size();
  if (n_obs == 0 || instance.obstacle_radii.size() != n_obs)
    throw std::invalid_argument("avoid_step: obstacle samples/radii mismatch");
  if (instance.robot_samples.empty())
    throw std::invalid_argument("avoid_step: empty robot samples");

  const Polynomial J({1.0, -2.0, 1.0});  // (u - 1)^2
  const double lo = cfg.bounds.lo(0);
  const double hi_actual = cfg.bounds.hi(0);
  const double hi = std::isfinite(hi_actual) ? hi_actual : cfg.horizon;

  std::vector<PolynomialChanceConstraint> constraints;
  for (std::size_t o = 0; o < n_obs; ++o)
    constraints.push_back(
        collision_constraint(instance.robot_radius, instance.obstacle_radii[o]));

  // probe: decision for the mean-collapsed problem, 1.0 when that is infeasible
  double probe_u = 1.0;
  {
    std::vector<ScenarioSets> mean_sets;
    const Eigen::VectorXd w1_mean = mean_state(instance.robot_samples);
    for (std::size_t o = 0; o < n_obs; ++o)
      mean_sets.push_back(ScenarioSets{{w1_mean}, {mean_state(instance.obstacle_samples[o])}});
    try {
      probe_u = solve_scenario(constraints, mean_sets, J, lo, hi);
    } catch (const infeasible_scenario_error&) {
    }
  }

  // scenario subsets and shared u_nom, with subset re-draws on infeasibility
  const int n_sc1 = std::min<int>(instance.n_scenario,
                                  static_cast<int>(instance.robot_samples.size()));
  JointSelection sel;
  double u_nom = 0.0;
  bool solved = false;
  for (int attempt = 0; attempt < 10 && !solved; ++attempt) {
    int n_sc2 = instance.n_scenario;
    for (const auto& pool : instance.obstacle_samples)
      n_sc2 = std::min<int>(n_sc2, static_cast<int>(pool.size()));
    sel = select_joint(constraints, instance.robot_samples, instance.obstacle_samples,
                       n_sc1, n_sc2, instance.trials, probe_u,
                       derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(attempt)));
    std::vector<ScenarioSets> sets;
    for (std::size_t o = 0; o < n_obs; ++o)
      sets.push_back(ScenarioSets{sel.w1_only.w1, sel.w2[o]});
    try {
      u_nom = solve_scenario(constraints, sets, J, lo, hi);
      solved = true;
    } catch (const infeasible_scenario_error&) {
      if (attempt == 9) throw;
    }
  }

  // per-obstacle desired distributions (shared u_nom, reduced-set weights)
  std::vector<DesiredDistribution> desired;
  std::vector<CoefficientMatrices> cms;
  const Eigen::VectorXd uniform_w1 = Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(instance.robot_samples.size()),
      1.0 / static_cast<double>(instance.robot_samples.size()));
  const KernelSpec rbf_w1 =
      KernelSpec::rbf(median_pairwise_distance(instance.robot_samples));
  for (std::size_t o = 0; o < n_obs; ++o) {
    const ScenarioSets sets{sel.w1_only.w1, sel.w2[o]};
    const KernelSpec rbf_w2 =
        KernelSpec::rbf(median_pairwise_distance(instance.obstacle_samples[o]));
    desired.push_back(build_desired(constraints[o], sets, u_nom,
                                    instance.robot_samples,
                                    instance.obstacle_samples[o], rbf_w1, rbf_w2));

    const Eigen::VectorXd uniform_w2 = Eigen::VectorXd::Constant(
        static_cast<Eigen::Index>(instance.obstacle_samples[o].size()),
        1.0 / static_cast<double>(instance.obstacle_samples[o].size()));
    cms.push_back(evaluate_coefficient_matrices(constraints[o], instance.robot_samples,
                                                uniform_w1, instance.obstacle_samples[o],
                                                uniform_w2));
  }

  // shared conditioning factor across the summed objective
  std::vector<const CoefficientMatrices*> cm_ptrs;
  std::vector<const DesiredDistribution*> d_ptrs;
  for (const auto& cm : cms) cm_ptrs.push_back(&cm);
  for (const auto& d : desired) d_ptrs.push_back(&d);
  const double scale = pooled_scale(cm_ptrs, d_ptrs);

  const KernelSpec kernel = KernelSpec::polynomial(cfg.degree);
  UnivariatePolyObjective total;
  for (std::size_t o = 0; o < n_obs; ++o)
    total = total + assemble_univariate(cms[o], desired[o], kernel, scale);

  SolverReport rep = minimize_univariate(total, J, cfg);
  rep.n = static_cast<int>(instance.robot_samples.size());
  rep.n_w1 = static_cast<int>(sel.w1_only.w1.size());
  rep.n_w2 = sel.w2.empty() ? 0 : static_cast<int>(sel.w2[0].size());

  if (!instance.holdout_robot.empty()) {
    const double u = rep.u_star(0);
    double min_eta = 1.0;
    long long pairs = 0;
    for (std::size_t o = 0; o < n_obs; ++o) {
      const double eta = validate_eta(constraints[o], u, instance.holdout_robot,
                                      instance.holdout_obstacles[o], Pairing::grid);
      rep.per_constraint_eta.push_back(eta);
      min_eta = std::min(min_eta, eta);
      pairs += static_cast<long long>(instance.holdout_robot.size()) *
               static_cast<long long>(instance.holdout_obstacles[o].size());
    }
    rep.empirical_eta = min_eta;
    rep.holdout_pairs = pairs;
  }
  return rep;
}

AvoidanceSimulation simulate_avoidance(const AgentState& robot,
                                       const std::vector<AgentState>& obstacles,
                                       const NoiseShape& position_noise,
                                       const NoiseShape& velocity_noise,
                                       int n_samples, int n_scenario, int trials,
                                       int steps, double dt,
                                       const SolverConfig& cfg) {
  AvoidanceSimulation sim;
  sim.obstacle_paths.resize(obstacles.size());
  sim.min_clearance = std::numeric_limits<double>::infinity();

  AgentState rob = robot;
  std::vector<AgentState> obs = obstacles;
  Rng rng(derive_seed(cfg.seed, 7));
  AgentSampler robot_sampler(rob, position_noise, velocity_noise);
  std::vector<AgentSampler> obstacle_samplers;
  for (const auto& o : obs)
    obstacle_samplers.emplace_back(o, position_noise, velocity_noise);

  for (int step = 0; step < steps; ++step) {
    AvoidanceInstance inst;
    inst.robot_radius = rob.radius;
    inst.n_scenario = n_scenario;
    inst.trials = trials;
    robot_sampler = robot_sampler.recentered(rob);
    inst.robot_samples = robot_sampler.sample_many(n_samples, rng);
    for (std::size_t o = 0; o < obs.size(); ++o) {
      inst.obstacle_radii.push_back(obs[o].radius);
      obstacle_samplers[o] = obstacle_samplers[o].recentered(obs[o]);
      inst.obstacle_samples.push_back(obstacle_samplers[o].sample_many(n_samples, rng));
    }
    SolverConfig step_cfg = cfg;
    step_cfg.seed = derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(step));
    double u = 1.0;
    try {
      u = avoid_step(inst, step_cfg).u_star(0);
    } catch (const infeasible_scenario_error&) {
      u = 0.0;  // stop when no safe scaling exists for the drawn scenarios
    }
    sim.u_history.push_back(u);

    // execute a freshly drawn velocity sample scaled by u
    const Eigen::VectorXd vel_draw = robot_sampler.sample(rng);
    rob.position += dt * u * Eigen::Vector2d(vel_draw(2), vel_draw(3));
    for (auto& o : obs) o.position += dt * o.velocity;

    sim.robot_path.push_back(rob.position);
    for (std::size_t o = 0; o < obs.size(); ++o) {
      sim.obstacle_paths[o].push_back(obs[o].position);
      const double clearance =
          (rob.position - obs[o].position).norm() - (rob.radius + obs[o].radius);
      sim.min_clearance = std::min(sim.min_clearance, clearance);
    }
  }
  return sim;
}

}  // namespace mmdcc
