#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mmdcc/collision.hpp"
#include "mmdcc/random.hpp"

using namespace mmdcc;

namespace {

const NoiseShape kPosNoise{0.02, 0.3, 3.6};
const NoiseShape kVelNoise{0.005, -0.3, 3.6};

double sample_moment(const std::vector<double>& xs, int k) {
  double m = 0.0;
  for (const double x : xs) m += std::pow(x, k);
  return m / static_cast<double>(xs.size());
}

struct SampleStats {
  double mean, var, skew, kurt;
};

SampleStats stats_of(const std::vector<double>& xs) {
  SampleStats s{};
  s.mean = sample_moment(xs, 1);
  std::vector<double> centered;
  centered.reserve(xs.size());
  for (const double x : xs) centered.push_back(x - s.mean);
  s.var = sample_moment(centered, 2);
  const double sd = std::sqrt(s.var);
  s.skew = sample_moment(centered, 3) / (sd * sd * sd);
  s.kurt = sample_moment(centered, 4) / (s.var * s.var);
  return s;
}

}  // namespace

TEST_CASE("hand-expanded head-on geometry") {
  // robot at the origin moving +x, static obstacle at (5, 0), summed radius 1:
  // a = -5, b = 0, c = 1, e = 0, g = 0, rho = 24 -> (h0, h1, h2) = (0, 0, 1)
  AgentState robot{{0, 0}, {1, 0}, 0.5};
  AgentState obstacle{{5, 0}, {0, 0}, 0.5};
  const auto h = collision_coefficients(robot, obstacle);
  CHECK(h.h0 == 0.0);
  CHECK(h.h1 == 0.0);
  CHECK(h.h2 == 1.0);
}

TEST_CASE("matching velocities zero the cleared form at u = 1") {
  AgentState robot{{0, 0}, {0.7, -0.2}, 0.3};
  AgentState obstacle{{2, 1}, {0.7, -0.2}, 0.3};
  const auto h = collision_coefficients(robot, obstacle);
  CHECK(h.h0 + h.h1 + h.h2 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("coefficients match the direct cone formula on random states") {
  Rng rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    AgentState robot{{rng.uniform(-3, 3), rng.uniform(-3, 3)},
                     {rng.uniform(-2, 2), rng.uniform(-2, 2)},
                     rng.uniform(0.2, 0.6)};
    AgentState obstacle{{rng.uniform(-3, 3), rng.uniform(-3, 3)},
                        {rng.uniform(-2, 2), rng.uniform(-2, 2)},
                        rng.uniform(0.2, 0.6)};
    const auto h = collision_coefficients(robot, obstacle);
    for (int t = 0; t < 10; ++t) {
      const double u = rng.uniform(0, 3);
      const Eigen::Vector2d r = robot.position - obstacle.position;
      const Eigen::Vector2d v = u * robot.velocity - obstacle.velocity;
      const double R = robot.radius + obstacle.radius;
      const double direct =
          r.dot(v) * r.dot(v) - (r.squaredNorm() - R * R) * v.squaredNorm();
      CHECK(std::abs(h.h0 + h.h1 * u + h.h2 * u * u - direct) <=
            1e-9 * (1.0 + std::abs(direct)));
    }
  }
}

TEST_CASE("cleared form keeps the sign of the rational cone expression") {
  Rng rng(32);
  for (int rep = 0; rep < 200; ++rep) {
    AgentState robot{{rng.uniform(-3, 3), rng.uniform(-3, 3)},
                     {rng.uniform(-2, 2), rng.uniform(-2, 2)},
                     0.4};
    AgentState obstacle{{rng.uniform(-3, 3), rng.uniform(-3, 3)},
                        {rng.uniform(-2, 2), rng.uniform(-2, 2)},
                        0.4};
    const double u = rng.uniform(0, 2.5);
    const Eigen::Vector2d r = robot.position - obstacle.position;
    const Eigen::Vector2d v = u * robot.velocity - obstacle.velocity;
    if (v.squaredNorm() <= 1e-12) continue;
    const double R = robot.radius + obstacle.radius;
    const double rational =
        r.dot(v) * r.dot(v) / v.squaredNorm() - r.squaredNorm() + R * R;
    const auto h = collision_coefficients(robot, obstacle);
    const double cleared = h.h0 + h.h1 * u + h.h2 * u * u;
    if (std::abs(rational) > 1e-9)
      CHECK(std::signbit(cleared) == std::signbit(rational));
  }
}

TEST_CASE("four-moment spec validation") {
  const FourMomentSpec zero_variance{0.0, 0.0, 0.0, 3.0};
  CHECK_THROWS_AS(zero_variance.validate(), std::invalid_argument);
  const FourMomentSpec infeasible{0.0, 1.0, 2.0, 3.0};  // kurt < skew^2 + 1
  CHECK_THROWS_AS(infeasible.validate(), std::invalid_argument);
  const FourMomentSpec fine{0.0, 1.0, 0.5, 4.0};
  CHECK_NOTHROW(fine.validate());
}

TEST_CASE("gaussian corner reduces to a single gaussian") {
  const FourMomentSampler sampler({1.5, 2.0, 0.0, 3.0});
  CHECK(sampler.mixture().mu1 == 0.0);
  CHECK(sampler.mixture().sigma1 == 1.0);
  Rng rng(33);
  std::vector<double> xs;
  for (int i = 0; i < 100000; ++i) xs.push_back(sampler.sample(rng));
  const auto s = stats_of(xs);
  CHECK(std::abs(s.mean - 1.5) <= 0.05);
  CHECK(std::abs(s.var - 2.0) <= 0.1);
  CHECK(std::abs(s.skew) <= 0.05);
  CHECK(std::abs(s.kurt - 3.0) <= 0.15);
}

TEST_CASE("skewed spec is matched within five percent at 1e5 draws") {
  const FourMomentSpec spec{1.0, 0.04, 0.5, 4.0};
  const FourMomentSampler sampler(spec);
  Rng rng(34);
  std::vector<double> xs;
  for (int i = 0; i < 100000; ++i) xs.push_back(sampler.sample(rng));
  const auto s = stats_of(xs);
  CHECK(std::abs(s.mean - spec.mean) <= 0.05 * std::max(1.0, std::abs(spec.mean)));
  CHECK(std::abs(s.var - spec.variance) <= 0.05 * spec.variance);
  CHECK(std::abs(s.skew - spec.skewness) <= 0.05 * std::max(1.0, spec.skewness));
  CHECK(std::abs(s.kurt - spec.kurtosis) <= 0.05 * spec.kurtosis);
}

TEST_CASE("mean shift translates the sample stream draw for draw") {
  const FourMomentSampler base({0.0, 0.04, 0.5, 4.0});
  const FourMomentSampler shifted = base.with_moments(2.5, 0.04);
  Rng a(35), b(35);
  for (int i = 0; i < 200; ++i)
    CHECK(shifted.sample(a) == doctest::Approx(base.sample(b) + 2.5).epsilon(1e-12));
}

TEST_CASE("avoid_step: zero uncertainty and non-colliding geometry keep u = 1") {
  // obstacle crossing far behind the robot: u = 1 already collision-free
  AgentState robot{{0, 0}, {1, 0}, 0.3};
  AgentState obstacle{{-6, 3}, {0.2, 0.1}, 0.3};
  AvoidanceInstance inst;
  inst.robot_radius = robot.radius;
  inst.obstacle_radii = {obstacle.radius};
  Eigen::VectorXd rw(4), ow(4);
  rw << 0, 0, 1, 0;
  ow << -6, 3, 0.2, 0.1;
  for (int i = 0; i < 10; ++i) {
    inst.robot_samples.push_back(rw);
    inst.obstacle_samples.emplace_back();
  }
  inst.obstacle_samples.assign(1, std::vector<Eigen::VectorXd>(10, ow));
  inst.n_scenario = 5;
  inst.trials = 3;
  SolverConfig cfg;
  cfg.rho1 = 10.0;
  cfg.rho2 = 1.0;
  cfg.degree = 3;
  cfg.seed = 1;
  const auto rep = avoid_step(inst, cfg);
  CHECK(rep.u_star(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("avoid_step reports per-obstacle etas that match a recount") {
  Rng rng(36);
  AgentState robot{{0, 0}, {1, 0}, 0.4};
  std::vector<AgentState> obstacles{{{5, 2}, {-1, -0.8}, 0.4},
                                    {{6, -2.5}, {-1.2, 0.9}, 0.35}};
  const AgentSampler rs(robot, kPosNoise, kVelNoise);
  AvoidanceInstance inst;
  inst.robot_radius = robot.radius;
  inst.robot_samples = rs.sample_many(25, rng);
  inst.holdout_robot = rs.sample_many(120, rng);
  for (const auto& o : obstacles) {
    inst.obstacle_radii.push_back(o.radius);
    const AgentSampler os(o, kPosNoise, kVelNoise);
    inst.obstacle_samples.push_back(os.sample_many(25, rng));
    inst.holdout_obstacles.push_back(os.sample_many(120, rng));
  }
  inst.n_scenario = 12;
  inst.trials = 30;
  SolverConfig cfg;
  cfg.rho1 = 10.0;
  cfg.rho2 = 1.0;
  cfg.degree = 2;
  cfg.seed = 9;
  const auto rep = avoid_step(inst, cfg);
  REQUIRE(rep.per_constraint_eta.size() == 2);
  for (std::size_t o = 0; o < 2; ++o) {
    const auto c = collision_constraint(robot.radius, obstacles[o].radius);
    const double eta = validate_eta(c, rep.u_star(0), inst.holdout_robot,
                                    inst.holdout_obstacles[o], Pairing::grid);
    CHECK(rep.per_constraint_eta[o] == eta);
  }
  CHECK(rep.empirical_eta ==
        std::min(rep.per_constraint_eta[0], rep.per_constraint_eta[1]));
}

TEST_CASE("raising the kernel degree does not lose collision probability") {
  Rng rng(37);
  AgentState robot{{0, 0}, {1, 0}, 0.4};
  AgentState obstacle{{5, 2}, {-1, -0.8}, 0.4};
  const AgentSampler rs(robot, kPosNoise, kVelNoise);
  const AgentSampler os(obstacle, kPosNoise, kVelNoise);
  AvoidanceInstance inst;
  inst.robot_radius = robot.radius;
  inst.obstacle_radii = {obstacle.radius};
  inst.robot_samples = rs.sample_many(30, rng);
  inst.obstacle_samples = {os.sample_many(30, rng)};
  inst.holdout_robot = rs.sample_many(250, rng);
  inst.holdout_obstacles = {os.sample_many(250, rng)};
  inst.n_scenario = 20;
  inst.trials = 50;

  SolverConfig cfg;
  cfg.rho1 = 10.0;
  cfg.rho2 = 1.0;
  cfg.seed = 4;
  cfg.degree = 2;
  const double eta2 = avoid_step(inst, cfg).empirical_eta;
  cfg.degree = 5;
  const double eta5 = avoid_step(inst, cfg).empirical_eta;
  CHECK(eta5 >= eta2 - 0.02);
}

TEST_CASE("closed-loop simulation stays clear of a crossing obstacle") {
  AgentState robot{{0, 0}, {1, 0}, 0.3};
  std::vector<AgentState> obstacles{{{4, 1.6}, {-1, -0.65}, 0.3}};
  SolverConfig cfg;
  cfg.rho1 = 10.0;
  cfg.rho2 = 1.0;
  cfg.degree = 3;
  cfg.seed = 21;
  const auto sim = simulate_avoidance(robot, obstacles, {0.005, 0.3, 3.6},
                                      {0.002, -0.3, 3.6}, 15, 10, 20, 35, 0.1, cfg);
  CHECK(sim.u_history.size() == 35);
  CHECK(sim.min_clearance > 0.0);
}
