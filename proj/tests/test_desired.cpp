#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mmdcc/collision.hpp"
#include "mmdcc/desired.hpp"
#include "mmdcc/random.hpp"

using namespace mmdcc;

namespace {

// constraint whose coefficient fields read (h0, h1, h2) straight from w1
PolynomialChanceConstraint passthrough_quadratic() {
  PolynomialChanceConstraint c;
  for (int i = 0; i <= 2; ++i)
    c.coefficient_fields.push_back(
        [i](const Eigen::VectorXd& w1, const Eigen::VectorXd&) { return w1(i); });
  return c;
}

Eigen::VectorXd coeffs(double h0, double h1, double h2) {
  Eigen::VectorXd v(3);
  v << h0, h1, h2;
  return v;
}

std::vector<Eigen::VectorXd> collision_pool(Rng& rng, const AgentState& nominal,
                                            int n) {
  const AgentSampler sampler(nominal, {0.02, 0.3, 3.6}, {0.005, -0.3, 3.6});
  return sampler.sample_many(n, rng);
}

const AgentState kRobot{{0, 0}, {1, 0}, 0.4};
const AgentState kObstacle{{5, 2}, {-1, -0.8}, 0.4};

}  // namespace

TEST_CASE("trials = 1 returns the single sampled pair") {
  Rng rng(1);
  const auto c = passthrough_quadratic();
  std::vector<Eigen::VectorXd> pool1{coeffs(-1, 0, 0), coeffs(-2, 0, 0)};
  std::vector<Eigen::VectorXd> pool2{coeffs(0, 0, 0)};
  const auto sets = select_scenario_sets(c, pool1, pool2, 1, 1, 1, 0.0, 99);
  CHECK(sets.w1.size() == 1);
  CHECK(sets.w2.size() == 1);
}

TEST_CASE("a zero-violation candidate beats any positive score") {
  const auto c = passthrough_quadratic();
  // pool1[0] is always satisfied, pool1[1] always violated at probe 0
  std::vector<Eigen::VectorXd> pool1{coeffs(-1, 0, 0), coeffs(5, 0, 0)};
  std::vector<Eigen::VectorXd> pool2{coeffs(0, 0, 0)};
  // many trials of size 1 must settle on the satisfied sample
  const auto sets = select_scenario_sets(c, pool1, pool2, 1, 1, 32, 0.0, 7);
  REQUIRE(sets.w1.size() == 1);
  CHECK(sets.w1[0](0) == -1.0);
}

TEST_CASE("selection matches exhaustive scoring of the same candidates") {
  Rng rng(12);
  const auto c = collision_constraint(kRobot.radius, kObstacle.radius);
  const auto pool1 = collision_pool(rng, kRobot, 15);
  const auto pool2 = collision_pool(rng, kObstacle, 15);
  const double probe = 0.7;
  const std::uint64_t seed = 4242;
  const auto sets = select_scenario_sets(c, pool1, pool2, 5, 5, 5, probe, seed);

  // replay the same five candidate draws and score them directly
  Rng replay(seed);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> bi1, bi2;
  for (int t = 0; t < 5; ++t) {
    const auto i1 = replay.choose(15, 5);
    const auto i2 = replay.choose(15, 5);
    double score = 0.0;
    for (const int a : i1)
      for (const int b : i2)
        score += std::max(0.0, c.evaluate(pool1[static_cast<std::size_t>(a)],
                                          pool2[static_cast<std::size_t>(b)], probe));
    if (score < best ||
        (score == best && std::make_pair(i1, i2) < std::make_pair(bi1, bi2))) {
      best = score;
      bi1 = i1;
      bi2 = i2;
    }
  }
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK((sets.w1[k] - pool1[static_cast<std::size_t>(bi1[k])]).norm() == 0.0);
    CHECK((sets.w2[k] - pool2[static_cast<std::size_t>(bi2[k])]).norm() == 0.0);
  }
}

TEST_CASE("scenario solve: quadratic interval") {
  const auto c = passthrough_quadratic();
  // u^2 - 1 <= 0, J = (u-1)^2, u >= 0  ->  u = 1
  ScenarioSets sets{{coeffs(-1, 0, 1)}, {coeffs(0, 0, 0)}};
  const double u = solve_scenario(c, sets, Polynomial({1, -2, 1}), 0.0,
                                  std::numeric_limits<double>::infinity());
  CHECK(u == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scenario solve: closest feasible point") {
  const auto c = passthrough_quadratic();
  // 2 - u <= 0  ->  feasible [2, inf), J minimized at 2
  ScenarioSets sets{{coeffs(2, -1, 0)}, {coeffs(0, 0, 0)}};
  const double u = solve_scenario(c, sets, Polynomial({1, -2, 1}), 0.0,
                                  std::numeric_limits<double>::infinity());
  CHECK(u == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("scenario solve: infeasible intersection throws") {
  const auto c = passthrough_quadratic();
  ScenarioSets sets{{coeffs(1, 0, 0)}, {coeffs(0, 0, 0)}};  // 1 <= 0 never holds
  CHECK_THROWS_AS(solve_scenario(c, sets, Polynomial({1, -2, 1}), 0.0, 5.0),
                  infeasible_scenario_error);
}

TEST_CASE("scenario solve matches a dense grid search on a collision instance") {
  Rng rng(77);
  const auto c = collision_constraint(kRobot.radius, kObstacle.radius);
  const Polynomial J({1, -2, 1});
  for (int rep = 0; rep < 5; ++rep) {
    ScenarioSets sets{collision_pool(rng, kRobot, 20),
                      collision_pool(rng, kObstacle, 20)};
    double u_solved;
    try {
      u_solved = solve_scenario(c, sets, J, 0.0, 5.0);
    } catch (const infeasible_scenario_error&) {
      continue;
    }
    // grid oracle at 1e-4 resolution
    double best_u = -1.0, best_j = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 50000; ++k) {
      const double u = k * 1e-4;
      bool ok = true;
      for (const auto& w1 : sets.w1) {
        for (const auto& w2 : sets.w2)
          if (c.evaluate(w1, w2, u) > 0.0) {
            ok = false;
            break;
          }
        if (!ok) break;
      }
      if (!ok) continue;
      const double j = J(u);
      if (j < best_j) {
        best_j = j;
        best_u = u;
      }
    }
    REQUIRE(best_u >= 0.0);
    CHECK(std::abs(u_solved - best_u) <= 1e-4 + 1e-9);
    CHECK(J(u_solved) <= best_j + 1e-9);
  }
}

TEST_CASE("build_desired: single pair and uniform fallback weights") {
  const auto c = passthrough_quadratic();
  ScenarioSets sets{{coeffs(-3, 0, 0)}, {coeffs(0, 0, 0)}};
  const auto d1 = build_desired(c, sets, 0.5, sets.w1, sets.w2, std::nullopt);
  REQUIRE(d1.values.size() == 1);
  CHECK(d1.values(0) == -3.0);
  CHECK(d1.weights(0) == 1.0);

  ScenarioSets sets2{{coeffs(-3, 0, 0), coeffs(-1, 0, 0)},
                     {coeffs(0, 0, 0), coeffs(0, 0, 0), coeffs(0, 0, 0)}};
  const auto d2 = build_desired(c, sets2, 0.0, sets2.w1, sets2.w2, std::nullopt);
  CHECK(d2.weights.isApproxToConstant(1.0 / 6.0));
}

TEST_CASE("build_desired rejects a stale decision") {
  const auto c = passthrough_quadratic();
  ScenarioSets sets{{coeffs(1, 0, 0)}, {coeffs(0, 0, 0)}};  // f = 1 > tolerance
  CHECK_THROWS_AS(build_desired(c, sets, 0.0, sets.w1, sets.w2, std::nullopt),
                  std::invalid_argument);
}

TEST_CASE("desired distribution has its whole mass at f <= 0") {
  Rng rng(5);
  const auto c = collision_constraint(kRobot.radius, kObstacle.radius);
  const auto pool1 = collision_pool(rng, kRobot, 25);
  const auto pool2 = collision_pool(rng, kObstacle, 25);
  const auto sets = select_scenario_sets(c, pool1, pool2, 10, 10, 30, 0.5, 3);
  const double u_nom = solve_scenario(c, sets, Polynomial({1, -2, 1}), 0.0, 5.0);
  const auto rbf = KernelSpec::rbf(median_pairwise_distance(pool1));
  const auto d = build_desired(c, sets, u_nom, pool1, pool2, rbf);
  CHECK(d.max_value() <= kViolationTolerance);
  CHECK(std::abs(d.weights.sum() - 1.0) <= 1e-9);
  // the solved decision dominates every feasible grid point of J
  const Polynomial J({1, -2, 1});
  for (int k = 0; k <= 5000; ++k) {
    const double u = k * 1e-3;
    bool feasible = true;
    for (const auto& w1 : sets.w1) {
      for (const auto& w2 : sets.w2)
        if (c.evaluate(w1, w2, u) > 0.0) {
          feasible = false;
          break;
        }
      if (!feasible) break;
    }
    if (feasible) CHECK(J(u_nom) <= J(u) + 1e-9);
  }
}

TEST_CASE("affine scenario path returns a feasible low-cost point") {
  // two half-spaces u_0 + u_1 <= 1 and -u_0 <= 0.2 in a box, J = ||u - (2,2)||^2
  AffineChanceConstraint c1, c2;
  c1.slope_fields = {[](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 1.0; },
                     [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 1.0; }};
  c1.intercept_field = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return -1.0;
  };
  c2.slope_fields = {[](const Eigen::VectorXd&, const Eigen::VectorXd&) { return -1.0; },
                     [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; }};
  c2.intercept_field = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return -0.2;
  };
  ScenarioSets sets{{Eigen::VectorXd::Zero(1)}, {Eigen::VectorXd::Zero(1)}};
  QuadraticObjective J;
  J.quad = Eigen::Matrix2d::Identity();
  J.lin = Eigen::Vector2d(-4, -4);
  J.constant = 8.0;
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -3.0);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 3.0);
  const Eigen::VectorXd u = solve_scenario({c1, c2}, sets, J, lo, hi);
  CHECK(u(0) + u(1) <= 1.0 + kViolationTolerance);
  CHECK(-u(0) <= 0.2 + kViolationTolerance);
  // optimum of this projection is (0.5, 0.5)
  CHECK(J.value(u) <= J.value(Eigen::Vector2d(0.5, 0.5)) + 1e-6);
}
