#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mmdcc/collision.hpp"
#include "mmdcc/random.hpp"
#include "mmdcc/solvers.hpp"

using namespace mmdcc;

namespace {

SolverConfig scalar_cfg(double rho1, double rho2, double lo = 0.0,
                        double hi = std::numeric_limits<double>::infinity()) {
  SolverConfig cfg;
  cfg.rho1 = rho1;
  cfg.rho2 = rho2;
  cfg.bounds = Bounds::scalar(lo, hi);
  cfg.grid_resolution = 1e-3;
  cfg.horizon = 5.0;
  return cfg;
}

UnivariatePolyObjective poly_obj(std::vector<double> coeffs) {
  UnivariatePolyObjective obj;
  obj.poly = Polynomial(std::move(coeffs));
  return obj;
}

PolynomialChanceConstraint passthrough() {
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

}  // namespace

TEST_CASE("pure cost: minimum of (u-1)^2 over u >= 0") {
  const auto rep = minimize_univariate(poly_obj({0.0}), Polynomial({1, -2, 1}),
                                       scalar_cfg(0.0, 1.0));
  CHECK(rep.u_star(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.objective_value ==
        doctest::Approx(rep.rho1 * rep.mmd_value + rep.rho2 * rep.cost_value)
            .epsilon(1e-12));
}

TEST_CASE("pure mmd: (u-2)^4 expanded") {
  // (u-2)^4 = 16 - 32u + 24u^2 - 8u^3 + u^4
  const auto rep = minimize_univariate(poly_obj({16, -32, 24, -8, 1}),
                                       Polynomial({0.0}), scalar_cfg(1.0, 0.0));
  CHECK(std::abs(rep.u_star(0) - 2.0) <= 1e-4);
}

TEST_CASE("random quartic + quadratic matches a fine-grid oracle") {
  Rng rng(10);
  for (int rep_i = 0; rep_i < 100; ++rep_i) {
    UnivariatePolyObjective obj = poly_obj(
        {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
         rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2.0)});
    const Polynomial J({rng.uniform(-1, 1), rng.uniform(-2, 2), 1.0});
    const auto cfg = scalar_cfg(1.0, 1.0, 0.0, 4.0);
    const auto rep = minimize_univariate(obj, J, cfg);

    const Polynomial total = 1.0 * obj.poly + J;
    double best_u = 0.0, best_v = total(0.0);
    for (long long k = 1; k <= 400000; ++k) {
      const double u = static_cast<double>(k) * 1e-5;
      const double v = total(u);
      if (v < best_v) {
        best_v = v;
        best_u = u;
      }
    }
    CHECK(std::abs(rep.u_star(0) - best_u) <= 1e-4);
  }
}

TEST_CASE("box quadratic: identity objective centers at the origin") {
  QuadraticObjective mmd = QuadraticObjective::zero(2);
  QuadraticObjective J;
  J.quad = Eigen::Matrix2d::Identity();
  J.lin = Eigen::Vector2d::Zero();
  SolverConfig cfg;
  cfg.rho1 = 0.0;
  cfg.rho2 = 1.0;
  cfg.bounds = Bounds::box(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1));
  const auto rep = minimize_box_quadratic(mmd, J, cfg);
  CHECK(rep.u_star.norm() <= 1e-8);
  CHECK(rep.converged);
}

TEST_CASE("box quadratic: separable clip to the box") {
  QuadraticObjective J;
  J.quad = Eigen::Matrix2d::Identity();
  J.lin = Eigen::Vector2d(-6.0, 0.0);  // unconstrained minimum (3, 0)
  SolverConfig cfg;
  cfg.rho1 = 0.0;
  cfg.rho2 = 1.0;
  cfg.bounds = Bounds::box(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1));
  const auto rep = minimize_box_quadratic(QuadraticObjective::zero(2), J, cfg);
  CHECK(rep.u_star(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(rep.u_star(1)) <= 1e-8);
}

TEST_CASE("box quadratic matches a dense 2-d grid oracle") {
  Rng rng(11);
  for (int rep_i = 0; rep_i < 50; ++rep_i) {
    Eigen::Matrix2d A;
    A << rng.uniform(0.3, 2.0), rng.uniform(-0.5, 0.5), 0.0, rng.uniform(0.3, 2.0);
    QuadraticObjective J;
    J.quad = A.transpose() * A + 0.05 * Eigen::Matrix2d::Identity();
    J.lin = Eigen::Vector2d(rng.uniform(-2, 2), rng.uniform(-2, 2));
    SolverConfig cfg;
    cfg.rho1 = 0.0;
    cfg.rho2 = 1.0;
    cfg.bounds = Bounds::box(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1));
    const auto rep = minimize_box_quadratic(QuadraticObjective::zero(2), J, cfg);

    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector2d best_u = Eigen::Vector2d::Zero();
    for (int i = 0; i <= 2000; ++i)
      for (int k = 0; k <= 2000; ++k) {
        const Eigen::Vector2d u(-1.0 + i * 1e-3, -1.0 + k * 1e-3);
        const double v = J.value(u);
        if (v < best) {
          best = v;
          best_u = u;
        }
      }
    CHECK((rep.u_star - best_u).lpNorm<Eigen::Infinity>() <= 1e-3);
  }
}

TEST_CASE("scenario baseline equals the scenario solver on one pair") {
  const auto c = passthrough();
  const std::vector<Eigen::VectorXd> w1{coeffs(-1, 0, 1)};
  const std::vector<Eigen::VectorXd> w2{coeffs(0, 0, 0)};
  const auto rep = baseline_scenario(c, w1, w2, Polynomial({1, -2, 1}),
                                     scalar_cfg(0.0, 1.0));
  CHECK(rep.u_star(0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("adding scenario constraints never lowers the optimal cost") {
  Rng rng(12);
  const auto c = passthrough();
  for (int rep_i = 0; rep_i < 20; ++rep_i) {
    std::vector<Eigen::VectorXd> w1;
    for (int i = 0; i < 12; ++i)
      w1.push_back(coeffs(rng.uniform(-4, -1), rng.uniform(-1, 1),
                          rng.uniform(0.2, 1.0)));
    const std::vector<Eigen::VectorXd> w2{coeffs(0, 0, 0)};
    const Polynomial J({1, -2, 1});
    const std::vector<Eigen::VectorXd> small(w1.begin(), w1.begin() + 5);
    const auto rep_small = baseline_scenario(c, small, w2, J, scalar_cfg(0, 1));
    const auto rep_full = baseline_scenario(c, w1, w2, J, scalar_cfg(0, 1));
    CHECK(rep_full.cost_value >= rep_small.cost_value - 1e-12);
  }
}

TEST_CASE("large scenario baseline matches a grid oracle on a collision instance") {
  Rng rng(13);
  const AgentState robot{{0, 0}, {1, 0}, 0.4};
  const AgentState obstacle{{5, 2}, {-1, -0.8}, 0.4};
  const AgentSampler rs(robot, {0.004, 0.3, 3.6}, {0.001, -0.3, 3.6});
  const AgentSampler os(obstacle, {0.004, 0.3, 3.6}, {0.001, -0.3, 3.6});
  const auto pool1 = rs.sample_many(200, rng);
  const auto pool2 = os.sample_many(200, rng);
  const auto c = collision_constraint(0.4, 0.4);
  const Polynomial J({1, -2, 1});

  double solved_u = -1.0;
  try {
    solved_u = baseline_scenario(c, pool1, pool2, J, scalar_cfg(0, 1)).u_star(0);
  } catch (const infeasible_scenario_error&) {
  }

  double best_u = -1.0, best_j = std::numeric_limits<double>::infinity();
  const SatisfactionGrid grid(c, pool1, pool2);
  for (int k = 0; k <= 50000; ++k) {
    const double u = k * 1e-4;
    if (grid.fraction(u) < 1.0) continue;
    if (J(u) < best_j) {
      best_j = J(u);
      best_u = u;
    }
  }
  if (solved_u < 0.0) {
    CHECK(best_u < 0.0);  // both routes agree the instance is infeasible
  } else {
    REQUIRE(best_u >= 0.0);
    CHECK(std::abs(solved_u - best_u) <= 1e-4 + 1e-9);
  }
}

TEST_CASE("saa baseline: fractions and selection") {
  const auto c = passthrough();
  // two samples: one always satisfied, one violated for u < 2
  std::vector<Eigen::VectorXd> w1{coeffs(-5, 0, 0), coeffs(2, -1, 0)};
  std::vector<Eigen::VectorXd> w2{coeffs(0, 0, 0)};
  const Polynomial J({1, -2, 1});
  // gamma = 0.5: fraction at u < 2 is 1/2, feasible; optimum of J at u = 1
  const auto rep_half = baseline_saa(c, w1, w2, J, 0.5, scalar_cfg(0, 1));
  CHECK(rep_half.u_star(0) == doctest::Approx(1.0).epsilon(1e-9));
  // gamma = 1: needs both, so u >= 2
  const auto rep_all = baseline_saa(c, w1, w2, J, 1.0, scalar_cfg(0, 1));
  CHECK(rep_all.u_star(0) == doctest::Approx(2.0).epsilon(1e-6));

  // unattainable fraction
  std::vector<Eigen::VectorXd> w1_bad{coeffs(1, 0, 0)};
  CHECK_THROWS_AS(baseline_saa(c, w1_bad, w2, J, 0.5, scalar_cfg(0, 1)),
                  infeasible_baseline_error);
}

TEST_CASE("saa matches exhaustive enumeration on a random instance") {
  Rng rng(14);
  const auto c = passthrough();
  std::vector<Eigen::VectorXd> w1;
  for (int i = 0; i < 30; ++i)
    w1.push_back(coeffs(rng.uniform(-3, 1), rng.uniform(-1, 1),
                        rng.uniform(-0.5, 1.0)));
  std::vector<Eigen::VectorXd> w2{coeffs(0, 0, 0), coeffs(0, 0, 0)};
  const Polynomial J({1, -2, 1});
  const auto cfg = scalar_cfg(0, 1, 0.0, 3.0);
  double found_u = -1.0;
  try {
    found_u = baseline_saa(c, w1, w2, J, 0.8, cfg).u_star(0);
  } catch (const infeasible_baseline_error&) {
  }

  double best_u = -1.0, best_j = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 3000; ++k) {
    const double u = k * 1e-3;
    int count = 0;
    for (const auto& a : w1)
      for (const auto& b : w2)
        if (c.evaluate(a, b, u) <= 0.0) ++count;
    if (static_cast<double>(count) / 60.0 < 0.8) continue;
    if (J(u) < best_j) {
      best_j = J(u);
      best_u = u;
    }
  }
  CHECK(found_u == doctest::Approx(best_u).epsilon(1e-12));
}

TEST_CASE("mean-variance baseline: bounds and selection") {
  CHECK(eta_bound_stated(1.0) == 0.5);
  CHECK(eta_bound_cantelli(1.0) == 0.5);
  CHECK(cantelli_epsilon(0.5) == doctest::Approx(1.0));

  const auto c = passthrough();
  // deterministic f = -3 (zero variance): constraint inactive everywhere
  std::vector<Eigen::VectorXd> w1{coeffs(-3, 0, 0)};
  std::vector<Eigen::VectorXd> w2{coeffs(0, 0, 0)};
  const auto rep = baseline_mean_var(c, w1, w2, 1.0, Polynomial({1, -2, 1}),
                                     scalar_cfg(0, 1));
  CHECK(rep.u_star(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.implied_eta_stated == 0.5);
  CHECK(rep.implied_eta_cantelli == 0.5);

  std::vector<Eigen::VectorXd> w1_bad{coeffs(3, 0, 1)};
  CHECK_THROWS_AS(
      baseline_mean_var(c, w1_bad, w2, 1.0, Polynomial({1, -2, 1}), scalar_cfg(0, 1)),
      infeasible_baseline_error);
}

TEST_CASE("mean and variance polynomials match direct statistics") {
  Rng rng(15);
  const auto c = passthrough();
  std::vector<Eigen::VectorXd> w1, w2;
  for (int i = 0; i < 9; ++i)
    w1.push_back(coeffs(rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(-1, 1)));
  for (int i = 0; i < 7; ++i) w2.push_back(coeffs(0, 0, 0));
  const auto [mean, second] = mean_var_polynomials(c, w1, w2);
  for (int t = 0; t < 5; ++t) {
    const double u = rng.uniform(0, 2);
    double m = 0.0, s = 0.0;
    for (const auto& a : w1)
      for (const auto& b : w2) {
        const double f = c.evaluate(a, b, u);
        m += f;
        s += f * f;
      }
    m /= 63.0;
    s /= 63.0;
    CHECK(mean(u) == doctest::Approx(m).epsilon(1e-10));
    CHECK(std::max(second(u) - mean(u) * mean(u), 0.0) ==
          doctest::Approx(std::max(s - m * m, 0.0)).epsilon(1e-9));
  }
}

TEST_CASE("validate_eta closed cases") {
  PolynomialChanceConstraint always;
  always.coefficient_fields = {
      [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return -1.0; }};
  PolynomialChanceConstraint never;
  never.coefficient_fields = {
      [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 1.0; }};
  std::vector<Eigen::VectorXd> h{coeffs(0, 0, 0), coeffs(0, 0, 0)};
  CHECK(validate_eta(always, 0.3, h, h, Pairing::grid) == 1.0);
  CHECK(validate_eta(never, 0.3, h, h, Pairing::grid) == 0.0);
  CHECK(validate_eta(always, 0.3, h, h, Pairing::paired) == 1.0);
  CHECK_THROWS_AS(validate_eta(always, 0.3, {}, h, Pairing::grid),
                  std::invalid_argument);
}

TEST_CASE("validate_eta on a symmetric sampler sits near one half") {
  PolynomialChanceConstraint sign_of_w1;
  sign_of_w1.coefficient_fields = {
      [](const Eigen::VectorXd& a, const Eigen::VectorXd&) { return a(0); }};
  Rng rng(16);
  std::vector<Eigen::VectorXd> w1, w2;
  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXd v(1);
    v << rng.normal();
    w1.push_back(v);
  }
  w2.push_back(Eigen::VectorXd::Zero(1));
  const double eta = validate_eta(sign_of_w1, 0.0, w1, w2, Pairing::grid);
  CHECK(std::abs(eta - 0.5) <= 0.02);
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  cfg.rho1 = 0.0;
  cfg.rho2 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.rho2 = 1.0;
  cfg.grid_resolution = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
