#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mmdcc/collision.hpp"
#include "mmdcc/constraint.hpp"
#include "mmdcc/random.hpp"

using namespace mmdcc;

namespace {

PolynomialChanceConstraint linear_in_w() {
  // f = (w1_0 + w2_0) + w1_1 * u + w2_1 * u^2
  PolynomialChanceConstraint c;
  c.coefficient_fields = {
      [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a(0) + b(0); },
      [](const Eigen::VectorXd& a, const Eigen::VectorXd&) { return a(1); },
      [](const Eigen::VectorXd&, const Eigen::VectorXd& b) { return b(1); }};
  return c;
}

std::vector<Eigen::VectorXd> random_points(Rng& rng, int n) {
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p(2);
    p << rng.uniform(-2, 2), rng.uniform(-2, 2);
    pts.push_back(p);
  }
  return pts;
}

}  // namespace

TEST_CASE("evaluate at u = 0 returns the constant field") {
  const auto c = linear_in_w();
  Eigen::VectorXd w1(2), w2(2);
  w1 << 1.5, -3.0;
  w2 << 0.25, 2.0;
  CHECK(c.evaluate(w1, w2, 0.0) == 1.75);
}

TEST_CASE("affine with zero slopes is the intercept") {
  AffineChanceConstraint c;
  c.slope_fields = {[](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; },
                    [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; }};
  c.intercept_field = [](const Eigen::VectorXd& a, const Eigen::VectorXd&) {
    return a(0) - 7.0;
  };
  Eigen::VectorXd w1(1), w2(1);
  w1 << 3.0;
  w2 << 0.0;
  Eigen::VectorXd u(2);
  u << 10.0, -10.0;
  CHECK(c.evaluate(w1, w2, u) == -4.0);
  Eigen::VectorXd bad(1);
  CHECK_THROWS_AS(c.evaluate(w1, w2, bad), std::invalid_argument);
}

TEST_CASE("collision-cone constraint matches the direct formula") {
  Rng rng(21);
  const auto constraint = collision_constraint(0.4, 0.3);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd w1(4), w2(4);
    for (int k = 0; k < 4; ++k) {
      w1(k) = rng.uniform(-3, 3);
      w2(k) = rng.uniform(-3, 3);
    }
    for (int t = 0; t < 10; ++t) {
      const double u = rng.uniform(0, 3);
      const Eigen::Vector2d r(w1(0) - w2(0), w1(1) - w2(1));
      const Eigen::Vector2d v(u * w1(2) - w2(2), u * w1(3) - w2(3));
      const double R = 0.7;
      const double direct =
          r.dot(v) * r.dot(v) - (r.squaredNorm() - R * R) * v.squaredNorm();
      const double f = constraint.evaluate(w1, w2, u);
      CHECK(std::abs(f - direct) <= 1e-9 * (1.0 + std::abs(direct)));
    }
  }
}

TEST_CASE("coefficient grids: constant field and product weights") {
  PolynomialChanceConstraint c;
  c.coefficient_fields = {
      [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 3.0; }};
  Rng rng(2);
  const auto w1 = random_points(rng, 2);
  const auto w2 = random_points(rng, 2);
  const Eigen::VectorXd half = Eigen::VectorXd::Constant(2, 0.5);
  const auto cm = evaluate_coefficient_matrices(c, w1, half, w2, half);
  CHECK(cm.fields.size() == 1);
  CHECK(cm.fields[0].isApproxToConstant(3.0));
  CHECK(cm.product_weights.size() == 4);
  CHECK(cm.product_weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("product weights keep order and sums") {
  Eigen::VectorXd a(2), b(1);
  a << 0.5, 0.5;
  b << 1.0;
  const Eigen::VectorXd c = product_weights(a, b);
  REQUIRE(c.size() == 2);
  CHECK(c(0) == 0.5);
  CHECK(c(1) == 0.5);

  Rng rng(3);
  Eigen::VectorXd wa(5), wb(7);
  for (int i = 0; i < 5; ++i) wa(i) = rng.uniform(0, 1);
  for (int i = 0; i < 7; ++i) wb(i) = rng.uniform(0, 1);
  wa /= wa.sum();
  wb /= wb.sum();
  CHECK(product_weights(wa, wb).sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("grid entries agree with Horner evaluation of the fields") {
  Rng rng(4);
  const auto c = linear_in_w();
  const auto w1 = random_points(rng, 4);
  const auto w2 = random_points(rng, 3);
  const Eigen::VectorXd wa = Eigen::VectorXd::Constant(4, 0.25);
  const Eigen::VectorXd wb = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
  const auto cm = evaluate_coefficient_matrices(c, w1, wa, w2, wb);
  for (int rep = 0; rep < 10; ++rep) {
    const int a = static_cast<int>(rng.below(4));
    const int b = static_cast<int>(rng.below(3));
    const double u = rng.uniform(-1, 1);
    double horner = 0.0;
    for (std::size_t i = cm.fields.size(); i-- > 0;)
      horner = horner * u + cm.fields[i](a, b);
    CHECK(horner == doctest::Approx(c.evaluate(w1[static_cast<std::size_t>(a)],
                                               w2[static_cast<std::size_t>(b)], u))
                        .epsilon(1e-12));
  }
}

TEST_CASE("flattening matches the row-major product-weight order") {
  Rng rng(5);
  const auto c = linear_in_w();
  const auto w1 = random_points(rng, 3);
  const auto w2 = random_points(rng, 2);
  Eigen::VectorXd wa(3), wb(2);
  wa << 0.2, 0.3, 0.5;
  wb << 0.4, 0.6;
  const auto cm = evaluate_coefficient_matrices(c, w1, wa, w2, wb);
  const Eigen::VectorXd flat = cm.flattened(0);
  for (Eigen::Index a = 0; a < 3; ++a)
    for (Eigen::Index b = 0; b < 2; ++b) {
      CHECK(flat(a * 2 + b) == cm.fields[0](a, b));
      CHECK(cm.product_weights(a * 2 + b) == doctest::Approx(wa(a) * wb(b)));
    }
}

TEST_CASE("empty sample lists are rejected") {
  const auto c = linear_in_w();
  Rng rng(6);
  const auto w1 = random_points(rng, 2);
  const Eigen::VectorXd wa = Eigen::VectorXd::Constant(2, 0.5);
  CHECK_THROWS_AS(
      evaluate_coefficient_matrices(c, {}, Eigen::VectorXd(), w1, wa),
      std::invalid_argument);
}
