#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mmdcc/embedding.hpp"
#include "mmdcc/random.hpp"

using namespace mmdcc;

namespace {

WeightedSampleSet random_set(Rng& rng, int n) {
  Eigen::VectorXd v(n), w(n);
  for (int i = 0; i < n; ++i) {
    v(i) = rng.uniform(-2, 2);
    w(i) = rng.uniform(0.1, 1.0);
  }
  w /= w.sum();
  return WeightedSampleSet(std::move(v), std::move(w));
}

}  // namespace

TEST_CASE("weight validation") {
  Eigen::VectorXd v(2), w(2);
  v << 1, 2;
  w << 0.7, 0.7;
  CHECK_THROWS_AS(WeightedSampleSet(v, w), std::invalid_argument);
  w << 0.5, 0.5;
  CHECK_NOTHROW(WeightedSampleSet(v, w));
  CHECK_THROWS_AS(WeightedSampleSet(Eigen::VectorXd(), Eigen::VectorXd()),
                  std::invalid_argument);
}

TEST_CASE("mmd of identical sets vanishes") {
  Rng rng(1);
  const auto P = random_set(rng, 25);
  const auto Q = P;
  for (const int d : {1, 2, 3}) {
    CHECK(mmd_squared(P, Q, KernelSpec::polynomial(d)) <= 1e-10);
  }
}

TEST_CASE("two-point closed form") {
  Eigen::VectorXd p(1), q(1), one(1);
  p << 0.0;
  q << 1.0;
  one << 1.0;
  const auto spec = KernelSpec::polynomial(1, 0.0, 1.0);
  // k(0,0) - 2k(0,1) + k(1,1) = 0 - 0 + 1
  CHECK(mmd_squared(WeightedSampleSet(p, one), WeightedSampleSet(q, one), spec) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degree-2 kernel equals the explicit feature map (1, sqrt2 x, x^2)") {
  Rng rng(5);
  const auto spec = KernelSpec::polynomial(2, 1.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto P = random_set(rng, 30);
    const auto Q = random_set(rng, 30);
    const auto lift = [](const WeightedSampleSet& S) {
      Eigen::Vector3d phi = Eigen::Vector3d::Zero();
      for (Eigen::Index i = 0; i < S.size(); ++i)
        phi += S.weights(i) * Eigen::Vector3d(1.0, std::sqrt(2.0) * S.values(i),
                                              S.values(i) * S.values(i));
      return phi;
    };
    const double feature = (lift(P) - lift(Q)).squaredNorm();
    const double direct = mmd_squared(P, Q, spec);
    CHECK(std::abs(feature - direct) <= 1e-10);
  }
}

TEST_CASE("mmd symmetry and nonnegativity") {
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const auto P = random_set(rng, 12);
    const auto Q = random_set(rng, 17);
    const auto spec = KernelSpec::polynomial(1 + rep % 4);
    const double pq = mmd_squared(P, Q, spec);
    const double qp = mmd_squared(Q, P, spec);
    CHECK(pq >= 0.0);
    CHECK(std::abs(pq - qp) <= 1e-12 * (1.0 + std::abs(pq)));
  }
}

TEST_CASE("rbf mmd over vector sets") {
  Rng rng(17);
  std::vector<Eigen::VectorXd> xs, ys;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd x(2), y(2);
    x << rng.normal(), rng.normal();
    y << rng.normal() + 1.0, rng.normal();
    xs.push_back(x);
    ys.push_back(y);
  }
  const auto spec = KernelSpec::rbf(1.0);
  const auto P = VectorSampleSet::uniform(xs);
  const auto Q = VectorSampleSet::uniform(ys);
  CHECK(mmd_squared(P, P, spec) <= 1e-10);
  const double pq = mmd_squared(P, Q, spec);
  CHECK(pq > 0.0);
  CHECK(pq == doctest::Approx(mmd_squared(Q, P, spec)).epsilon(1e-12));
}

TEST_CASE("raw moments") {
  Eigen::VectorXd v(2), w(2);
  v << -1, 1;
  w << 0.5, 0.5;
  const auto m = empirical_moments(WeightedSampleSet(v, w), 4);
  CHECK(m(0) == 0.0);
  CHECK(m(1) == 1.0);
  CHECK(m(2) == 0.0);
  CHECK(m(3) == 1.0);

  Eigen::VectorXd v2(2), w2(2);
  v2 << 0, 2;
  w2 << 0.25, 0.75;
  CHECK(empirical_moments(WeightedSampleSet(v2, w2), 1)(0) == 1.5);

  // constant distribution: m_k = c^k
  Eigen::VectorXd vc = Eigen::VectorXd::Constant(5, 1.3);
  const auto mc = empirical_moments(WeightedSampleSet::uniform(vc), 3);
  for (int k = 1; k <= 3; ++k)
    CHECK(mc(k - 1) == doctest::Approx(std::pow(1.3, k)).epsilon(1e-12));

  CHECK_THROWS_AS(empirical_moments(WeightedSampleSet::uniform(vc), 0),
                  std::invalid_argument);
}

TEST_CASE("moment witness: near-zero mmd forces matching moments up to d") {
  Rng rng(23);
  for (const int d : {2, 3, 5}) {
    const auto P = random_set(rng, 20);
    // same distribution, permuted sample order
    Eigen::VectorXd v(P.size()), w(P.size());
    for (Eigen::Index i = 0; i < P.size(); ++i) {
      v(i) = P.values(P.size() - 1 - i);
      w(i) = P.weights(P.size() - 1 - i);
    }
    const WeightedSampleSet Q(v, w);
    const double mmd = mmd_squared(P, Q, KernelSpec::polynomial(d, 1.0, 1.0));
    REQUIRE(mmd <= 1e-12);
    const auto mp = empirical_moments(P, d);
    const auto mq = empirical_moments(Q, d);
    for (int k = 0; k < d; ++k)
      CHECK(std::abs(mp(k) - mq(k)) <= 1e-6 * (1.0 + std::abs(mp(k))));
  }
}

TEST_CASE("uniform weights give sum of squares 1/n") {
  for (const int n : {1, 7, 64}) {
    const auto S = WeightedSampleSet::uniform(Eigen::VectorXd::Ones(n));
    CHECK(S.weight_sum_squares() == doctest::Approx(1.0 / n).epsilon(1e-12));
  }
}
