#include "mmdcc/desired.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmdcc/random.hpp"
#include "mmdcc/reduced_set.hpp"

namespace mmdcc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sorted disjoint closed intervals.
struct IntervalSet {
  std::vector<std::pair<double, double>> parts;

  static IntervalSet full() { return {{{-kInf, kInf}}}; }
  static IntervalSet empty() { return {}; }
  bool is_empty() const { return parts.empty(); }
};

IntervalSet intersect(const IntervalSet& A, const IntervalSet& B) {
  IntervalSet out;
  std::size_t i = 0, j = 0;
  while (i < A.parts.size() && j < B.parts.size()) {
    const double lo = std::max(A.parts[i].first, B.parts[j].first);
    const double hi = std::min(A.parts[i].second, B.parts[j].second);
    if (lo <= hi) out.parts.emplace_back(lo, hi);
    if (A.parts[i].second < B.parts[j].second)
      ++i;
    else
      ++j;
  }
  return out;
}

// {u : h2 u^2 + h1 u + h0 <= 0}
IntervalSet quad_solution_set(double h0, double h1, double h2) {
  const Polynomial p({h0, h1, h2});
  const int deg = p.degree();
  if (deg < 0) return IntervalSet::full();  // identically zero
  if (deg == 0) return h0 <= 0.0 ? IntervalSet::full() : IntervalSet::empty();
  if (deg == 1) {
    const double r = -h0 / h1;
    return h1 > 0.0 ? IntervalSet{{{-kInf, r}}} : IntervalSet{{{r, kInf}}};
  }
  const auto roots = real_roots_in(p, -kInf, kInf);
  if (h2 > 0.0) {
    if (roots.empty()) return IntervalSet::empty();
    const double r1 = roots.front();
    const double r2 = roots.back();
    return IntervalSet{{{r1, r2}}};
  }
  if (roots.size() < 2) return IntervalSet::full();
  return IntervalSet{{{-kInf, roots.front()}, {roots.back(), kInf}}};
}

// Minimizer of J over an interval set; smallest u wins ties.
double minimize_on_intervals(const Polynomial& J, const IntervalSet& feasible) {
  const Polynomial dJ = J.derivative();
  const int deg = J.degree();
  const double lead = deg >= 0 ? J.coeffs[static_cast<std::size_t>(deg)] : 0.0;

  double best_u = 0.0;
  double best_v = kInf;
  bool found = false;
  auto consider = [&](double u) {
    const double v = J(u);
    if (!found || v < best_v || (v == best_v && u < best_u)) {
      best_u = u;
      best_v = v;
      found = true;
    }
  };

  for (const auto& [a, b] : feasible.parts) {
    if (std::isinf(a) && a < 0) {
      const double limit = (deg <= 0) ? 0.0 : (deg % 2 == 0 ? lead : -lead);
      if (deg > 0 && limit < 0)
        throw std::invalid_argument("scenario cost unbounded below on feasible set");
    }
    if (std::isinf(b)) {
      if (deg > 0 && lead < 0)
        throw std::invalid_argument("scenario cost unbounded below on feasible set");
    }
    if (std::isfinite(a)) consider(a);
    if (std::isfinite(b)) consider(b);
    const double ra = std::isfinite(a) ? a : -1e300;
    const double rb = std::isfinite(b) ? b : 1e300;
    for (const double r : real_roots_in(dJ, ra, rb)) consider(r);
    if (!found && std::isinf(a) && std::isinf(b)) consider(0.0);  // constant J
  }
  if (!found)
    throw infeasible_scenario_error("scenario constraints admit no feasible decision");
  return best_u;
}

}  // namespace

ScenarioSets select_scenario_sets(const PolynomialChanceConstraint& constraint,
                                  const std::vector<Eigen::VectorXd>& pool_w1,
                                  const std::vector<Eigen::VectorXd>& pool_w2,
                                  int n_w1, int n_w2, int trials, double probe_u,
                                  std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("select_scenario_sets: trials >= 1");
  if (n_w1 < 1 || n_w1 > static_cast<int>(pool_w1.size()) || n_w2 < 1 ||
      n_w2 > static_cast<int>(pool_w2.size()))
    throw std::invalid_argument("select_scenario_sets: subset size out of range");

  Rng rng(seed);
  double best_score = kInf;
  std::vector<int> best_i1, best_i2;
  for (int t = 0; t < trials; ++t) {
    const auto i1 = rng.choose(static_cast<int>(pool_w1.size()), n_w1);
    const auto i2 = rng.choose(static_cast<int>(pool_w2.size()), n_w2);
    double score = 0.0;
    for (const int a : i1)
      for (const int b : i2) {
        const double f = constraint.evaluate(pool_w1[static_cast<std::size_t>(a)],
                                             pool_w2[static_cast<std::size_t>(b)],
                                             probe_u);
        if (f > 0.0) score += f;
      }
    const bool better =
        score < best_score ||
        (score == best_score &&
         std::make_pair(i1, i2) < std::make_pair(best_i1, best_i2));
    if (better) {
      best_score = score;
      best_i1 = i1;
      best_i2 = i2;
    }
  }

  ScenarioSets sets;
  for (const int a : best_i1) sets.w1.push_back(pool_w1[static_cast<std::size_t>(a)]);
  for (const int b : best_i2) sets.w2.push_back(pool_w2[static_cast<std::size_t>(b)]);
  return sets;
}

double solve_scenario(const PolynomialChanceConstraint& constraint,
                      const ScenarioSets& sets, const Polynomial& J, double lo,
                      double hi) {
  return solve_scenario(std::vector<PolynomialChanceConstraint>{constraint},
                        std::vector<ScenarioSets>{sets}, J, lo, hi);
}

double solve_scenario(const std::vector<PolynomialChanceConstraint>& constraints,
                      const std::vector<ScenarioSets>& sets, const Polynomial& J,
                      double lo, double hi) {
  if (constraints.size() != sets.size())
    throw std::invalid_argument("solve_scenario: constraints/sets length mismatch");
  IntervalSet feasible{{{lo, hi}}};
  if (lo > hi) feasible = IntervalSet::empty();
  for (std::size_t c = 0; c < constraints.size(); ++c) {
    const auto& constraint = constraints[c];
    if (constraint.order() > 2)
      throw std::invalid_argument("scalar scenario path requires order <= 2");
    for (const auto& w1 : sets[c].w1)
      for (const auto& w2 : sets[c].w2) {
        const double h0 = constraint.coefficient_fields[0](w1, w2);
        const double h1 = constraint.order() >= 1
                              ? constraint.coefficient_fields[1](w1, w2)
                              : 0.0;
        const double h2 = constraint.order() >= 2
                              ? constraint.coefficient_fields[2](w1, w2)
                              : 0.0;
        feasible = intersect(feasible, quad_solution_set(h0, h1, h2));
        if (feasible.is_empty())
          throw infeasible_scenario_error(
              "scenario constraints admit no feasible decision");
      }
  }
  return minimize_on_intervals(J, feasible);
}

Eigen::VectorXd solve_scenario(const std::vector<AffineChanceConstraint>& constraints,
                               const ScenarioSets& sets, const QuadraticObjective& J,
                               const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (constraints.empty()) throw std::invalid_argument("solve_scenario: no constraints");
  const int m = constraints.front().dim();

  // stacked half-spaces s'u + t <= 0 over all constraints and subset pairs
  std::vector<Eigen::VectorXd> slopes;
  std::vector<double> intercepts;
  for (const auto& constraint : constraints) {
    if (constraint.dim() != m)
      throw std::invalid_argument("solve_scenario: mixed decision dimensions");
    for (const auto& w1 : sets.w1)
      for (const auto& w2 : sets.w2) {
        Eigen::VectorXd s(m);
        for (int j = 0; j < m; ++j)
          s(j) = constraint.slope_fields[static_cast<std::size_t>(j)](w1, w2);
        slopes.push_back(std::move(s));
        intercepts.push_back(constraint.intercept_field(w1, w2));
      }
  }

  const auto clip = [&](Eigen::VectorXd u) {
    for (int j = 0; j < m; ++j) u(j) = std::clamp(u(j), lo(j), hi(j));
    return u;
  };
  const auto max_violation = [&](const Eigen::VectorXd& u) {
    double worst = 0.0;
    for (std::size_t r = 0; r < slopes.size(); ++r)
      worst = std::max(worst, slopes[r].dot(u) + intercepts[r]);
    return worst;
  };
  const auto restore = [&](Eigen::VectorXd u) {
    for (int pass = 0; pass < 200; ++pass) {
      bool any = false;
      for (std::size_t r = 0; r < slopes.size(); ++r) {
        const double v = slopes[r].dot(u) + intercepts[r];
        if (v > kViolationTolerance) {
          const double nsq = slopes[r].squaredNorm();
          if (nsq > 0.0) {
            u -= (v / nsq) * slopes[r];
            u = clip(u);
            any = true;
          }
        }
      }
      if (!any) break;
    }
    return u;
  };

  const Eigen::MatrixXd sym = J.quad + J.quad.transpose();
  const double L = std::max(largest_eigenvalue_power(sym), 1e-12);
  const double step = 1.0 / L;

  Eigen::VectorXd u = restore(clip(Eigen::VectorXd::Zero(m)));
  for (int it = 0; it < 2000; ++it) {
    const Eigen::VectorXd next = restore(clip(u - step * J.gradient(u)));
    const double moved = (next - u).norm();
    u = next;
    if (moved < 1e-12) break;
  }
  if (max_violation(u) > kViolationTolerance)
    throw infeasible_scenario_error(
        "scenario constraints admit no feasible decision");
  return u;
}

namespace {

Eigen::VectorXd subset_weights(const std::vector<Eigen::VectorXd>& pool,
                               const std::vector<Eigen::VectorXd>& subset,
                               const std::optional<KernelSpec>& reduce_kernel) {
  if (!reduce_kernel.has_value())
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(subset.size()),
                                     1.0 / static_cast<double>(subset.size()));
  return solve_weights(pool, subset, *reduce_kernel).weights;
}

void check_values(const Eigen::VectorXd& values) {
  if (values.maxCoeff() > kViolationTolerance)
    throw std::invalid_argument(
        "desired distribution: u_nom violates scenario constraints (stale u_nom)");
}

}  // namespace

DesiredDistribution build_desired(const PolynomialChanceConstraint& constraint,
                                  const ScenarioSets& sets, double u_nom,
                                  const std::vector<Eigen::VectorXd>& pool_w1,
                                  const std::vector<Eigen::VectorXd>& pool_w2,
                                  const std::optional<KernelSpec>& reduce_kernel) {
  return build_desired(constraint, sets, u_nom, pool_w1, pool_w2, reduce_kernel,
                       reduce_kernel);
}

DesiredDistribution build_desired(const PolynomialChanceConstraint& constraint,
                                  const ScenarioSets& sets, double u_nom,
                                  const std::vector<Eigen::VectorXd>& pool_w1,
                                  const std::vector<Eigen::VectorXd>& pool_w2,
                                  const std::optional<KernelSpec>& reduce_w1,
                                  const std::optional<KernelSpec>& reduce_w2) {
  const Eigen::Index n1 = static_cast<Eigen::Index>(sets.w1.size());
  const Eigen::Index n2 = static_cast<Eigen::Index>(sets.w2.size());
  if (n1 == 0 || n2 == 0)
    throw std::invalid_argument("build_desired: empty scenario sets");

  DesiredDistribution d;
  d.values.resize(n1 * n2);
  for (Eigen::Index a = 0; a < n1; ++a)
    for (Eigen::Index b = 0; b < n2; ++b)
      d.values(a * n2 + b) =
          constraint.evaluate(sets.w1[static_cast<std::size_t>(a)],
                              sets.w2[static_cast<std::size_t>(b)], u_nom);
  check_values(d.values);

  const Eigen::VectorXd lambda = subset_weights(pool_w1, sets.w1, reduce_w1);
  const Eigen::VectorXd xi = subset_weights(pool_w2, sets.w2, reduce_w2);
  d.weights = product_weights(lambda, xi);
  d.u_nom = Eigen::VectorXd::Constant(1, u_nom);
  d.sources = sets;
  d.weight_warning = d.weights.minCoeff() < -0.1;
  return d;
}

std::vector<DesiredDistribution> build_desired_family(
    const std::vector<AffineChanceConstraint>& constraints,
    const ScenarioSets& sets, const Eigen::VectorXd& u_nom,
    const std::vector<Eigen::VectorXd>& pool_w1,
    const std::vector<Eigen::VectorXd>& pool_w2,
    const std::optional<KernelSpec>& reduce_kernel) {
  const Eigen::Index n1 = static_cast<Eigen::Index>(sets.w1.size());
  const Eigen::Index n2 = static_cast<Eigen::Index>(sets.w2.size());
  if (n1 == 0 || n2 == 0)
    throw std::invalid_argument("build_desired_family: empty scenario sets");

  const Eigen::VectorXd lambda = subset_weights(pool_w1, sets.w1, reduce_kernel);
  const Eigen::VectorXd xi = subset_weights(pool_w2, sets.w2, reduce_kernel);
  const Eigen::VectorXd weights = product_weights(lambda, xi);

  std::vector<DesiredDistribution> family;
  family.reserve(constraints.size());
  for (const auto& constraint : constraints) {
    DesiredDistribution d;
    d.values.resize(n1 * n2);
    for (Eigen::Index a = 0; a < n1; ++a)
      for (Eigen::Index b = 0; b < n2; ++b)
        d.values(a * n2 + b) =
            constraint.evaluate(sets.w1[static_cast<std::size_t>(a)],
                                sets.w2[static_cast<std::size_t>(b)], u_nom);
    check_values(d.values);
    d.weights = weights;
    d.u_nom = u_nom;
    d.sources = sets;
    d.weight_warning = weights.minCoeff() < -0.1;
    family.push_back(std::move(d));
  }
  return family;
}

}  // namespace mmdcc
