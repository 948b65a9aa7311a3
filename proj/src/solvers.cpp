#include "mmdcc/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mmdcc/simd/ops.hpp"

namespace mmdcc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct ScanRange {
  double lo, hi;
};

ScanRange scan_range(const SolverConfig& cfg) {
  double lo = cfg.bounds.lo(0);
  double hi = cfg.bounds.hi(0);
  if (!std::isfinite(lo)) lo = -cfg.horizon;
  if (!std::isfinite(hi)) hi = cfg.horizon;
  if (lo > hi) throw std::invalid_argument("empty scan range");
  return {lo, hi};
}

// Coefficient grids of a polynomial constraint over all sample pairs,
// flattened row-major; shared by the SAA / mean-variance baselines and the
// grid-paired validator.
std::vector<Eigen::VectorXd> field_grids(const PolynomialChanceConstraint& c,
                                         const std::vector<Eigen::VectorXd>& w1,
                                         const std::vector<Eigen::VectorXd>& w2) {
  if (w1.empty() || w2.empty())
    throw std::invalid_argument("empty sample pool");
  const std::size_t n1 = w1.size();
  const std::size_t n2 = w2.size();
  std::vector<Eigen::VectorXd> grids;
  for (const auto& h : c.coefficient_fields) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(n1 * n2));
    for (std::size_t a = 0; a < n1; ++a)
      for (std::size_t b = 0; b < n2; ++b)
        g(static_cast<Eigen::Index>(a * n2 + b)) = h(w1[a], w2[b]);
    grids.push_back(std::move(g));
  }
  return grids;
}

std::size_t count_nonpositive(const std::vector<Eigen::VectorXd>& grids, double u) {
  const std::size_t n = static_cast<std::size_t>(grids[0].size());
  if (grids.size() == 3) {
    return simd::ops().count_quad_le(grids[0].data(), grids[1].data(),
                                     grids[2].data(), n, u, 0.0);
  }
  std::vector<const double*> ptrs;
  for (const auto& g : grids) ptrs.push_back(g.data());
  Eigen::VectorXd values(static_cast<Eigen::Index>(n));
  simd::ops().poly_combine(ptrs.data(), ptrs.size(), n, u, values.data());
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values(i) <= 0.0) ++count;
  return count;
}

}  // namespace

SatisfactionGrid::SatisfactionGrid(const PolynomialChanceConstraint& constraint,
                                   const std::vector<Eigen::VectorXd>& pool_w1,
                                   const std::vector<Eigen::VectorXd>& pool_w2)
    : grids_(field_grids(constraint, pool_w1, pool_w2)),
      size_(static_cast<std::size_t>(grids_[0].size())) {}

double SatisfactionGrid::fraction(double u) const {
  return static_cast<double>(count_nonpositive(grids_, u)) /
         static_cast<double>(size_);
}

void SolverConfig::validate() const {
  if (rho1 < 0.0 || rho2 < 0.0 || rho1 + rho2 <= 0.0)
    throw std::invalid_argument("solver config: need rho1, rho2 >= 0 and rho1+rho2 > 0");
  if (!(grid_resolution > 0.0))
    throw std::invalid_argument("solver config: grid_resolution must be > 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("solver config: horizon must be > 0");
  if (degree < 1) throw std::invalid_argument("solver config: degree must be >= 1");
  if (!(target_eta > 0.0 && target_eta < 1.0))
    throw std::invalid_argument("solver config: target_eta must lie in (0,1)");
}

SolverReport minimize_univariate(const UnivariatePolyObjective& obj,
                                 const Polynomial& J, const SolverConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const auto [lo, hi] = scan_range(cfg);
  const Polynomial dJ = J.derivative();
  const Polynomial ddJ = dJ.derivative();
  const auto total = [&](double u) { return cfg.rho1 * obj.value(u) + cfg.rho2 * J(u); };

  double best_u = lo;
  double best_v = total(lo);
  const long long steps =
      static_cast<long long>(std::floor((hi - lo) / cfg.grid_resolution));
  for (long long k = 1; k <= steps; ++k) {
    const double u = lo + static_cast<double>(k) * cfg.grid_resolution;
    const double v = total(u);
    if (v < best_v) {
      best_v = v;
      best_u = u;
    }
  }
  if (lo + static_cast<double>(steps) * cfg.grid_resolution < hi) {
    const double v = total(hi);
    if (v < best_v) {
      best_v = v;
      best_u = hi;
    }
  }

  // Newton polish, clamped to the scan interval
  double u = best_u;
  for (int it = 0; it < 60; ++it) {
    const double curv = cfg.rho1 * obj.deriv2(u) + cfg.rho2 * ddJ(u);
    if (!(curv > 0.0)) break;
    const double step = (cfg.rho1 * obj.deriv1(u) + cfg.rho2 * dJ(u)) / curv;
    const double next = std::clamp(u - step, lo, hi);
    if (std::abs(next - u) < 1e-14 * std::max(1.0, std::abs(u))) {
      u = next;
      break;
    }
    u = next;
  }
  const double polished = total(u);
  if (polished < best_v || (polished == best_v && u < best_u)) {
    best_v = polished;
    best_u = u;
  }

  SolverReport rep;
  rep.u_star = Eigen::VectorXd::Constant(1, best_u);
  rep.mmd_value = obj.value(best_u);
  rep.cost_value = J(best_u);
  rep.rho1 = cfg.rho1;
  rep.rho2 = cfg.rho2;
  rep.objective_value = cfg.rho1 * rep.mmd_value + cfg.rho2 * rep.cost_value;
  rep.mmd_scale = obj.scale_factor;
  rep.wall_ms = elapsed_ms(t0);
  return rep;
}

SolverReport minimize_box_quadratic(const QuadraticObjective& mmd,
                                    const QuadraticObjective& J,
                                    const SolverConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  QuadraticObjective total = cfg.rho1 * mmd + cfg.rho2 * J;
  const int m = total.dim();
  if (cfg.bounds.dim() != m)
    throw std::invalid_argument("minimize_box_quadratic: bounds dimension mismatch");
  if (!cfg.bounds.lo.allFinite() || !cfg.bounds.hi.allFinite())
    throw std::invalid_argument("minimize_box_quadratic: box must be finite");

  Eigen::MatrixXd sym = total.quad + total.quad.transpose();
  {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.eigenvalues().minCoeff() < 0.0) {
      total.quad += 1e-10 * Eigen::MatrixXd::Identity(m, m);
      sym = total.quad + total.quad.transpose();
    }
  }
  const double L = std::max(largest_eigenvalue_power(sym), 1e-12);
  const double step = 1.0 / L;

  const auto clip = [&](Eigen::VectorXd u) {
    for (int j = 0; j < m; ++j) u(j) = std::clamp(u(j), cfg.bounds.lo(j), cfg.bounds.hi(j));
    return u;
  };

  Eigen::VectorXd u = clip(Eigen::VectorXd::Zero(m));
  bool converged = false;
  for (int it = 0; it < 100000; ++it) {
    const Eigen::VectorXd next = clip(u - step * (sym * u + total.lin));
    const double moved = (next - u).norm();
    u = next;
    if (moved < 1e-10) {
      converged = true;
      break;
    }
  }

  SolverReport rep;
  rep.u_star = u;
  rep.mmd_value = mmd.value(u);
  rep.cost_value = J.value(u);
  rep.rho1 = cfg.rho1;
  rep.rho2 = cfg.rho2;
  rep.objective_value = cfg.rho1 * rep.mmd_value + cfg.rho2 * rep.cost_value;
  rep.converged = converged;
  if (!converged) rep.warning = "projected gradient did not converge";
  rep.wall_ms = elapsed_ms(t0);
  return rep;
}

SolverReport minimize_box_smooth(const AffineMmdObjective& mmd,
                                 const QuadraticObjective& J,
                                 const SolverConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const int m = mmd.dim();
  if (cfg.bounds.dim() != m)
    throw std::invalid_argument("minimize_box_smooth: bounds dimension mismatch");

  const auto clip = [&](Eigen::VectorXd u) {
    for (int j = 0; j < m; ++j) u(j) = std::clamp(u(j), cfg.bounds.lo(j), cfg.bounds.hi(j));
    return u;
  };
  const auto value = [&](const Eigen::VectorXd& u) {
    return cfg.rho1 * mmd.value(u) + cfg.rho2 * J.value(u);
  };
  const auto grad = [&](const Eigen::VectorXd& u) {
    return (cfg.rho1 * mmd.gradient(u) + cfg.rho2 * J.gradient(u)).eval();
  };

  Eigen::VectorXd u = clip(Eigen::VectorXd::Zero(m));
  double fu = value(u);
  double step = 1.0;
  bool converged = false;
  for (int it = 0; it < 5000; ++it) {
    const Eigen::VectorXd g = grad(u);
    Eigen::VectorXd next;
    double fn = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      next = clip(u - step * g);
      fn = value(next);
      const double dec = (u - next).squaredNorm() / std::max(step, 1e-300);
      if (fn <= fu - 1e-4 * dec) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double moved = (next - u).norm();
    u = next;
    fu = fn;
    step = std::min(step * 1.5, 1e6);
    if (moved < 1e-10) {
      converged = true;
      break;
    }
  }

  SolverReport rep;
  rep.u_star = u;
  rep.mmd_value = mmd.value(u);
  rep.cost_value = J.value(u);
  rep.rho1 = cfg.rho1;
  rep.rho2 = cfg.rho2;
  rep.objective_value = cfg.rho1 * rep.mmd_value + cfg.rho2 * rep.cost_value;
  rep.mmd_scale = mmd.scale_factor();
  rep.converged = converged;
  if (!converged) rep.warning = "projected gradient stopped before tolerance";
  rep.wall_ms = elapsed_ms(t0);
  return rep;
}

SolverReport baseline_scenario(const PolynomialChanceConstraint& constraint,
                               const std::vector<Eigen::VectorXd>& pool_w1,
                               const std::vector<Eigen::VectorXd>& pool_w2,
                               const Polynomial& J, const SolverConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const auto [lo, hi] = scan_range(cfg);
  ScenarioSets all{pool_w1, pool_w2};
  const double u = solve_scenario(constraint, all, J, lo, hi);

  SolverReport rep;
  rep.u_star = Eigen::VectorXd::Constant(1, u);
  rep.cost_value = J(u);
  rep.rho1 = 0.0;
  rep.rho2 = 1.0;
  rep.objective_value = rep.cost_value;
  rep.n = static_cast<int>(pool_w1.size());
  rep.wall_ms = elapsed_ms(t0);
  return rep;
}

SolverReport baseline_saa(const PolynomialChanceConstraint& constraint,
                          const std::vector<Eigen::VectorXd>& pool_w1,
                          const std::vector<Eigen::VectorXd>& pool_w2,
                          const Polynomial& J, double gamma,
                          const SolverConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const auto [lo, hi] = scan_range(cfg);
  const auto grids = field_grids(constraint, pool_w1, pool_w2);
  const double total = static_cast<double>(grids[0].size());

  bool found = false;
  double best_u = 0.0, best_j = 0.0;
  const long long steps =
      static_cast<long long>(std::floor((hi - lo) / cfg.grid_resolution));
  for (long long k = 0; k <= steps; ++k) {
    const double u = lo + static_cast<double>(k) * cfg.grid_resolution;
    const double fraction = static_cast<double>(count_nonpositive(grids, u)) / total;
    if (fraction < gamma) continue;
    const double j = J(u);
    if (!found || j < best_j) {
      found = true;
      best_j = j;
      best_u = u;
    }
  }
  if (!found)
    throw infeasible_baseline_error(
        "sample-average approximation: no grid point reaches the target fraction");

  SolverReport rep;
  rep.u_star = Eigen::VectorXd::Constant(1, best_u);
  rep.cost_value = best_j;
  rep.rho1 = 0.0;
  rep.rho2 = 1.0;
  rep.objective_value = best_j;
  rep.n = static_cast<int>(pool_w1.size());
  rep.wall_ms = elapsed_ms(t0);
  return rep;
}

std::pair<Polynomial, Polynomial> mean_var_polynomials(
    const PolynomialChanceConstraint& constraint,
    const std::vector<Eigen::VectorXd>& pool_w1,
    const std::vector<Eigen::VectorXd>& pool_w2) {
  const auto grids = field_grids(constraint, pool_w1, pool_w2);
  const std::size_t terms = grids.size();
  Polynomial mean;
  mean.coeffs.assign(terms, 0.0);
  for (std::size_t i = 0; i < terms; ++i) mean.coeffs[i] = grids[i].mean();
  Polynomial second;
  second.coeffs.assign(2 * terms - 1, 0.0);
  for (std::size_t i = 0; i < terms; ++i)
    for (std::size_t j = 0; j < terms; ++j)
      second.coeffs[i + j] += (grids[i].array() * grids[j].array()).mean();
  return {mean, second};
}

SolverReport baseline_mean_var(const PolynomialChanceConstraint& constraint,
                               const std::vector<Eigen::VectorXd>& pool_w1,
                               const std::vector<Eigen::VectorXd>& pool_w2,
                               double epsilon, const Polynomial& J,
                               const SolverConfig& cfg) {
  cfg.validate();
  if (!(epsilon > 0.0))
    throw std::invalid_argument("mean-variance baseline: epsilon must be > 0");
  const auto t0 = Clock::now();
  const auto [lo, hi] = scan_range(cfg);
  const auto [mean, second] = mean_var_polynomials(constraint, pool_w1, pool_w2);

  bool found = false;
  double best_u = 0.0, best_j = 0.0;
  const long long steps =
      static_cast<long long>(std::floor((hi - lo) / cfg.grid_resolution));
  for (long long k = 0; k <= steps; ++k) {
    const double u = lo + static_cast<double>(k) * cfg.grid_resolution;
    const double e = mean(u);
    const double var = std::max(second(u) - e * e, 0.0);
    if (e + epsilon * std::sqrt(var) > 0.0) continue;
    const double j = J(u);
    if (!found || j < best_j) {
      found = true;
      best_j = j;
      best_u = u;
    }
  }
  if (!found)
    throw infeasible_baseline_error(
        "mean-variance surrogate infeasible on the scan set");

  SolverReport rep;
  rep.u_star = Eigen::VectorXd::Constant(1, best_u);
  rep.cost_value = best_j;
  rep.rho1 = 0.0;
  rep.rho2 = 1.0;
  rep.objective_value = best_j;
  rep.implied_eta_stated = eta_bound_stated(epsilon);
  rep.implied_eta_cantelli = eta_bound_cantelli(epsilon);
  rep.n = static_cast<int>(pool_w1.size());
  rep.wall_ms = elapsed_ms(t0);
  return rep;
}

double validate_eta(const PolynomialChanceConstraint& constraint, double u,
                    const std::vector<Eigen::VectorXd>& holdout_w1,
                    const std::vector<Eigen::VectorXd>& holdout_w2,
                    Pairing pairing) {
  if (holdout_w1.empty() || holdout_w2.empty())
    throw std::invalid_argument("validate_eta: empty holdout");
  if (pairing == Pairing::grid) {
    const auto grids = field_grids(constraint, holdout_w1, holdout_w2);
    return static_cast<double>(count_nonpositive(grids, u)) /
           static_cast<double>(grids[0].size());
  }
  if (holdout_w1.size() != holdout_w2.size())
    throw std::invalid_argument("validate_eta: paired holdout sizes differ");
  std::size_t count = 0;
  for (std::size_t i = 0; i < holdout_w1.size(); ++i)
    if (constraint.evaluate(holdout_w1[i], holdout_w2[i], u) <= 0.0) ++count;
  return static_cast<double>(count) / static_cast<double>(holdout_w1.size());
}

double validate_eta(const AffineChanceConstraint& constraint,
                    const Eigen::VectorXd& u,
                    const std::vector<Eigen::VectorXd>& holdout_w1,
                    const std::vector<Eigen::VectorXd>& holdout_w2,
                    Pairing pairing) {
  if (holdout_w1.empty() || holdout_w2.empty())
    throw std::invalid_argument("validate_eta: empty holdout");
  std::size_t count = 0, total = 0;
  if (pairing == Pairing::grid) {
    for (const auto& w1 : holdout_w1)
      for (const auto& w2 : holdout_w2) {
        if (constraint.evaluate(w1, w2, u) <= 0.0) ++count;
        ++total;
      }
  } else {
    if (holdout_w1.size() != holdout_w2.size())
      throw std::invalid_argument("validate_eta: paired holdout sizes differ");
    for (std::size_t i = 0; i < holdout_w1.size(); ++i) {
      if (constraint.evaluate(holdout_w1[i], holdout_w2[i], u) <= 0.0) ++count;
      ++total;
    }
  }
  return static_cast<double>(count) / static_cast<double>(total);
}

double cantelli_epsilon(double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("cantelli_epsilon: eta must lie in (0,1)");
  return std::sqrt(eta / (1.0 - eta));
}

double eta_bound_stated(double eps) { return eps / (1.0 + eps * eps); }

double eta_bound_cantelli(double eps) { return eps * eps / (1.0 + eps * eps); }

}  // namespace mmdcc
