#include "mmdcc/objective.hpp"

#include <cmath>
#include <stdexcept>

#include "mmdcc/simd/ops.hpp"

namespace mmdcc {

namespace {

void check_pair(const CoefficientMatrices& cm, const DesiredDistribution& desired) {
  if (cm.fields.empty()) throw std::invalid_argument("objective: empty coefficient grid");
  const Eigen::Index grid = cm.rows() * cm.cols();
  if (cm.product_weights.size() != grid)
    throw std::invalid_argument("objective: grid/product-weight size mismatch");
  if (desired.values.size() != desired.weights.size() || desired.values.size() == 0)
    throw std::invalid_argument("objective: desired values/weights size mismatch");
}

Eigen::VectorXd binomial_factors(const KernelSpec& spec) {
  const int d = spec.degree;
  Eigen::VectorXd fac(d + 1);
  double binom = 1.0;
  for (int k = 0; k <= d; ++k) {
    if (k > 0) binom = binom * static_cast<double>(d - k + 1) / static_cast<double>(k);
    fac(k) = binom * std::pow(spec.scale, k) * std::pow(spec.offset, d - k);
  }
  return fac;
}

// in-place convolution helper: out = a (*) b
void convolve(const std::vector<double>& a, const std::vector<double>& b,
              std::vector<double>& out) {
  out.assign(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
}

UnivariatePolyObjective assemble_coefficient_expansion(
    const CoefficientMatrices& cm, const DesiredDistribution& desired,
    const KernelSpec& spec, double scale) {
  // Gram-contraction coefficients for the linear-kernel embedding. With both
  // weight vectors summing to one the kernel offset cancels across the three
  // MMD blocks, so the contractions use the homogeneous part only.
  const int l = static_cast<int>(cm.fields.size()) - 1;
  const auto& ops = simd::ops();

  std::vector<Eigen::VectorXd> grids;
  for (std::size_t i = 0; i < cm.fields.size(); ++i)
    grids.push_back(cm.flattened(i) / scale);
  const Eigen::VectorXd g = desired.values / scale;
  const Eigen::VectorXd& w = cm.product_weights;
  const Eigen::VectorXd& dw = desired.weights;

  const auto contract = [&](const Eigen::VectorXd& xs, const Eigen::VectorXd& wx,
                            const Eigen::VectorXd& ys, const Eigen::VectorXd& wy) {
    return ops.poly_quadform(xs.data(), wx.data(), static_cast<std::size_t>(xs.size()),
                             ys.data(), wy.data(), static_cast<std::size_t>(ys.size()),
                             spec.scale, 0.0, 1);
  };

  std::vector<double> coeffs(static_cast<std::size_t>(2 * l) + 1, 0.0);
  for (int i = 0; i <= l; ++i)
    for (int j = 0; j <= l; ++j)
      coeffs[static_cast<std::size_t>(i + j)] +=
          contract(grids[static_cast<std::size_t>(i)], w,
                   grids[static_cast<std::size_t>(j)], w);
  for (int i = 0; i <= l; ++i)
    coeffs[static_cast<std::size_t>(i)] -=
        2.0 * contract(grids[static_cast<std::size_t>(i)], w, g, dw);
  coeffs[0] += contract(g, dw, g, dw);

  UnivariatePolyObjective obj;
  obj.poly = Polynomial(std::move(coeffs));
  obj.scale_factor = scale;
  obj.constraint_order = l;
  obj.kernel_degree = spec.degree;
  return obj;
}

UnivariatePolyObjective assemble_moment_factorization(
    const CoefficientMatrices& cm, const DesiredDistribution& desired,
    const KernelSpec& spec, double scale) {
  // (scale*x*y + offset)^d split binomially: MMD^2 becomes
  //   sum_k C(d,k) scale^k offset^(d-k) * (S_k(u) - t_k)^2
  // with S_k(u) the k-th weighted moment of the embedded grid (a polynomial
  // of degree k*l in u) and t_k the desired set's k-th weighted moment.
  const int l = static_cast<int>(cm.fields.size()) - 1;
  const int d = spec.degree;
  const Eigen::Index grid = cm.rows() * cm.cols();

  std::vector<Eigen::VectorXd> grids;
  for (std::size_t i = 0; i < cm.fields.size(); ++i)
    grids.push_back(cm.flattened(i) / scale);
  const Eigen::VectorXd g = desired.values / scale;
  const Eigen::VectorXd& w = cm.product_weights;

  // S_k coefficient arrays
  std::vector<std::vector<double>> S(static_cast<std::size_t>(d) + 1);
  for (int k = 0; k <= d; ++k)
    S[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(k * l) + 1, 0.0);
  S[0][0] = 1.0;

  std::vector<double> f(static_cast<std::size_t>(l) + 1);
  std::vector<double> pw, tmp;
  for (Eigen::Index p = 0; p < grid; ++p) {
    for (int i = 0; i <= l; ++i)
      f[static_cast<std::size_t>(i)] = grids[static_cast<std::size_t>(i)](p);
    pw = f;
    const double wp = w(p);
    for (int k = 1; k <= d; ++k) {
      auto& Sk = S[static_cast<std::size_t>(k)];
      for (std::size_t c = 0; c < pw.size(); ++c) Sk[c] += wp * pw[c];
      if (k < d) {
        convolve(pw, f, tmp);
        pw.swap(tmp);
      }
    }
  }

  Eigen::VectorXd t = Eigen::VectorXd::Zero(d + 1);
  t(0) = 1.0;
  {
    Eigen::VectorXd powers = Eigen::VectorXd::Ones(g.size());
    for (int k = 1; k <= d; ++k) {
      powers.array() *= g.array();
      t(k) = desired.weights.dot(powers);
    }
  }

  const Eigen::VectorXd fac = binomial_factors(spec);
  UnivariatePolyObjective obj;
  obj.term_factors = Eigen::VectorXd(d);
  Polynomial total;
  std::vector<double> diff, sq;
  for (int k = 1; k <= d; ++k) {
    diff = S[static_cast<std::size_t>(k)];
    diff[0] -= t(k);
    convolve(diff, diff, sq);
    total += fac(k) * Polynomial{std::vector<double>(sq)};
    obj.moment_terms.emplace_back(std::move(diff));
    obj.term_factors(k - 1) = fac(k);
  }

  obj.poly = std::move(total);
  obj.scale_factor = scale;
  obj.constraint_order = l;
  obj.kernel_degree = d;
  return obj;
}

}  // namespace

double UnivariatePolyObjective::value(double u) const {
  if (moment_terms.empty()) return poly(u);
  double v = 0.0;
  for (std::size_t k = 0; k < moment_terms.size(); ++k) {
    const double t = moment_terms[k](u);
    v += term_factors(static_cast<Eigen::Index>(k)) * t * t;
  }
  return v;
}

double UnivariatePolyObjective::deriv1(double u) const {
  if (moment_terms.empty()) return poly.derivative()(u);
  double v = 0.0;
  for (std::size_t k = 0; k < moment_terms.size(); ++k) {
    const double t = moment_terms[k](u);
    const double dt = moment_terms[k].derivative()(u);
    v += term_factors(static_cast<Eigen::Index>(k)) * 2.0 * t * dt;
  }
  return v;
}

double UnivariatePolyObjective::deriv2(double u) const {
  if (moment_terms.empty()) return poly.derivative().derivative()(u);
  double v = 0.0;
  for (std::size_t k = 0; k < moment_terms.size(); ++k) {
    const Polynomial d1 = moment_terms[k].derivative();
    const double t = moment_terms[k](u);
    const double dt = d1(u);
    const double ddt = d1.derivative()(u);
    v += term_factors(static_cast<Eigen::Index>(k)) * 2.0 * (dt * dt + t * ddt);
  }
  return v;
}

UnivariatePolyObjective operator+(const UnivariatePolyObjective& a,
                                  const UnivariatePolyObjective& b) {
  UnivariatePolyObjective out;
  out.poly = a.poly + b.poly;
  // the factored form survives only if it covers both addends completely
  const auto factored_or_zero = [](const UnivariatePolyObjective& o) {
    return !o.moment_terms.empty() || o.poly.is_zero();
  };
  if (factored_or_zero(a) && factored_or_zero(b)) {
    out.moment_terms = a.moment_terms;
    out.moment_terms.insert(out.moment_terms.end(), b.moment_terms.begin(),
                            b.moment_terms.end());
    out.term_factors = Eigen::VectorXd(static_cast<Eigen::Index>(out.moment_terms.size()));
    out.term_factors.head(a.term_factors.size()) = a.term_factors;
    out.term_factors.tail(b.term_factors.size()) = b.term_factors;
  }
  out.scale_factor = a.moment_terms.empty() && a.poly.is_zero() ? b.scale_factor
                                                                : a.scale_factor;
  out.constraint_order = std::max(a.constraint_order, b.constraint_order);
  out.kernel_degree = std::max(a.kernel_degree, b.kernel_degree);
  return out;
}

namespace {

}  // namespace

double pooled_scale(const std::vector<const CoefficientMatrices*>& cms,
                    const std::vector<const DesiredDistribution*>& desired) {
  // Pool f-values over the operating range of the decision (the embedded
  // grids evaluated at a few probe points) together with the desired values;
  // the median magnitude keeps kernel arguments near unit size even at the
  // top of the scan range.
  static constexpr double probes[] = {0.0, 1.0, 2.0, 4.0};
  std::vector<double> pool;
  for (const auto* cm : cms)
    for (const double u : probes) {
      const Eigen::VectorXd values = embed_at(*cm, u).values;
      pool.insert(pool.end(), values.data(), values.data() + values.size());
    }
  for (const auto* d : desired)
    pool.insert(pool.end(), d->values.data(), d->values.data() + d->values.size());
  return robust_scale(pool);
}

double pooled_scale_affine(const std::vector<const AffineCoefficientMatrices*>& cms,
                           const std::vector<const DesiredDistribution*>& desired) {
  std::vector<double> pool;
  for (const auto* cm : cms) {
    const Eigen::VectorXd b = cm->flattened_intercept();
    pool.insert(pool.end(), b.data(), b.data() + b.size());
    for (int j = 0; j < cm->dim(); ++j) {
      const Eigen::VectorXd s = cm->flattened_slope(j);
      pool.insert(pool.end(), s.data(), s.data() + s.size());
    }
  }
  for (const auto* d : desired)
    pool.insert(pool.end(), d->values.data(), d->values.data() + d->values.size());
  return robust_scale(pool);
}

UnivariatePolyObjective assemble_univariate(const CoefficientMatrices& cm,
                                            const DesiredDistribution& desired,
                                            const KernelSpec& spec,
                                            std::optional<double> scale_override,
                                            UnivariateAssembly path) {
  if (spec.family != KernelFamily::polynomial_scalar)
    throw std::invalid_argument("assemble_univariate requires the polynomial family");
  check_pair(cm, desired);
  const double scale = scale_override.value_or(pooled_scale({&cm}, {&desired}));

  if (path == UnivariateAssembly::automatic)
    path = spec.degree == 1 ? UnivariateAssembly::coefficient_expansion
                            : UnivariateAssembly::moment_factorization;
  if (path == UnivariateAssembly::coefficient_expansion) {
    if (spec.degree != 1)
      throw std::invalid_argument("coefficient expansion path requires degree 1");
    return assemble_coefficient_expansion(cm, desired, spec, scale);
  }
  return assemble_moment_factorization(cm, desired, spec, scale);
}

QuadraticObjective assemble_affine(
    const std::vector<AffineCoefficientMatrices>& cms,
    const std::vector<DesiredDistribution>& desired_list, const KernelSpec& spec,
    std::optional<double> scale_override) {
  if (spec.degree != 1)
    throw std::invalid_argument(
        "assemble_affine is the exact degree-1 path; use AffineMmdObjective for d >= 2");
  if (cms.empty() || cms.size() != desired_list.size())
    throw std::invalid_argument("assemble_affine: constraint/desired list mismatch");
  const int m = cms.front().dim();

  std::vector<const AffineCoefficientMatrices*> cm_ptrs;
  std::vector<const DesiredDistribution*> d_ptrs;
  for (const auto& cm : cms) cm_ptrs.push_back(&cm);
  for (const auto& d : desired_list) d_ptrs.push_back(&d);
  const double scale = scale_override.value_or(pooled_scale_affine(cm_ptrs, d_ptrs));

  QuadraticObjective total = QuadraticObjective::zero(m);
  for (std::size_t i = 0; i < cms.size(); ++i) {
    const auto& cm = cms[i];
    if (cm.dim() != m)
      throw std::invalid_argument("assemble_affine: mixed decision dimensions");
    const auto& des = desired_list[i];
    // mean slope / intercept of the embedded grid and desired mean, rescaled
    const double b_mean = cm.product_weights.dot(cm.flattened_intercept()) / scale;
    Eigen::VectorXd s_mean(m);
    for (int j = 0; j < m; ++j)
      s_mean(j) = cm.product_weights.dot(cm.flattened_slope(j)) / scale;
    const double t_mean = des.weights.dot(des.values) / scale;
    const double delta = b_mean - t_mean;
    total.quad += spec.scale * (s_mean * s_mean.transpose());
    total.lin += 2.0 * spec.scale * delta * s_mean;
    total.constant += spec.scale * delta * delta;
  }
  return total;
}

AffineMmdObjective::AffineMmdObjective(
    const std::vector<AffineCoefficientMatrices>& cms,
    const std::vector<DesiredDistribution>& desired_list, const KernelSpec& spec,
    std::optional<double> scale_override) {
  if (spec.family != KernelFamily::polynomial_scalar)
    throw std::invalid_argument("AffineMmdObjective requires the polynomial family");
  if (cms.empty() || cms.size() != desired_list.size())
    throw std::invalid_argument("AffineMmdObjective: constraint/desired list mismatch");
  degree_ = spec.degree;
  dim_ = cms.front().dim();
  binom_ = binomial_factors(spec);

  std::vector<const AffineCoefficientMatrices*> cm_ptrs;
  std::vector<const DesiredDistribution*> d_ptrs;
  for (const auto& cm : cms) cm_ptrs.push_back(&cm);
  for (const auto& d : desired_list) d_ptrs.push_back(&d);
  scale_ = scale_override.value_or(pooled_scale_affine(cm_ptrs, d_ptrs));

  for (std::size_t i = 0; i < cms.size(); ++i) {
    const auto& cm = cms[i];
    if (cm.dim() != dim_)
      throw std::invalid_argument("AffineMmdObjective: mixed decision dimensions");
    Block blk;
    blk.intercept = cm.flattened_intercept() / scale_;
    for (int j = 0; j < dim_; ++j) blk.slopes.push_back(cm.flattened_slope(j) / scale_);
    blk.weights = cm.product_weights;
    const Eigen::VectorXd g = desired_list[i].values / scale_;
    blk.desired_moments = Eigen::VectorXd::Zero(degree_ + 1);
    blk.desired_moments(0) = 1.0;
    Eigen::VectorXd powers = Eigen::VectorXd::Ones(g.size());
    for (int k = 1; k <= degree_; ++k) {
      powers.array() *= g.array();
      blk.desired_moments(k) = desired_list[i].weights.dot(powers);
    }
    blocks_.push_back(std::move(blk));
  }
}

double AffineMmdObjective::value(const Eigen::VectorXd& u) const {
  double total = 0.0;
  for (const auto& blk : blocks_) {
    Eigen::VectorXd F = blk.intercept;
    for (int j = 0; j < dim_; ++j) F += u(j) * blk.slopes[static_cast<std::size_t>(j)];
    Eigen::VectorXd powers = Eigen::VectorXd::Ones(F.size());
    for (int k = 1; k <= degree_; ++k) {
      powers.array() *= F.array();
      const double diff = blk.weights.dot(powers) - blk.desired_moments(k);
      total += binom_(k) * diff * diff;
    }
  }
  return total;
}

Eigen::VectorXd AffineMmdObjective::gradient(const Eigen::VectorXd& u) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim_);
  for (const auto& blk : blocks_) {
    Eigen::VectorXd F = blk.intercept;
    for (int j = 0; j < dim_; ++j) F += u(j) * blk.slopes[static_cast<std::size_t>(j)];
    // moments and their slope contractions
    Eigen::VectorXd powers = Eigen::VectorXd::Ones(F.size());
    Eigen::VectorXd diffs(degree_ + 1);
    std::vector<Eigen::VectorXd> pow_hist;  // F^(k-1) for k = 1..d
    pow_hist.reserve(static_cast<std::size_t>(degree_));
    for (int k = 1; k <= degree_; ++k) {
      pow_hist.push_back(powers);
      powers.array() *= F.array();
      diffs(k) = blk.weights.dot(powers) - blk.desired_moments(k);
    }
    for (int k = 1; k <= degree_; ++k) {
      const Eigen::VectorXd weighted =
          blk.weights.array() * pow_hist[static_cast<std::size_t>(k - 1)].array();
      const double coeff = 2.0 * binom_(k) * diffs(k) * static_cast<double>(k);
      for (int j = 0; j < dim_; ++j)
        grad(j) += coeff * weighted.dot(blk.slopes[static_cast<std::size_t>(j)]);
    }
  }
  return grad;
}

WeightedSampleSet embed_at(const CoefficientMatrices& cm, double u) {
  const Eigen::Index grid = cm.rows() * cm.cols();
  std::vector<Eigen::VectorXd> flats;
  std::vector<const double*> ptrs;
  for (std::size_t i = 0; i < cm.fields.size(); ++i) {
    flats.push_back(cm.flattened(i));
    ptrs.push_back(flats.back().data());
  }
  Eigen::VectorXd values(grid);
  simd::ops().poly_combine(ptrs.data(), ptrs.size(),
                           static_cast<std::size_t>(grid), u, values.data());
  return WeightedSampleSet(std::move(values), cm.product_weights);
}

WeightedSampleSet embed_at(const AffineCoefficientMatrices& cm,
                           const Eigen::VectorXd& u) {
  if (u.size() != cm.dim())
    throw std::invalid_argument("embed_at: decision dimension mismatch");
  Eigen::VectorXd values = cm.flattened_intercept();
  for (int j = 0; j < cm.dim(); ++j) values += u(j) * cm.flattened_slope(j);
  return WeightedSampleSet(std::move(values), cm.product_weights);
}

}  // namespace mmdcc
