#include "mmdcc/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mmdcc/simd/ops.hpp"

namespace mmdcc {

KernelSpec KernelSpec::polynomial(int degree, double offset, double scale) {
  KernelSpec s;
  s.family = KernelFamily::polynomial_scalar;
  s.degree = degree;
  s.offset = offset;
  s.scale = scale;
  s.validate();
  return s;
}

KernelSpec KernelSpec::rbf(double bandwidth) {
  KernelSpec s;
  s.family = KernelFamily::rbf_vector;
  s.rbf_bandwidth = bandwidth;
  s.validate();
  return s;
}

void KernelSpec::validate() const {
  if (family == KernelFamily::polynomial_scalar) {
    if (degree < 1) throw std::invalid_argument("kernel degree must be >= 1");
    if (offset < 0.0) throw std::invalid_argument("kernel offset must be >= 0");
    if (!(scale > 0.0)) throw std::invalid_argument("kernel scale must be > 0");
  } else {
    if (!(rbf_bandwidth > 0.0))
      throw std::invalid_argument("rbf bandwidth must be > 0");
  }
}

double poly_kernel(double a, double b, const KernelSpec& spec) {
  if (spec.family != KernelFamily::polynomial_scalar)
    throw std::invalid_argument("poly_kernel requires the polynomial family");
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("poly_kernel: non-finite input");
  double out = 0.0;
  simd::ops().poly_gram(&a, 1, &b, 1, spec.scale, spec.offset, spec.degree,
                        &out);
  return out;
}

double rbf_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                  const KernelSpec& spec) {
  if (spec.family != KernelFamily::rbf_vector)
    throw std::invalid_argument("rbf_kernel requires the rbf family");
  if (x.size() != y.size())
    throw std::invalid_argument("rbf_kernel: dimension mismatch");
  const double sq = (x - y).squaredNorm();
  return std::exp(-sq / (2.0 * spec.rbf_bandwidth * spec.rbf_bandwidth));
}

Eigen::MatrixXd gram(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                     const KernelSpec& spec) {
  if (spec.family != KernelFamily::polynomial_scalar)
    throw std::invalid_argument("scalar gram requires the polynomial family");
  if (xs.size() == 0 || ys.size() == 0)
    throw std::invalid_argument("gram: empty input");
  const std::size_t nx = static_cast<std::size_t>(xs.size());
  const std::size_t ny = static_cast<std::size_t>(ys.size());
  std::vector<double> buf(nx * ny);
  simd::ops().poly_gram(xs.data(), nx, ys.data(), ny, spec.scale, spec.offset,
                        spec.degree, buf.data());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(nx),
                      static_cast<Eigen::Index>(ny));
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          buf[i * ny + j];
  return out;
}

Eigen::MatrixXd gram(const std::vector<Eigen::VectorXd>& xs,
                     const std::vector<Eigen::VectorXd>& ys,
                     const KernelSpec& spec) {
  if (spec.family != KernelFamily::rbf_vector)
    throw std::invalid_argument("vector gram requires the rbf family");
  if (xs.empty() || ys.empty()) throw std::invalid_argument("gram: empty input");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()),
                      static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rbf_kernel(xs[i], ys[j], spec);
  return out;
}

double median_pairwise_distance(const std::vector<Eigen::VectorXd>& points) {
  std::vector<double> d;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      d.push_back((points[i] - points[j]).norm());
  if (d.empty()) return 1.0;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2),
                   d.end());
  const double med = d[d.size() / 2];
  return med > 1e-12 ? med : 1.0;
}

double robust_scale(std::span<const double> pooled) {
  std::vector<double> mags;
  mags.reserve(pooled.size());
  for (const double v : pooled) mags.push_back(std::abs(v));
  if (mags.empty()) return 1.0;
  std::nth_element(mags.begin(),
                   mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2),
                   mags.end());
  double s = mags[mags.size() / 2];
  if (s < 1e-12) s = *std::max_element(mags.begin(), mags.end());
  return s < 1e-12 ? 1.0 : s;
}

}  // namespace mmdcc
