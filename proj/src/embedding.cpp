#include "mmdcc/embedding.hpp"

#include <cmath>
#include <stdexcept>

#include "mmdcc/simd/ops.hpp"

namespace mmdcc {

namespace {

void check_weights(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
  if (values.size() == 0) throw std::invalid_argument("sample set is empty");
  if (values.size() != weights.size())
    throw std::invalid_argument("values/weights length mismatch");
  if (!values.allFinite() || !weights.allFinite())
    throw std::invalid_argument("sample set contains non-finite entries");
  if (std::abs(weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("weights must sum to 1 within 1e-9");
}

}  // namespace

WeightedSampleSet::WeightedSampleSet(Eigen::VectorXd v, Eigen::VectorXd w)
    : values(std::move(v)), weights(std::move(w)) {
  check_weights(values, weights);
}

WeightedSampleSet WeightedSampleSet::uniform(Eigen::VectorXd v) {
  const Eigen::Index n = v.size();
  if (n == 0) throw std::invalid_argument("sample set is empty");
  return WeightedSampleSet(std::move(v),
                           Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

VectorSampleSet::VectorSampleSet(std::vector<Eigen::VectorXd> v, Eigen::VectorXd w)
    : values(std::move(v)), weights(std::move(w)) {
  if (values.empty()) throw std::invalid_argument("sample set is empty");
  if (static_cast<Eigen::Index>(values.size()) != weights.size())
    throw std::invalid_argument("values/weights length mismatch");
  if (std::abs(weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("weights must sum to 1 within 1e-9");
}

VectorSampleSet VectorSampleSet::uniform(std::vector<Eigen::VectorXd> v) {
  const Eigen::Index n = static_cast<Eigen::Index>(v.size());
  if (n == 0) throw std::invalid_argument("sample set is empty");
  return VectorSampleSet(std::move(v),
                         Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

namespace {

double clamp_mmd(double pp, double pq, double qq) {
  const double v = pp - 2.0 * pq + qq;
  const double guard =
      1e-10 * std::max(1.0, std::abs(pp) + 2.0 * std::abs(pq) + std::abs(qq));
  if (v < -guard)
    throw std::runtime_error("mmd_squared: negative beyond tolerance (non-PSD kernel?)");
  return v < 0.0 ? 0.0 : v;
}

}  // namespace

double mmd_squared(const WeightedSampleSet& P, const WeightedSampleSet& Q,
                   const KernelSpec& spec) {
  if (spec.family != KernelFamily::polynomial_scalar)
    throw std::invalid_argument("scalar mmd_squared requires the polynomial family");
  check_weights(P.values, P.weights);
  check_weights(Q.values, Q.weights);
  const auto& k = simd::ops();
  const auto quad = [&](const WeightedSampleSet& A, const WeightedSampleSet& B) {
    return k.poly_quadform(A.values.data(), A.weights.data(),
                           static_cast<std::size_t>(A.size()), B.values.data(),
                           B.weights.data(), static_cast<std::size_t>(B.size()),
                           spec.scale, spec.offset, spec.degree);
  };
  return clamp_mmd(quad(P, P), quad(P, Q), quad(Q, Q));
}

double mmd_squared(const VectorSampleSet& P, const VectorSampleSet& Q,
                   const KernelSpec& spec) {
  if (spec.family != KernelFamily::rbf_vector)
    throw std::invalid_argument("vector mmd_squared requires the rbf family");
  const auto quad = [&](const VectorSampleSet& A, const VectorSampleSet& B) {
    const Eigen::MatrixXd K = gram(A.values, B.values, spec);
    return A.weights.dot(K * B.weights);
  };
  return clamp_mmd(quad(P, P), quad(P, Q), quad(Q, Q));
}

Eigen::VectorXd empirical_moments(const WeightedSampleSet& P, int order) {
  if (order < 1) throw std::invalid_argument("moment order must be >= 1");
  check_weights(P.values, P.weights);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd powers = Eigen::VectorXd::Ones(P.values.size());
  for (int k = 1; k <= order; ++k) {
    powers.array() *= P.values.array();
    m(k - 1) = P.weights.dot(powers);
  }
  return m;
}

}  // namespace mmdcc
