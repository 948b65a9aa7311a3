#include "mmdcc/constraint.hpp"

#include <stdexcept>

namespace mmdcc {

double PolynomialChanceConstraint::evaluate(const Eigen::VectorXd& w1,
                                            const Eigen::VectorXd& w2,
                                            double u) const {
  double acc = 0.0;
  for (std::size_t i = coefficient_fields.size(); i-- > 0;)
    acc = acc * u + coefficient_fields[i](w1, w2);
  return acc;
}

double AffineChanceConstraint::evaluate(const Eigen::VectorXd& w1,
                                        const Eigen::VectorXd& w2,
                                        const Eigen::VectorXd& u) const {
  if (u.size() != dim())
    throw std::invalid_argument("affine constraint: decision dimension mismatch");
  double acc = intercept_field(w1, w2);
  for (int j = 0; j < dim(); ++j)
    acc += slope_fields[static_cast<std::size_t>(j)](w1, w2) * u(j);
  return acc;
}

Eigen::VectorXd CoefficientMatrices::flattened(std::size_t field_index) const {
  const auto& H = fields.at(field_index);
  Eigen::VectorXd out(H.rows() * H.cols());
  for (Eigen::Index a = 0; a < H.rows(); ++a)
    for (Eigen::Index b = 0; b < H.cols(); ++b) out(a * H.cols() + b) = H(a, b);
  return out;
}

namespace {

Eigen::VectorXd flatten(const Eigen::MatrixXd& H) {
  Eigen::VectorXd out(H.rows() * H.cols());
  for (Eigen::Index a = 0; a < H.rows(); ++a)
    for (Eigen::Index b = 0; b < H.cols(); ++b) out(a * H.cols() + b) = H(a, b);
  return out;
}

Eigen::MatrixXd evaluate_field(const CoefficientField& h,
                               const std::vector<Eigen::VectorXd>& w1,
                               const std::vector<Eigen::VectorXd>& w2) {
  Eigen::MatrixXd H(static_cast<Eigen::Index>(w1.size()),
                    static_cast<Eigen::Index>(w2.size()));
  for (std::size_t a = 0; a < w1.size(); ++a)
    for (std::size_t b = 0; b < w2.size(); ++b)
      H(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          h(w1[a], w2[b]);
  return H;
}

void check_grid_inputs(const std::vector<Eigen::VectorXd>& w1,
                       const Eigen::VectorXd& wa,
                       const std::vector<Eigen::VectorXd>& w2,
                       const Eigen::VectorXd& wb) {
  if (w1.empty() || w2.empty())
    throw std::invalid_argument("coefficient grid: empty sample list");
  if (static_cast<Eigen::Index>(w1.size()) != wa.size() ||
      static_cast<Eigen::Index>(w2.size()) != wb.size())
    throw std::invalid_argument("coefficient grid: weights length mismatch");
}

}  // namespace

Eigen::VectorXd AffineCoefficientMatrices::flattened_intercept() const {
  return flatten(intercept);
}

Eigen::VectorXd AffineCoefficientMatrices::flattened_slope(int j) const {
  return flatten(slopes.at(static_cast<std::size_t>(j)));
}

Eigen::VectorXd product_weights(const Eigen::VectorXd& weights_a,
                                const Eigen::VectorXd& weights_b) {
  Eigen::VectorXd c(weights_a.size() * weights_b.size());
  for (Eigen::Index a = 0; a < weights_a.size(); ++a)
    for (Eigen::Index b = 0; b < weights_b.size(); ++b)
      c(a * weights_b.size() + b) = weights_a(a) * weights_b(b);
  return c;
}

CoefficientMatrices evaluate_coefficient_matrices(
    const PolynomialChanceConstraint& constraint,
    const std::vector<Eigen::VectorXd>& samples_w1,
    const Eigen::VectorXd& weights_a,
    const std::vector<Eigen::VectorXd>& samples_w2,
    const Eigen::VectorXd& weights_b) {
  check_grid_inputs(samples_w1, weights_a, samples_w2, weights_b);
  CoefficientMatrices cm;
  cm.fields.reserve(constraint.coefficient_fields.size());
  for (const auto& h : constraint.coefficient_fields)
    cm.fields.push_back(evaluate_field(h, samples_w1, samples_w2));
  cm.product_weights = product_weights(weights_a, weights_b);
  return cm;
}

AffineCoefficientMatrices evaluate_coefficient_matrices(
    const AffineChanceConstraint& constraint,
    const std::vector<Eigen::VectorXd>& samples_w1,
    const Eigen::VectorXd& weights_a,
    const std::vector<Eigen::VectorXd>& samples_w2,
    const Eigen::VectorXd& weights_b) {
  check_grid_inputs(samples_w1, weights_a, samples_w2, weights_b);
  AffineCoefficientMatrices cm;
  cm.slopes.reserve(constraint.slope_fields.size());
  for (const auto& h : constraint.slope_fields)
    cm.slopes.push_back(evaluate_field(h, samples_w1, samples_w2));
  cm.intercept = evaluate_field(constraint.intercept_field, samples_w1, samples_w2);
  cm.product_weights = product_weights(weights_a, weights_b);
  return cm;
}

}  // namespace mmdcc
