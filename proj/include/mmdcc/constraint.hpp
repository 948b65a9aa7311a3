#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace mmdcc {

// Pure evaluator of one coefficient field h_i(w1, w2).
using CoefficientField =
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

// f(w1, w2, u) = sum_i h_i(w1, w2) u^i for a scalar decision u.
struct PolynomialChanceConstraint {
  std::vector<CoefficientField> coefficient_fields;  // h_0 .. h_l

  int order() const { return static_cast<int>(coefficient_fields.size()) - 1; }
  double evaluate(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2,
                  double u) const;
};

// f(w1, w2, u) = sum_j h^j(w1, w2) u_j + h(w1, w2) for a vector decision u.
struct AffineChanceConstraint {
  std::vector<CoefficientField> slope_fields;  // h^1 .. h^m
  CoefficientField intercept_field;

  int dim() const { return static_cast<int>(slope_fields.size()); }
  double evaluate(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2,
                  const Eigen::VectorXd& u) const;
};

// Coefficient fields evaluated over a sample grid, plus the row-major
// product weights c_ab = weights_a[a] * weights_b[b].
struct CoefficientMatrices {
  std::vector<Eigen::MatrixXd> fields;  // fields[i](a, b) = h_i(w1^a, w2^b)
  Eigen::VectorXd product_weights;      // length rows*cols, index a*cols + b

  Eigen::Index rows() const { return fields.empty() ? 0 : fields[0].rows(); }
  Eigen::Index cols() const { return fields.empty() ? 0 : fields[0].cols(); }
  // row-major flattening matching product_weights order
  Eigen::VectorXd flattened(std::size_t field_index) const;
};

struct AffineCoefficientMatrices {
  std::vector<Eigen::MatrixXd> slopes;  // per decision variable
  Eigen::MatrixXd intercept;
  Eigen::VectorXd product_weights;

  int dim() const { return static_cast<int>(slopes.size()); }
  Eigen::Index rows() const { return intercept.rows(); }
  Eigen::Index cols() const { return intercept.cols(); }
  Eigen::VectorXd flattened_intercept() const;
  Eigen::VectorXd flattened_slope(int j) const;
};

CoefficientMatrices evaluate_coefficient_matrices(
    const PolynomialChanceConstraint& constraint,
    const std::vector<Eigen::VectorXd>& samples_w1,
    const Eigen::VectorXd& weights_a,
    const std::vector<Eigen::VectorXd>& samples_w2,
    const Eigen::VectorXd& weights_b);

AffineCoefficientMatrices evaluate_coefficient_matrices(
    const AffineChanceConstraint& constraint,
    const std::vector<Eigen::VectorXd>& samples_w1,
    const Eigen::VectorXd& weights_a,
    const std::vector<Eigen::VectorXd>& samples_w2,
    const Eigen::VectorXd& weights_b);

Eigen::VectorXd product_weights(const Eigen::VectorXd& weights_a,
                                const Eigen::VectorXd& weights_b);

}  // namespace mmdcc
