#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "mmdcc/constraint.hpp"
#include "mmdcc/desired.hpp"
#include "mmdcc/embedding.hpp"
#include "mmdcc/kernel.hpp"
#include "mmdcc/poly.hpp"
#include "mmdcc/quadratic.hpp"

namespace mmdcc {

// ||mu_{P_f}(u) - mu_{P_f^des}||^2 expanded into a polynomial in u. Values
// are taken in rescaled space: constraint values on both sides are divided
// by scale_factor before kernel evaluation, the same factor for both sets.
//
// Besides the expanded coefficients, the factorization path keeps the terms
// sum_k factors[k] * (S_k(u) - t_k)^2 (weighted-moment differences); that
// form evaluates without the cancellation the expanded coefficients suffer
// at high degree, so it backs value() and the solver's derivatives.
struct UnivariatePolyObjective {
  Polynomial poly;
  std::vector<Polynomial> moment_terms;  // T_k(u) = S_k(u) - t_k, k = 1..d
  Eigen::VectorXd term_factors;          // C(d,k) gamma^k c^(d-k)
  double scale_factor = 1.0;
  int constraint_order = 0;
  int kernel_degree = 1;

  double value(double u) const;
  double deriv1(double u) const;
  double deriv2(double u) const;
  double operator()(double u) const { return value(u); }
  int degree() const { return poly.degree(); }
};

// Pointwise sum of compatible objectives (shared scale factor assumed).
UnivariatePolyObjective operator+(const UnivariatePolyObjective& a,
                                  const UnivariatePolyObjective& b);

enum class UnivariateAssembly {
  automatic,               // coefficient expansion at d=1, factorization above
  coefficient_expansion,   // Gram-contraction coefficients (d = 1 only)
  moment_factorization     // binomial split over weighted moments (any d)
};

UnivariatePolyObjective assemble_univariate(
    const CoefficientMatrices& cm, const DesiredDistribution& desired,
    const KernelSpec& spec, std::optional<double> scale_override = std::nullopt,
    UnivariateAssembly path = UnivariateAssembly::automatic);

// Affine constraints, linear-kernel path (d = 1): the summed MMD^2 across
// constraints is an exact quadratic form in the decision vector.
QuadraticObjective assemble_affine(
    const std::vector<AffineCoefficientMatrices>& cms,
    const std::vector<DesiredDistribution>& desired_list, const KernelSpec& spec,
    std::optional<double> scale_override = std::nullopt);

// Affine constraints, general degree: the summed MMD^2 is a smooth polynomial
// in u evaluated directly (with its exact gradient) from weighted moments.
class AffineMmdObjective {
 public:
  AffineMmdObjective(const std::vector<AffineCoefficientMatrices>& cms,
                     const std::vector<DesiredDistribution>& desired_list,
                     const KernelSpec& spec,
                     std::optional<double> scale_override = std::nullopt);

  double value(const Eigen::VectorXd& u) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const;
  double scale_factor() const { return scale_; }
  int dim() const { return dim_; }

 private:
  struct Block {
    Eigen::VectorXd intercept;               // scaled, flattened
    std::vector<Eigen::VectorXd> slopes;     // scaled, flattened, per variable
    Eigen::VectorXd weights;
    Eigen::VectorXd desired_moments;         // t_k, k = 0..d
  };
  std::vector<Block> blocks_;
  Eigen::VectorXd binom_;  // C(d,k) gamma^k c^(d-k)
  int degree_ = 1;
  int dim_ = 0;
  double scale_ = 1.0;
};

// Weighted sample set {sum_i H_i[a][b] u^i} with the grid product weights;
// its kernel mean is the embedding the assembled objectives must reproduce
// (unscaled; divide values by scale_factor to compare against an objective).
WeightedSampleSet embed_at(const CoefficientMatrices& cm, double u);
WeightedSampleSet embed_at(const AffineCoefficientMatrices& cm,
                           const Eigen::VectorXd& u);

// Shared conditioning factor for a family of objectives: robust scale of all
// coefficient-grid entries and desired values pooled together.
double pooled_scale(const std::vector<const CoefficientMatrices*>& cms,
                    const std::vector<const DesiredDistribution*>& desired);
double pooled_scale_affine(const std::vector<const AffineCoefficientMatrices*>& cms,
                           const std::vector<const DesiredDistribution*>& desired);

}  // namespace mmdcc
