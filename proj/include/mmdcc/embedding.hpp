#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mmdcc/kernel.hpp"

namespace mmdcc {

// Weighted scalar samples; the carrier of every empirical distribution of
// constraint values. Weights must sum to 1 (1e-9 tolerance) but may be
// negative: reduced-set fits legitimately produce small negative weights.
struct WeightedSampleSet {
  Eigen::VectorXd values;
  Eigen::VectorXd weights;

  WeightedSampleSet() = default;
  WeightedSampleSet(Eigen::VectorXd v, Eigen::VectorXd w);  // validates
  static WeightedSampleSet uniform(Eigen::VectorXd v);

  Eigen::Index size() const { return values.size(); }
  double weight_sum_squares() const { return weights.squaredNorm(); }
  double min_weight() const { return weights.minCoeff(); }
};

// Weighted uncertainty-space samples (vector-valued).
struct VectorSampleSet {
  std::vector<Eigen::VectorXd> values;
  Eigen::VectorXd weights;

  VectorSampleSet() = default;
  VectorSampleSet(std::vector<Eigen::VectorXd> v, Eigen::VectorXd w);
  static VectorSampleSet uniform(std::vector<Eigen::VectorXd> v);
};

// Squared distance between the kernel means of P and Q:
//   wP' K_PP wP - 2 wP' K_PQ wQ + wQ' K_QQ wQ,
// clamped at zero from below. A pre-clamp value materially below zero
// (beyond rounding noise for the input magnitudes) indicates a broken
// kernel and throws.
double mmd_squared(const WeightedSampleSet& P, const WeightedSampleSet& Q,
                   const KernelSpec& spec);
double mmd_squared(const VectorSampleSet& P, const VectorSampleSet& Q,
                   const KernelSpec& spec);

// Raw moments m_k = sum_i w_i x_i^k for k = 1..order.
Eigen::VectorXd empirical_moments(const WeightedSampleSet& P, int order);

}  // namespace mmdcc
