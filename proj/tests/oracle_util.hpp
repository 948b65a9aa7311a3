#pragma once

// Test-only reference route: pairwise Gram-sum MMD^2 accumulated in long
// double. Independent of the factorized assembly under test; the extra
// precision keeps the reference noise well under the identity tolerances.

#include <Eigen/Dense>

#include "mmdcc/embedding.hpp"
#include "mmdcc/kernel.hpp"

namespace mmdcc::testing {

inline long double poly_kernel_ld(long double a, long double b,
                                  const KernelSpec& spec) {
  long double t = static_cast<long double>(spec.scale) * a * b +
                  static_cast<long double>(spec.offset);
  long double r = t;
  for (int k = 1; k < spec.degree; ++k) r *= t;
  return r;
}

inline double direct_mmd_reference(const WeightedSampleSet& P,
                                   const WeightedSampleSet& Q,
                                   const KernelSpec& spec) {
  const auto quad = [&](const WeightedSampleSet& A, const WeightedSampleSet& B) {
    long double total = 0.0L;
    for (Eigen::Index i = 0; i < A.size(); ++i) {
      long double inner = 0.0L;
      for (Eigen::Index j = 0; j < B.size(); ++j)
        inner += static_cast<long double>(B.weights(j)) *
                 poly_kernel_ld(A.values(i), B.values(j), spec);
      total += static_cast<long double>(A.weights(i)) * inner;
    }
    return total;
  };
  return static_cast<double>(quad(P, P) - 2.0L * quad(P, Q) + quad(Q, Q));
}

}  // namespace mmdcc::testing
