#include "mmdcc/simd/ops.hpp"

// NEON variants (aarch64). Same mul/add sequence as the scalar reference.

#if defined(__ARM_NEON) || defined(__aarch64__)
#define MMDCC_HAVE_NEON_TU 1
#include <arm_neon.h>
#else
#define MMDCC_HAVE_NEON_TU 0
#endif

namespace mmdcc::simd {

#if MMDCC_HAVE_NEON_TU

namespace {

inline double pow_small(double base, int degree) {
  double r = base;
  for (int k = 1; k < degree; ++k) r *= base;
  return degree == 0 ? 1.0 : r;
}

inline float64x2_t pow_small(float64x2_t base, int degree) {
  float64x2_t r = base;
  for (int k = 1; k < degree; ++k) r = vmulq_f64(r, base);
  return degree == 0 ? vdupq_n_f64(1.0) : r;
}

void poly_gram_neon(const double* xs, std::size_t nx, const double* ys,
                    std::size_t ny, double scale, double offset, int degree,
                    double* out) {
  const float64x2_t voff = vdupq_n_f64(offset);
  for (std::size_t i = 0; i < nx; ++i) {
    const double a = scale * xs[i];
    const float64x2_t va = vdupq_n_f64(a);
    double* row = out + i * ny;
    std::size_t j = 0;
    for (; j + 2 <= ny; j += 2) {
      float64x2_t t = vmulq_f64(va, vld1q_f64(ys + j));
      t = vaddq_f64(t, voff);
      vst1q_f64(row + j, pow_small(t, degree));
    }
    for (; j < ny; ++j) {
      double t = a * ys[j];
      t += offset;
      row[j] = pow_small(t, degree);
    }
  }
}

double poly_quadform_neon(const double* xs, const double* wx, std::size_t nx,
                          const double* ys, const double* wy, std::size_t ny,
                          double scale, double offset, int degree) {
  const float64x2_t voff = vdupq_n_f64(offset);
  double total = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    const double a = scale * xs[i];
    const float64x2_t va = vdupq_n_f64(a);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t j = 0;
    for (; j + 2 <= ny; j += 2) {
      float64x2_t t = vmulq_f64(va, vld1q_f64(ys + j));
      t = vaddq_f64(t, voff);
      t = pow_small(t, degree);
      acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(wy + j), t));
    }
    double inner = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; j < ny; ++j) {
      double t = a * ys[j];
      t += offset;
      inner += wy[j] * pow_small(t, degree);
    }
    total += wx[i] * inner;
  }
  return total;
}

void poly_combine_neon(const double* const* grids, std::size_t terms,
                       std::size_t n, double u, double* out) {
  if (terms == 0) return;
  const double* top = grids[terms - 1];
  for (std::size_t p = 0; p < n; ++p) out[p] = top[p];
  const float64x2_t vu = vdupq_n_f64(u);
  for (std::size_t k = terms - 1; k-- > 0;) {
    const double* g = grids[k];
    std::size_t p = 0;
    for (; p + 2 <= n; p += 2) {
      float64x2_t acc = vmulq_f64(vld1q_f64(out + p), vu);
      acc = vaddq_f64(acc, vld1q_f64(g + p));
      vst1q_f64(out + p, acc);
    }
    for (; p < n; ++p) {
      double acc = out[p] * u;
      acc += g[p];
      out[p] = acc;
    }
  }
}

std::size_t count_quad_le_neon(const double* h0, const double* h1,
                               const double* h2, std::size_t n, double u,
                               double bound) {
  const float64x2_t vu = vdupq_n_f64(u);
  const float64x2_t vb = vdupq_n_f64(bound);
  std::size_t count = 0;
  std::size_t p = 0;
  for (; p + 2 <= n; p += 2) {
    float64x2_t v = vmulq_f64(vld1q_f64(h2 + p), vu);
    v = vaddq_f64(v, vld1q_f64(h1 + p));
    v = vmulq_f64(v, vu);
    v = vaddq_f64(v, vld1q_f64(h0 + p));
    const uint64x2_t m = vcleq_f64(v, vb);
    count += (vgetq_lane_u64(m, 0) & 1u) + (vgetq_lane_u64(m, 1) & 1u);
  }
  for (; p < n; ++p) {
    double v = h2[p] * u;
    v += h1[p];
    v *= u;
    v += h0[p];
    count += (v <= bound) ? 1 : 0;
  }
  return count;
}

const Ops table{poly_gram_neon, poly_quadform_neon, poly_combine_neon,
                count_quad_le_neon};

}  // namespace

namespace detail {
const Ops* neon_ops() { return &table; }
}

#else

namespace detail {
const Ops* neon_ops() { return nullptr; }
}

#endif

}  // namespace mmdcc::simd
