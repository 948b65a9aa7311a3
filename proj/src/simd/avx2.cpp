#include "mmdcc/simd/ops.hpp"

// AVX2 variants. Elementwise kernels repeat the scalar mul/add sequence per
// lane (no FMA), so they match the scalar backend bit for bit; only the
// quadform reduction reassociates the sum.

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
#define MMDCC_HAVE_AVX2_TU 1
#include <immintrin.h>
#else
#define MMDCC_HAVE_AVX2_TU 0
#endif

namespace mmdcc::simd {

#if MMDCC_HAVE_AVX2_TU

namespace {

inline double pow_small(double base, int degree) {
  double r = base;
  for (int k = 1; k < degree; ++k) r *= base;
  return degree == 0 ? 1.0 : r;
}

inline __m256d pow_small(__m256d base, int degree) {
  __m256d r = base;
  for (int k = 1; k < degree; ++k) r = _mm256_mul_pd(r, base);
  return degree == 0 ? _mm256_set1_pd(1.0) : r;
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void poly_gram_avx2(const double* xs, std::size_t nx, const double* ys,
                    std::size_t ny, double scale, double offset, int degree,
                    double* out) {
  const __m256d voff = _mm256_set1_pd(offset);
  for (std::size_t i = 0; i < nx; ++i) {
    const double a = scale * xs[i];
    const __m256d va = _mm256_set1_pd(a);
    double* row = out + i * ny;
    std::size_t j = 0;
    for (; j + 4 <= ny; j += 4) {
      __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(ys + j));
      t = _mm256_add_pd(t, voff);
      _mm256_storeu_pd(row + j, pow_small(t, degree));
    }
    for (; j < ny; ++j) {
      double t = a * ys[j];
      t += offset;
      row[j] = pow_small(t, degree);
    }
  }
}

double poly_quadform_avx2(const double* xs, const double* wx, std::size_t nx,
                          const double* ys, const double* wy, std::size_t ny,
                          double scale, double offset, int degree) {
  const __m256d voff = _mm256_set1_pd(offset);
  double total = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    const double a = scale * xs[i];
    const __m256d va = _mm256_set1_pd(a);
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= ny; j += 4) {
      __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(ys + j));
      t = _mm256_add_pd(t, voff);
      t = pow_small(t, degree);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(wy + j), t));
    }
    double inner = hsum(acc);
    for (; j < ny; ++j) {
      double t = a * ys[j];
      t += offset;
      inner += wy[j] * pow_small(t, degree);
    }
    total += wx[i] * inner;
  }
  return total;
}

void poly_combine_avx2(const double* const* grids, std::size_t terms,
                       std::size_t n, double u, double* out) {
  if (terms == 0) return;
  const double* top = grids[terms - 1];
  for (std::size_t p = 0; p < n; ++p) out[p] = top[p];
  const __m256d vu = _mm256_set1_pd(u);
  for (std::size_t k = terms - 1; k-- > 0;) {
    const double* g = grids[k];
    std::size_t p = 0;
    for (; p + 4 <= n; p += 4) {
      __m256d acc = _mm256_mul_pd(_mm256_loadu_pd(out + p), vu);
      acc = _mm256_add_pd(acc, _mm256_loadu_pd(g + p));
      _mm256_storeu_pd(out + p, acc);
    }
    for (; p < n; ++p) {
      double acc = out[p] * u;
      acc += g[p];
      out[p] = acc;
    }
  }
}

std::size_t count_quad_le_avx2(const double* h0, const double* h1,
                               const double* h2, std::size_t n, double u,
                               double bound) {
  const __m256d vu = _mm256_set1_pd(u);
  const __m256d vb = _mm256_set1_pd(bound);
  std::size_t count = 0;
  std::size_t p = 0;
  for (; p + 4 <= n; p += 4) {
    __m256d v = _mm256_mul_pd(_mm256_loadu_pd(h2 + p), vu);
    v = _mm256_add_pd(v, _mm256_loadu_pd(h1 + p));
    v = _mm256_mul_pd(v, vu);
    v = _mm256_add_pd(v, _mm256_loadu_pd(h0 + p));
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(v, vb, _CMP_LE_OQ));
    count += static_cast<std::size_t>(__builtin_popcount(mask));
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

const Ops table{poly_gram_avx2, poly_quadform_avx2, poly_combine_avx2,
                count_quad_le_avx2};

}  // namespace

namespace detail {
const Ops* avx2_ops() { return &table; }
}

#else

namespace detail {
const Ops* avx2_ops() { return nullptr; }
}

#endif

}  // namespace mmdcc::simd
