#include "mmdcc/simd/ops.hpp"

// Reference kernels. Elementwise entries are written mul-then-add (no fused
// contractions) so the vector backends can reproduce them bit for bit.

namespace mmdcc::simd {
namespace {

inline double pow_small(double base, int degree) {
  double r = base;
  for (int k = 1; k < degree; ++k) r *= base;
  return degree == 0 ? 1.0 : r;
}

void poly_gram_scalar(const double* xs, std::size_t nx, const double* ys,
                      std::size_t ny, double scale, double offset, int degree,
                      double* out) {
  for (std::size_t i = 0; i < nx; ++i) {
    const double a = scale * xs[i];
    double* row = out + i * ny;
    for (std::size_t j = 0; j < ny; ++j) {
      double t = a * ys[j];
      t += offset;
      row[j] = pow_small(t, degree);
    }
  }
}

double poly_quadform_scalar(const double* xs, const double* wx, std::size_t nx,
                            const double* ys, const double* wy, std::size_t ny,
                            double scale, double offset, int degree) {
  double total = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    const double a = scale * xs[i];
    double inner = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
      double t = a * ys[j];
      t += offset;
      inner += wy[j] * pow_small(t, degree);
    }
    total += wx[i] * inner;
  }
  return total;
}

void poly_combine_scalar(const double* const* grids, std::size_t terms,
                         std::size_t n, double u, double* out) {
  if (terms == 0) return;
  const double* top = grids[terms - 1];
  for (std::size_t p = 0; p < n; ++p) out[p] = top[p];
  for (std::size_t k = terms - 1; k-- > 0;) {
    const double* g = grids[k];
    for (std::size_t p = 0; p < n; ++p) {
      double acc = out[p] * u;
      acc += g[p];
      out[p] = acc;
    }
  }
}

std::size_t count_quad_le_scalar(const double* h0, const double* h1,
                                 const double* h2, std::size_t n, double u,
                                 double bound) {
  std::size_t count = 0;
  for (std::size_t p = 0; p < n; ++p) {
    double v = h2[p] * u;
    v += h1[p];
    v *= u;
    v += h0[p];
    count += (v <= bound) ? 1 : 0;
  }
  return count;
}

const Ops table{poly_gram_scalar, poly_quadform_scalar, poly_combine_scalar,
                count_quad_le_scalar};

}  // namespace

namespace detail {
const Ops* scalar_ops() { return &table; }
}

}  // namespace mmdcc::simd
