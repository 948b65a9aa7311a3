#pragma once

#include <cstddef>
#include <string_view>

namespace mmdcc::simd {

enum class Backend { scalar, avx2, neon };

// Function table for the data-parallel inner loops shared by the kernel,
// objective and validation code. Entries marked "elementwise" perform the
// same IEEE operation sequence per element in every backend (no FMA), so
// their outputs are bit-identical across backends; the streamed reduction
// in poly_quadform may differ in summation order only.
struct Ops {
  // elementwise: out[i*ny + j] = (scale*xs[i]*ys[j] + offset)^degree
  void (*poly_gram)(const double* xs, std::size_t nx, const double* ys,
                    std::size_t ny, double scale, double offset, int degree,
                    double* out);

  // sum_{i,j} wx[i]*wy[j]*(scale*xs[i]*ys[j] + offset)^degree without
  // materializing the Gram matrix
  double (*poly_quadform)(const double* xs, const double* wx, std::size_t nx,
                          const double* ys, const double* wy, std::size_t ny,
                          double scale, double offset, int degree);

  // elementwise Horner: out[p] = sum_k grids[k][p] * u^k over `terms` grids
  void (*poly_combine)(const double* const* grids, std::size_t terms,
                       std::size_t n, double u, double* out);

  // elementwise predicate count: #{p : h0[p] + u*(h1[p] + u*h2[p]) <= bound}
  std::size_t (*count_quad_le)(const double* h0, const double* h1,
                               const double* h2, std::size_t n, double u,
                               double bound);
};

// Active backend: best available on this CPU, overridable with the
// RKHS_CC_SIMD environment variable (scalar | avx2 | neon).
const Ops& ops();
// Fixed backend (throws std::runtime_error if unavailable on this CPU).
const Ops& ops(Backend b);

bool available(Backend b);
Backend active_backend();
std::string_view backend_name(Backend b);

namespace detail {
const Ops* scalar_ops();
const Ops* avx2_ops();  // nullptr when not compiled in or unsupported
const Ops* neon_ops();  // nullptr when not compiled in
}

}  // namespace mmdcc::simd
