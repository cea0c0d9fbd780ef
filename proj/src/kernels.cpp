#include "nlslab/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nlslab::kernels {

namespace {

inline void row_dot(const double* row, std::size_t cols, const double* xr, const double* xi,
                    double& out_r, double& out_i) {
  double sr = 0.0;
  double si = 0.0;
#pragma omp simd reduction(+ : sr, si)
  for (std::size_t j = 0; j < cols; ++j) {
    sr += row[j] * xr[j];
    si += row[j] * xi[j];
  }
  out_r = sr;
  out_i = si;
}

// Four rows share each load of x.
inline void row_dot4(const double* a, std::size_t cols, const double* xr, const double* xi,
                     double* yr, double* yi) {
  const double* a0 = a;
  const double* a1 = a + cols;
  const double* a2 = a + 2 * cols;
  const double* a3 = a + 3 * cols;
  double r0 = 0, r1 = 0, r2 = 0, r3 = 0, i0 = 0, i1 = 0, i2 = 0, i3 = 0;
#pragma omp simd reduction(+ : r0, r1, r2, r3, i0, i1, i2, i3)
  for (std::size_t j = 0; j < cols; ++j) {
    const double x = xr[j], y = xi[j];
    r0 += a0[j] * x;
    i0 += a0[j] * y;
    r1 += a1[j] * x;
    i1 += a1[j] * y;
    r2 += a2[j] * x;
    i2 += a2[j] * y;
    r3 += a3[j] * x;
    i3 += a3[j] * y;
  }
  yr[0] = r0, yr[1] = r1, yr[2] = r2, yr[3] = r3;
  yi[0] = i0, yi[1] = i1, yi[2] = i2, yi[3] = i3;
}

inline void row_block(const double* a, std::size_t rows, std::size_t cols, std::size_t block,
                      const double* xr, const double* xi, double* yr, double* yi) {
  const std::size_t i = block * 4;
  if (i + 4 <= rows) {
    row_dot4(a + i * cols, cols, xr, xi, yr + i, yi + i);
  } else {
    for (std::size_t k = i; k < rows; ++k) row_dot(a + k * cols, cols, xr, xi, yr[k], yi[k]);
  }
}

inline std::complex<double> rotate(std::complex<double> z, double p, double coef) {
  const double m = std::abs(z);
  if (m == 0.0) return z;
  const double theta = -coef * (p == 2.0 ? m : std::pow(m, p - 1.0));
  return z * std::complex<double>(std::cos(theta), std::sin(theta));
}

}  // namespace

void matvec(const double* a, std::size_t rows, std::size_t cols, const double* xr,
            const double* xi, double* yr, double* yi) {
  const auto blocks = static_cast<std::ptrdiff_t>((rows + 3) / 4);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b)
    row_block(a, rows, cols, static_cast<std::size_t>(b), xr, xi, yr, yi);
}

void matvec_serial(const double* a, std::size_t rows, std::size_t cols, const double* xr,
                   const double* xi, double* yr, double* yi) {
  const std::size_t blocks = (rows + 3) / 4;
  for (std::size_t b = 0; b < blocks; ++b) row_block(a, rows, cols, b, xr, xi, yr, yi);
}

void phase_rotate(std::complex<double>* u, std::size_t n, double p, double coef) {
  const auto m = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) u[i] = rotate(u[i], p, coef);
}

void phase_rotate_serial(std::complex<double>* u, std::size_t n, double p, double coef) {
  for (std::size_t i = 0; i < n; ++i) u[i] = rotate(u[i], p, coef);
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace nlslab::kernels
