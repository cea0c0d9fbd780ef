#pragma once

#include <complex>
#include <cstddef>

// Dense inner loops. Each kernel has an OpenMP version and a serial reference
// with the same per-row arithmetic, so the two agree bit for bit.
namespace nlslab::kernels {

// y = A x, A dense row-major (rows x cols), x and y split into re/im arrays.
void matvec(const double* a, std::size_t rows, std::size_t cols, const double* xr,
            const double* xi, double* yr, double* yi);
void matvec_serial(const double* a, std::size_t rows, std::size_t cols, const double* xr,
                   const double* xi, double* yr, double* yi);

// u <- u * exp(-i * coef * |u|^(p-1)), the exact flow of i u_t = coef |u|^(p-1) u.
void phase_rotate(std::complex<double>* u, std::size_t n, double p, double coef);
void phase_rotate_serial(std::complex<double>* u, std::size_t n, double p, double coef);

int max_threads();

}  // namespace nlslab::kernels
