#pragma once

#include <complex>
#include <cstddef>

namespace mmf::detail {

using Complex = std::complex<double>;

// Batched real transforms backed by FFTW. Plans are created once per shape
// (FFTW_ESTIMATE, unaligned) and executed through the thread-safe new-array
// interface.
//
// 2D: `batch` interleaved fields; element (i, j, b) lives at
// (i * ny + j) * batch + b, coefficient (i, jk, b) at (i * (ny/2+1) + jk) * batch + b.
void forward_2d(int nx, int ny, int batch, const double* in, Complex* out);
void inverse_2d(int nx, int ny, int batch, const Complex* in, double* out);

// 1D: `count` contiguous blocks of n reals <-> n/2+1 coefficients.
void forward_1d(int n, std::size_t count, const double* in, Complex* out);
void inverse_1d(int n, std::size_t count, const Complex* in, double* out);

}  // namespace mmf::detail
