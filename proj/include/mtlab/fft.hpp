#pragma once

#include <complex>
#include <vector>

namespace mtlab::fft {

using cplx = std::complex<double>;

// In-place radix-2 FFT, n a power of two. inverse=true applies the 1/n factor.
void transform(cplx* a, std::size_t n, bool inverse);

// 2-D transform of an n*n row-major array.
void transform2d(std::vector<cplx>& a, int n, bool inverse);

// Real n*n grid -> complex spectrum (coefficients scaled like numpy's fft2).
std::vector<cplx> forward2d(const std::vector<double>& grid, int n);

// Complex spectrum -> real part of the inverse transform.
std::vector<double> inverse2d_real(std::vector<cplx> spec, int n);

// Integer frequency for index i on an n-grid: 0..n/2-1, -n/2..-1.
inline int freq(int i, int n) { return i < n / 2 ? i : i - n; }

}  // namespace mtlab::fft
