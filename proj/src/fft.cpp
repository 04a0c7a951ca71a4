#include "mtlab/fft.hpp"

#include <cmath>

#include "mtlab/errors.hpp"

namespace mtlab::fft {

namespace {

const double kPi = 3.14159265358979323846;

void bit_reverse(cplx* a, std::size_t n) {
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
}

}  // namespace

void transform(cplx* a, std::size_t n, bool inverse) {
    if (n == 0 || (n & (n - 1)) != 0) throw InvalidArgument("fft: length must be a power of two");
    bit_reverse(a, n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / double(len) * (inverse ? 1.0 : -1.0);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / double(n);
        for (std::size_t i = 0; i < n; ++i) a[i] *= inv;
    }
}

void transform2d(std::vector<cplx>& a, int n, bool inverse) {
    const std::size_t nn = std::size_t(n) * std::size_t(n);
    if (a.size() != nn) throw InvalidArgument("fft: 2d buffer size mismatch");
    for (int row = 0; row < n; ++row) transform(a.data() + std::size_t(row) * n, n, inverse);
    std::vector<cplx> col(n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) col[i] = a[std::size_t(i) * n + j];
        transform(col.data(), n, inverse);
        for (int i = 0; i < n; ++i) a[std::size_t(i) * n + j] = col[i];
    }
}

std::vector<cplx> forward2d(const std::vector<double>& grid, int n) {
    std::vector<cplx> a(grid.begin(), grid.end());
    transform2d(a, n, false);
    return a;
}

std::vector<double> inverse2d_real(std::vector<cplx> spec, int n) {
    transform2d(spec, n, true);
    std::vector<double> out(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) out[i] = spec[i].real();
    return out;
}

}  // namespace mtlab::fft
