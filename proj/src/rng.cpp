#include "mtlab/rng.hpp"

#include <cmath>
#include <random>

#include "mtlab/errors.hpp"
#include "mtlab/fft.hpp"

namespace mtlab {

ScalarField random_bandlimited(const SurfaceMesh& mesh, int bandlimit, double amplitude,
                               std::uint64_t seed) {
    if (!mesh.is_torus()) throw InvalidArgument("random_bandlimited: torus backend only");
    if (bandlimit < 1 || bandlimit >= mesh.resolution / 2)
        throw InvalidArgument("random_bandlimited: bandlimit out of range");
    const int n = mesh.resolution;
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<fft::cplx> spec(std::size_t(n) * n, fft::cplx(0.0, 0.0));
    // fill modes in a fixed (kx, ky) order; conjugate symmetry gives a real field
    for (int kx = -bandlimit; kx <= bandlimit; ++kx) {
        for (int ky = -bandlimit; ky <= bandlimit; ++ky) {
            if (kx == 0 && ky == 0) continue;
            if (kx < 0 || (kx == 0 && ky < 0)) continue;  // half-plane; mirror below
            const double re = gauss(gen), im = gauss(gen);
            const int i = (kx + n) % n, j = (ky + n) % n;
            const int mi = (n - kx) % n, mj = (n - ky + n) % n;
            spec[std::size_t(i) * n + j] = fft::cplx(re, im);
            spec[std::size_t(mi) * n + mj] = fft::cplx(re, -im);
        }
    }
    ScalarField u;
    u.values = fft::inverse2d_real(std::move(spec), n);
    u.mesh_id = mesh.id;
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::abs(v));
    if (m > 0.0)
        for (double& v : u.values) v *= amplitude / m;
    return u;
}

ScalarField random_smooth(const SurfaceMesh& mesh, double amplitude, std::uint64_t seed) {
    if (mesh.is_torus()) return random_bandlimited(mesh, 4, amplitude, seed);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // random quadratic polynomial in the ambient coordinates
    double c[9];
    for (double& v : c) v = gauss(gen);
    ScalarField u = sample(mesh, [&](const std::array<double, 3>& x) {
        return c[0] * x[0] + c[1] * x[1] + c[2] * x[2] + c[3] * x[0] * x[1] + c[4] * x[1] * x[2] +
               c[5] * x[0] * x[2] + c[6] * x[0] * x[0] + c[7] * x[1] * x[1] + c[8] * x[2] * x[2];
    });
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::abs(v));
    if (m > 0.0)
        for (double& v : u.values) v *= amplitude / m;
    return u;
}

}  // namespace mtlab
