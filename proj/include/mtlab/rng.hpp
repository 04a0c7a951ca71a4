#pragma once

#include <cstdint>

#include "mtlab/surface.hpp"

namespace mtlab {

// Random bandlimited field on the torus: i.i.d. Gaussian Fourier modes with
// 0 < max(|kx|,|ky|) <= bandlimit, rescaled to the requested sup amplitude.
// Deterministic in (mesh, bandlimit, amplitude, seed).
ScalarField random_bandlimited(const SurfaceMesh& mesh, int bandlimit, double amplitude,
                               std::uint64_t seed);

// Random smooth field on either backend: low-order trigonometric (torus) or
// coordinate-polynomial (sphere) combination, same amplitude convention.
ScalarField random_smooth(const SurfaceMesh& mesh, double amplitude, std::uint64_t seed);

}  // namespace mtlab
