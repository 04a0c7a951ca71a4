#pragma once

#include <iosfwd>
#include <vector>

#include "mtlab/surface.hpp"

namespace mtlab {

// Constants of the normal-coordinate expansion
//   G_y = -4 log r + A + b1 r cos(t) + b2 r sin(t)
//         + c1 r^2 cos^2(t) + 2 c2 r^2 cos(t) sin(t) + c3 r^2 sin^2(t) + ...
// fitted on an annulus around the pole; fit_rms certifies the fit quality.
struct GreenExpansion {
    int pole = 0;
    double A = 0.0;
    std::array<double, 2> b{0.0, 0.0};
    std::array<double, 3> c{0.0, 0.0, 0.0};
    double fit_rms = 0.0;
    double r_in = 0.0;
    double r_out = 0.0;
};

// Weighted Green function: Delta_g G = 8 pi (psi/int psi - delta_y^h),
// normalized by int psi G dv_g = 0.
ScalarField solve_green(const SurfaceMesh& mesh, const ScalarField& psi, int y);

GreenExpansion fit_expansion(const SurfaceMesh& mesh, const ScalarField& G, int y, double r_in,
                             double r_out);
// Default annulus (6, 24) mesh cells around the pole.
GreenExpansion fit_expansion(const SurfaceMesh& mesh, const ScalarField& G, int y);

struct RobinSample {
    int node = 0;
    double h = 0.0;
    double A = 0.0;
    double two_log_h_plus_A = 0.0;
    bool in_Z = false;
};

struct RobinField {
    std::vector<RobinSample> samples;
    int argmax_node = -1;
    double max_value = 0.0;
};

// One Green solve + expansion fit per sample node; nodes with h <= h_zero_tol
// form the excluded set Z. threads <= 1 runs serially.
RobinField robin_field(const SurfaceMesh& mesh, const ScalarField& psi, const ScalarField& h,
                       const std::vector<int>& sample_nodes, double h_zero_tol, int threads = 1);

// Default sampling: 8x8 coordinate grid on the torus, coarse face centers'
// nearest vertices on the icosphere.
std::vector<int> default_robin_samples(const SurfaceMesh& mesh);

void write_robin_csv(std::ostream& os, const SurfaceMesh& mesh, const RobinField& rf);

}  // namespace mtlab
