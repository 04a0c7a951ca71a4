#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "mtlab/sparse.hpp"

namespace mtlab {

enum class Backend { SpectralTorus, TriangleMesh };

// A discretized closed surface. Immutable after construction; safe to share
// read-only across threads.
struct SurfaceMesh {
    Backend backend{};
    int resolution = 0;  // grid size n (torus) or subdivision level (icosphere)
    std::vector<std::array<double, 3>> nodes;  // torus: (x, y, 0) in [0,1)^2
    std::vector<double> conformal_factor;      // torus only; g = e^{2 phi}(dx^2+dy^2)
    std::vector<double> area_weights;          // dv_g quadrature weights
    double total_area = 0.0;
    std::uint64_t id = 0;

    // triangle backend only
    std::vector<std::array<int, 3>> triangles;
    CsrMatrix stiffness;  // cotangent stiffness, u^T S u = Dirichlet energy

    int node_count() const { return int(nodes.size()); }
    // Metric size of one mesh cell near a node (used for stencil/annulus radii).
    double cell_size(int node) const;
    bool is_torus() const { return backend == Backend::SpectralTorus; }
};

struct ScalarField {
    std::vector<double> values;
    std::uint64_t mesh_id = 0;

    double& operator[](int i) { return values[std::size_t(i)]; }
    double operator[](int i) const { return values[std::size_t(i)]; }
};

SurfaceMesh build_torus(int n, const std::function<double(double, double)>& phi_c);
SurfaceMesh build_torus(int n, std::vector<double> phi_values);
SurfaceMesh build_icosphere(int level);

ScalarField constant_field(const SurfaceMesh& mesh, double c);
ScalarField sample(const SurfaceMesh& mesh,
                   const std::function<double(const std::array<double, 3>&)>& f);
void require_bound(const SurfaceMesh& mesh, const ScalarField& f);

// int_Sigma f dv_g
double integrate(const SurfaceMesh& mesh, const ScalarField& f);

// int_Sigma |grad_g u|^2 dv_g (without the 1/2)
double dirichlet_energy(const SurfaceMesh& mesh, const ScalarField& u);

// Laplace-Beltrami, geometer's convention: Delta cos(2 pi x) = -4 pi^2 cos(2 pi x).
ScalarField apply_laplacian(const SurfaceMesh& mesh, const ScalarField& u);

// Solve Delta_g u = f with the normalization int psi u dv_g = 0.
ScalarField solve_poisson(const SurfaceMesh& mesh, const ScalarField& f, const ScalarField& psi);

ScalarField gaussian_curvature(const SurfaceMesh& mesh);

// Geodesic polar coordinates around a node.
struct NormalChart {
    int center = 0;
    double r_max = 0.0;
    std::vector<double> r;
    std::vector<double> theta;
    std::vector<std::uint8_t> valid;
};

// Injectivity-radius proxy limiting normal_chart.
double chart_limit(const SurfaceMesh& mesh);
// Radius to which the global polar map stays usable (beyond the injectivity
// proxy on the torus; the map is well defined off the cut locus).
double polar_map_limit(const SurfaceMesh& mesh);

NormalChart normal_chart(const SurfaceMesh& mesh, int y, double r_max);
// Full-surface polar map (no validity radius); used by blowup constructions.
NormalChart polar_map(const SurfaceMesh& mesh, int y);

// Second-order data of a field at a node, in normal-chart coordinates.
struct LocalJet {
    int center = 0;
    double value = 0.0;
    std::array<double, 2> grad{0.0, 0.0};
    std::array<std::array<double, 2>, 2> hessian{{{0.0, 0.0}, {0.0, 0.0}}};
    double laplacian = 0.0;
};

LocalJet local_jet(const SurfaceMesh& mesh, const ScalarField& f, int p);

// Metric gradient magnitudes with their quadrature weights: per node on the
// torus (spectral partials), per triangle on the triangle backend (P1).
struct GradientSamples {
    std::vector<double> magnitude;
    std::vector<double> weight;
};
GradientSamples gradient_samples(const SurfaceMesh& mesh, const ScalarField& u);

// Spectral partial derivatives in the flat coordinates (torus backend only).
void torus_flat_partials(const SurfaceMesh& mesh, const ScalarField& u, std::vector<double>& ux,
                         std::vector<double>& uy);

}  // namespace mtlab
