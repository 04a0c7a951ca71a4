#include "mtlab/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>

#include "mtlab/errors.hpp"
#include "mtlab/fft.hpp"
#include "mtlab/util.hpp"

namespace mtlab {

namespace {

const double kPi = 3.14159265358979323846;

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::uint64_t hash_mesh(Backend backend, int resolution, const std::vector<double>& phi,
                        const std::vector<std::array<double, 3>>& nodes) {
    std::uint64_t h = fnv1a64_init();
    const char tag = backend == Backend::SpectralTorus ? 'T' : 'S';
    h = fnv1a64(h, &tag, 1);
    h = fnv1a64(h, &resolution, sizeof(resolution));
    if (!phi.empty()) h = fnv1a64(h, phi.data(), phi.size() * sizeof(double));
    if (backend == Backend::TriangleMesh && !nodes.empty())
        h = fnv1a64(h, nodes.data(), nodes.size() * sizeof(nodes[0]));
    return h;
}

// Bilinear interpolation of a nodal torus field at an arbitrary point.
double torus_bilerp(const std::vector<double>& v, int n, double x, double y) {
    x -= std::floor(x);
    y -= std::floor(y);
    const double gx = x * n, gy = y * n;
    const int i0 = int(gx) % n, j0 = int(gy) % n;
    const int i1 = (i0 + 1) % n, j1 = (j0 + 1) % n;
    const double fx = gx - std::floor(gx), fy = gy - std::floor(gy);
    const auto at = [&](int i, int j) { return v[std::size_t(i) * n + j]; };
    return (1 - fx) * ((1 - fy) * at(i0, j0) + fy * at(i0, j1)) +
           fx * ((1 - fy) * at(i1, j0) + fy * at(i1, j1));
}

// 16-point Gauss-Legendre nodes/weights on [0,1].
struct GaussRule {
    std::array<double, 16> t, w;
};
const GaussRule& gauss16() {
    static const GaussRule rule = [] {
        // nodes/weights on [-1,1]
        const double x[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                             0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                             0.9445750230732326, 0.9894009349916499};
        const double ww[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                              0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                              0.0622535239386479, 0.0271524594117541};
        GaussRule r;
        for (int k = 0; k < 8; ++k) {
            r.t[2 * k] = 0.5 * (1.0 - x[k]);
            r.t[2 * k + 1] = 0.5 * (1.0 + x[k]);
            r.w[2 * k] = 0.5 * ww[k];
            r.w[2 * k + 1] = 0.5 * ww[k];
        }
        return r;
    }();
    return rule;
}

double min_conformal_factor(const SurfaceMesh& mesh) {
    double m = mesh.conformal_factor.empty() ? 0.0 : mesh.conformal_factor[0];
    for (double p : mesh.conformal_factor) m = std::min(m, p);
    return std::exp(m);
}

bool conformal_factor_is_constant(const SurfaceMesh& mesh, double* value) {
    double lo = mesh.conformal_factor[0], hi = lo;
    for (double p : mesh.conformal_factor) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    *value = lo;
    return hi - lo < 1e-15 * (1.0 + std::abs(lo));
}

// Conformal length of the straight chord from a to a+d (flat coordinates),
// integrated with 16-point Gauss-Legendre over bilinearly interpolated phi_c.
double chord_length(const SurfaceMesh& mesh, double ax, double ay, double dx, double dy) {
    const auto& g = gauss16();
    const int n = mesh.resolution;
    double acc = 0.0;
    for (int k = 0; k < 16; ++k)
        acc += g.w[k] *
               std::exp(torus_bilerp(mesh.conformal_factor, n, ax + g.t[k] * dx, ay + g.t[k] * dy));
    return acc * std::hypot(dx, dy);
}

void torus_polar(const SurfaceMesh& mesh, int y, std::vector<double>& r, std::vector<double>& th) {
    const int N = mesh.node_count();
    r.assign(N, 0.0);
    th.assign(N, 0.0);
    const double px = mesh.nodes[y][0], py = mesh.nodes[y][1];
    double const_phi = 0.0;
    const bool flat_like = conformal_factor_is_constant(mesh, &const_phi);
    const double scale = std::exp(const_phi);
    for (int idx = 0; idx < N; ++idx) {
        double dx = mesh.nodes[idx][0] - px;
        double dy = mesh.nodes[idx][1] - py;
        dx -= std::round(dx);
        dy -= std::round(dy);
        if (flat_like) {
            r[idx] = scale * std::hypot(dx, dy);
            th[idx] = std::atan2(dy, dx);
        } else {
            // nearest image in the metric: scan the 9 candidates
            double best = std::numeric_limits<double>::infinity();
            double best_th = 0.0;
            for (int ox = -1; ox <= 1; ++ox) {
                for (int oy = -1; oy <= 1; ++oy) {
                    const double ex = dx + ox, ey = dy + oy;
                    if (std::abs(ex) > 1.0 || std::abs(ey) > 1.0) continue;
                    const double len = chord_length(mesh, px, py, ex, ey);
                    if (len < best) {
                        best = len;
                        best_th = std::atan2(ey, ex);
                    }
                }
            }
            r[idx] = best;
            th[idx] = best_th;
        }
    }
    r[y] = 0.0;
}

void sphere_polar(const SurfaceMesh& mesh, int y, std::vector<double>& r, std::vector<double>& th) {
    const int N = mesh.node_count();
    r.assign(N, 0.0);
    th.assign(N, 0.0);
    const auto& c = mesh.nodes[y];
    // deterministic tangent basis at y
    std::array<double, 3> e1{};
    if (std::abs(c[2]) < 0.9) {
        e1 = {-c[1], c[0], 0.0};
    } else {
        e1 = {0.0, -c[2], c[1]};
    }
    double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
    for (auto& v : e1) v /= n1;
    const std::array<double, 3> e2{c[1] * e1[2] - c[2] * e1[1], c[2] * e1[0] - c[0] * e1[2],
                                   c[0] * e1[1] - c[1] * e1[0]};
    for (int i = 0; i < N; ++i) {
        const auto& x = mesh.nodes[i];
        const double dp = std::clamp(x[0] * c[0] + x[1] * c[1] + x[2] * c[2], -1.0, 1.0);
        r[i] = std::acos(dp);
        const double a = x[0] * e1[0] + x[1] * e1[1] + x[2] * e1[2];
        const double b = x[0] * e2[0] + x[1] * e2[1] + x[2] * e2[2];
        th[i] = (a == 0.0 && b == 0.0) ? 0.0 : std::atan2(b, a);
    }
    r[y] = 0.0;
}

void check_closed_triangulation(const SurfaceMesh& mesh) {
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            edge_count[{a, b}]++;
        }
    }
    for (const auto& [edge, cnt] : edge_count)
        if (cnt != 2) throw InvalidArgument("triangle mesh is not closed: edge shared by " +
                                            std::to_string(cnt) + " triangles");
    const long V = mesh.node_count();
    const long E = long(edge_count.size());
    const long F = long(mesh.triangles.size());
    const long chi = V - E + F;
    if (chi != 2 && chi != 0)
        throw InvalidArgument("unexpected Euler characteristic " + std::to_string(chi));
}

}  // namespace

double SurfaceMesh::cell_size(int node) const {
    if (backend == Backend::SpectralTorus)
        return std::exp(conformal_factor[std::size_t(node)]) / resolution;
    // lumped area of a roughly equilateral vertex star: a ~ (sqrt(3)/2) e^2
    return std::sqrt(area_weights[std::size_t(node)] * 2.0 / std::sqrt(3.0));
}

SurfaceMesh build_torus(int n, std::vector<double> phi_values) {
    if (!power_of_two(n) || n < 16)
        throw InvalidArgument("build_torus: n must be a power of two, n >= 16");
    if (int(phi_values.size()) != n * n)
        throw InvalidArgument("build_torus: phi_c has wrong length");
    SurfaceMesh mesh;
    mesh.backend = Backend::SpectralTorus;
    mesh.resolution = n;
    mesh.nodes.resize(std::size_t(n) * n);
    mesh.conformal_factor = std::move(phi_values);
    mesh.area_weights.resize(mesh.nodes.size());
    const double cell = 1.0 / (double(n) * double(n));
    double area = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const std::size_t idx = std::size_t(i) * n + j;
            mesh.nodes[idx] = {double(i) / n, double(j) / n, 0.0};
            const double p = mesh.conformal_factor[idx];
            if (!std::isfinite(p)) throw InvalidArgument("build_torus: non-finite phi_c");
            mesh.area_weights[idx] = std::exp(2.0 * p) * cell;
            area += mesh.area_weights[idx];
        }
    }
    mesh.total_area = area;
    mesh.id = hash_mesh(mesh.backend, n, mesh.conformal_factor, mesh.nodes);
    return mesh;
}

SurfaceMesh build_torus(int n, const std::function<double(double, double)>& phi_c) {
    if (!power_of_two(n) || n < 16)
        throw InvalidArgument("build_torus: n must be a power of two, n >= 16");
    std::vector<double> phi(std::size_t(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            phi[std::size_t(i) * n + j] = phi_c(double(i) / n, double(j) / n);
    return build_torus(n, std::move(phi));
}

SurfaceMesh build_icosphere(int level) {
    if (level < 2 || level > 7) throw InvalidArgument("build_icosphere: level must be in [2, 7]");
    // icosahedron
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<std::array<double, 3>> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : verts) {
        const double nn = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        for (auto& c : v) c /= nn;
    }
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
        {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int lev = 0; lev < level; ++lev) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            std::array<double, 3> m{(verts[a][0] + verts[b][0]) / 2, (verts[a][1] + verts[b][1]) / 2,
                                    (verts[a][2] + verts[b][2]) / 2};
            const double nn = std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
            for (auto& c : m) c /= nn;
            verts.push_back(m);
            const int idx = int(verts.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    SurfaceMesh mesh;
    mesh.backend = Backend::TriangleMesh;
    mesh.resolution = level;
    mesh.nodes = std::move(verts);
    mesh.triangles = std::move(faces);
    check_closed_triangulation(mesh);

    const int N = mesh.node_count();
    mesh.area_weights.assign(N, 0.0);
    std::vector<Triplet> trips;
    trips.reserve(mesh.triangles.size() * 12);
    for (const auto& f : mesh.triangles) {
        const auto &A = mesh.nodes[f[0]], &B = mesh.nodes[f[1]], &C = mesh.nodes[f[2]];
        const std::array<double, 3> ab{B[0] - A[0], B[1] - A[1], B[2] - A[2]};
        const std::array<double, 3> ac{C[0] - A[0], C[1] - A[1], C[2] - A[2]};
        const std::array<double, 3> cr{ab[1] * ac[2] - ab[2] * ac[1], ab[2] * ac[0] - ab[0] * ac[2],
                                       ab[0] * ac[1] - ab[1] * ac[0]};
        const double area = 0.5 * std::sqrt(cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]);
        for (int v = 0; v < 3; ++v) mesh.area_weights[f[v]] += area / 3.0;
        // cotangent weights from squared edge lengths
        const auto d2 = [&](int u, int v) {
            const auto &P = mesh.nodes[u], &Q = mesh.nodes[v];
            const double x = P[0] - Q[0], y = P[1] - Q[1], z = P[2] - Q[2];
            return x * x + y * y + z * z;
        };
        const double l2a = d2(f[1], f[2]), l2b = d2(f[2], f[0]), l2c = d2(f[0], f[1]);
        const double cot0 = (l2b + l2c - l2a) / (4.0 * area);  // angle at vertex 0
        const double cot1 = (l2c + l2a - l2b) / (4.0 * area);
        const double cot2 = (l2a + l2b - l2c) / (4.0 * area);
        const auto add_edge = [&](int u, int v, double cot) {
            trips.push_back({u, u, 0.5 * cot});
            trips.push_back({v, v, 0.5 * cot});
            trips.push_back({u, v, -0.5 * cot});
            trips.push_back({v, u, -0.5 * cot});
        };
        add_edge(f[1], f[2], cot0);
        add_edge(f[2], f[0], cot1);
        add_edge(f[0], f[1], cot2);
    }
    mesh.stiffness = csr_from_triplets(N, std::move(trips));
    mesh.total_area = std::accumulate(mesh.area_weights.begin(), mesh.area_weights.end(), 0.0);
    mesh.id = hash_mesh(mesh.backend, level, {}, mesh.nodes);
    return mesh;
}

ScalarField constant_field(const SurfaceMesh& mesh, double c) {
    ScalarField f;
    f.values.assign(std::size_t(mesh.node_count()), c);
    f.mesh_id = mesh.id;
    return f;
}

ScalarField sample(const SurfaceMesh& mesh,
                   const std::function<double(const std::array<double, 3>&)>& f) {
    ScalarField out;
    out.values.resize(std::size_t(mesh.node_count()));
    for (int i = 0; i < mesh.node_count(); ++i) {
        out.values[std::size_t(i)] = f(mesh.nodes[std::size_t(i)]);
        if (!std::isfinite(out.values[std::size_t(i)]))
            throw InvalidArgument("sample: non-finite value at node " + std::to_string(i));
    }
    out.mesh_id = mesh.id;
    return out;
}

void require_bound(const SurfaceMesh& mesh, const ScalarField& f) {
    if (f.mesh_id != mesh.id || int(f.values.size()) != mesh.node_count())
        throw MeshMismatch("field is not bound to this mesh");
}

double integrate(const SurfaceMesh& mesh, const ScalarField& f) {
    require_bound(mesh, f);
    double acc = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) acc += f.values[i] * mesh.area_weights[i];
    return acc;
}

double dirichlet_energy(const SurfaceMesh& mesh, const ScalarField& u) {
    require_bound(mesh, u);
    if (mesh.is_torus()) {
        // conformally invariant: flat-metric energy, by Parseval
        const int n = mesh.resolution;
        auto spec = fft::forward2d(u.values, n);
        const double norm = 1.0 / (double(n) * n);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double ki = fft::freq(i, n);
            for (int j = 0; j < n; ++j) {
                const double kj = fft::freq(j, n);
                acc += (ki * ki + kj * kj) * std::norm(spec[std::size_t(i) * n + j] * norm);
            }
        }
        return 4.0 * kPi * kPi * acc;
    }
    std::vector<double> Su(u.values.size());
    mesh.stiffness.multiply(u.values.data(), Su.data());
    double acc = 0.0;
    for (std::size_t i = 0; i < Su.size(); ++i) acc += u.values[i] * Su[i];
    return std::max(acc, 0.0);
}

ScalarField apply_laplacian(const SurfaceMesh& mesh, const ScalarField& u) {
    require_bound(mesh, u);
    ScalarField out = constant_field(mesh, 0.0);
    if (mesh.is_torus()) {
        const int n = mesh.resolution;
        auto spec = fft::forward2d(u.values, n);
        for (int i = 0; i < n; ++i) {
            const double ki = fft::freq(i, n);
            for (int j = 0; j < n; ++j) {
                const double kj = fft::freq(j, n);
                spec[std::size_t(i) * n + j] *= -4.0 * kPi * kPi * (ki * ki + kj * kj);
            }
        }
        out.values = fft::inverse2d_real(std::move(spec), n);
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] *= std::exp(-2.0 * mesh.conformal_factor[i]);
        return out;
    }
    std::vector<double> Su(u.values.size());
    mesh.stiffness.multiply(u.values.data(), Su.data());
    for (std::size_t i = 0; i < Su.size(); ++i) out.values[i] = -Su[i] / mesh.area_weights[i];
    return out;
}

ScalarField solve_poisson(const SurfaceMesh& mesh, const ScalarField& f, const ScalarField& psi) {
    require_bound(mesh, f);
    require_bound(mesh, psi);
    const double mean_f = integrate(mesh, f);
    double f_l2 = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        f_l2 += f.values[i] * f.values[i] * mesh.area_weights[i];
    f_l2 = std::sqrt(f_l2);
    if (std::abs(mean_f) > 1e-10 * std::max(f_l2, 1e-300))
        throw IncompatibleRhs("solve_poisson: right-hand side has nonzero mean");
    const double psi_int = integrate(mesh, psi);
    double psi_l1 = 0.0;
    for (std::size_t i = 0; i < psi.values.size(); ++i)
        psi_l1 += std::abs(psi.values[i]) * mesh.area_weights[i];
    if (std::abs(psi_int) <= 1e-10 * psi_l1)
        throw InvalidWeight("solve_poisson: weight has zero integral");

    ScalarField u = constant_field(mesh, 0.0);
    if (mesh.is_torus()) {
        const int n = mesh.resolution;
        // Delta_g u = f  <=>  Delta_flat u = e^{2 phi} f
        std::vector<double> g(f.values.size());
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = f.values[i] * std::exp(2.0 * mesh.conformal_factor[i]);
        double gm = 0.0;
        for (double v : g) gm += v;
        gm /= double(g.size());
        for (double& v : g) v -= gm;
        auto spec = fft::forward2d(g, n);
        for (int i = 0; i < n; ++i) {
            const double ki = fft::freq(i, n);
            for (int j = 0; j < n; ++j) {
                const double kj = fft::freq(j, n);
                const double lam = -4.0 * kPi * kPi * (ki * ki + kj * kj);
                spec[std::size_t(i) * n + j] = lam == 0.0 ? 0.0 : spec[std::size_t(i) * n + j] / lam;
            }
        }
        u.values = fft::inverse2d_real(std::move(spec), n);
    } else {
        // S u = -M f on the complement of constants
        const int N = mesh.node_count();
        std::vector<double> b(std::size_t(N), 0.0);
        for (int i = 0; i < N; ++i)
            b[std::size_t(i)] = -mesh.area_weights[std::size_t(i)] * f.values[std::size_t(i)];
        double bm = std::accumulate(b.begin(), b.end(), 0.0) / N;
        for (double& v : b) v -= bm;
        std::vector<double> diag(std::size_t(N), 1.0);
        for (int i = 0; i < N; ++i)
            for (int k = mesh.stiffness.row_ptr[i]; k < mesh.stiffness.row_ptr[i + 1]; ++k)
                if (mesh.stiffness.col[k] == i) diag[std::size_t(i)] = mesh.stiffness.val[k];
        auto apply_A = [&](const double* x, double* y) { mesh.stiffness.multiply(x, y); };
        auto apply_M = [&](const double* x, double* y) {
            for (int i = 0; i < N; ++i) y[i] = x[i] / diag[std::size_t(i)];
        };
        pcg(apply_A, apply_M, b, u.values, 1e-13, 20000);
        // remove the kernel component picked up along the way
        double um = std::accumulate(u.values.begin(), u.values.end(), 0.0) / N;
        for (double& v : u.values) v -= um;
    }
    double psi_u = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        psi_u += psi.values[i] * u.values[i] * mesh.area_weights[i];
    const double corr = psi_u / psi_int;
    for (double& v : u.values) v -= corr;
    return u;
}

ScalarField gaussian_curvature(const SurfaceMesh& mesh) {
    ScalarField K = constant_field(mesh, 0.0);
    if (mesh.is_torus()) {
        const int n = mesh.resolution;
        auto spec = fft::forward2d(mesh.conformal_factor, n);
        for (int i = 0; i < n; ++i) {
            const double ki = fft::freq(i, n);
            for (int j = 0; j < n; ++j) {
                const double kj = fft::freq(j, n);
                spec[std::size_t(i) * n + j] *= -4.0 * kPi * kPi * (ki * ki + kj * kj);
            }
        }
        auto lap_phi = fft::inverse2d_real(std::move(spec), n);
        for (std::size_t i = 0; i < K.values.size(); ++i)
            K.values[i] = -std::exp(-2.0 * mesh.conformal_factor[i]) * lap_phi[i];
        return K;
    }
    const int N = mesh.node_count();
    std::vector<double> angle_sum(std::size_t(N), 0.0);
    for (const auto& f : mesh.triangles) {
        for (int v = 0; v < 3; ++v) {
            const auto &P = mesh.nodes[f[v]], &Q = mesh.nodes[f[(v + 1) % 3]],
                       &R = mesh.nodes[f[(v + 2) % 3]];
            const std::array<double, 3> a{Q[0] - P[0], Q[1] - P[1], Q[2] - P[2]};
            const std::array<double, 3> b{R[0] - P[0], R[1] - P[1], R[2] - P[2]};
            const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            const std::array<double, 3> cr{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                                           a[0] * b[1] - a[1] * b[0]};
            const double cl = std::sqrt(cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]);
            angle_sum[f[v]] += std::atan2(cl, dot);
        }
    }
    for (int i = 0; i < N; ++i)
        K.values[std::size_t(i)] = (2.0 * kPi - angle_sum[std::size_t(i)]) /
                                   mesh.area_weights[std::size_t(i)];
    return K;
}

double chart_limit(const SurfaceMesh& mesh) {
    if (mesh.is_torus()) return 0.5 * min_conformal_factor(mesh);
    return kPi / 2.0;
}

double polar_map_limit(const SurfaceMesh& mesh) {
    if (mesh.is_torus()) return 0.70 * min_conformal_factor(mesh);
    return kPi - 0.2;
}

NormalChart normal_chart(const SurfaceMesh& mesh, int y, double r_max) {
    if (y < 0 || y >= mesh.node_count()) throw InvalidArgument("normal_chart: bad center node");
    if (!(r_max > 0.0) || r_max >= chart_limit(mesh))
        throw InvalidArgument("normal_chart: r_max outside (0, injectivity proxy)");
    NormalChart chart;
    chart.center = y;
    chart.r_max = r_max;
    if (mesh.is_torus())
        torus_polar(mesh, y, chart.r, chart.theta);
    else
        sphere_polar(mesh, y, chart.r, chart.theta);
    chart.valid.resize(chart.r.size());
    for (std::size_t i = 0; i < chart.r.size(); ++i) chart.valid[i] = chart.r[i] <= r_max ? 1 : 0;
    return chart;
}

NormalChart polar_map(const SurfaceMesh& mesh, int y) {
    if (y < 0 || y >= mesh.node_count()) throw InvalidArgument("polar_map: bad center node");
    NormalChart chart;
    chart.center = y;
    chart.r_max = polar_map_limit(mesh);
    if (mesh.is_torus())
        torus_polar(mesh, y, chart.r, chart.theta);
    else
        sphere_polar(mesh, y, chart.r, chart.theta);
    chart.valid.assign(chart.r.size(), 1);
    return chart;
}

LocalJet local_jet(const SurfaceMesh& mesh, const ScalarField& f, int p) {
    require_bound(mesh, f);
    const double cell = mesh.cell_size(p);
    const double radius = 6.0 * cell;
    const double sigma = 2.0 * cell;
    NormalChart chart = normal_chart(mesh, p, std::min(radius * 1.001, chart_limit(mesh) * 0.999));

    // quartic weighted LS in sigma-scaled chart coordinates; the 2-jet is read
    // off the low-order coefficients (a plain quadratic fit would carry an
    // O(sigma^2 f'''') bias visible at the spec'd tolerances)
    constexpr int kBasis = 15;
    std::vector<int> idx;
    for (int i = 0; i < mesh.node_count(); ++i)
        if (chart.valid[std::size_t(i)] && chart.r[std::size_t(i)] <= radius) idx.push_back(i);
    if (int(idx.size()) < 2 * kBasis) throw FitError("local_jet: degenerate stencil");

    double ata[kBasis][kBasis] = {};
    double atb[kBasis] = {};
    for (int node : idx) {
        const double r = chart.r[std::size_t(node)];
        const double t = chart.theta[std::size_t(node)];
        const double X = r * std::cos(t) / sigma, Y = r * std::sin(t) / sigma;
        const double w = std::exp(-0.5 * (r / sigma) * (r / sigma));
        const double row[kBasis] = {1.0,   X,     Y,         X * X, X * Y, Y * Y,
                                    X * X * X, X * X * Y, X * Y * Y, Y * Y * Y,
                                    X * X * X * X, X * X * X * Y, X * X * Y * Y,
                                    X * Y * Y * Y, Y * Y * Y * Y};
        const double val = f.values[std::size_t(node)];
        for (int a = 0; a < kBasis; ++a) {
            for (int b = a; b < kBasis; ++b) ata[a][b] += w * row[a] * row[b];
            atb[a] += w * row[a] * val;
        }
    }
    for (int a = 0; a < kBasis; ++a)
        for (int b = 0; b < a; ++b) ata[a][b] = ata[b][a];

    // dense solve with partial pivoting
    for (int c = 0; c < kBasis; ++c) {
        int piv = c;
        for (int rrow = c + 1; rrow < kBasis; ++rrow)
            if (std::abs(ata[rrow][c]) > std::abs(ata[piv][c])) piv = rrow;
        if (std::abs(ata[piv][c]) < 1e-13) throw FitError("local_jet: singular normal equations");
        if (piv != c) {
            for (int k = 0; k < kBasis; ++k) std::swap(ata[c][k], ata[piv][k]);
            std::swap(atb[c], atb[piv]);
        }
        for (int rrow = c + 1; rrow < kBasis; ++rrow) {
            const double m = ata[rrow][c] / ata[c][c];
            for (int k = c; k < kBasis; ++k) ata[rrow][k] -= m * ata[c][k];
            atb[rrow] -= m * atb[c];
        }
    }
    double coef[kBasis];
    for (int rrow = kBasis - 1; rrow >= 0; --rrow) {
        double acc = atb[rrow];
        for (int k = rrow + 1; k < kBasis; ++k) acc -= ata[rrow][k] * coef[k];
        coef[rrow] = acc / ata[rrow][rrow];
    }

    LocalJet jet;
    jet.center = p;
    jet.value = coef[0];
    jet.grad = {coef[1] / sigma, coef[2] / sigma};
    jet.hessian = {{{2.0 * coef[3] / (sigma * sigma), coef[4] / (sigma * sigma)},
                    {coef[4] / (sigma * sigma), 2.0 * coef[5] / (sigma * sigma)}}};
    jet.laplacian = jet.hessian[0][0] + jet.hessian[1][1];
    return jet;
}

void torus_flat_partials(const SurfaceMesh& mesh, const ScalarField& u, std::vector<double>& ux,
                         std::vector<double>& uy) {
    if (!mesh.is_torus()) throw InvalidArgument("torus_flat_partials: torus backend only");
    require_bound(mesh, u);
    const int n = mesh.resolution;
    auto spec = fft::forward2d(u.values, n);
    auto dx = spec;
    auto dy = std::move(spec);
    for (int i = 0; i < n; ++i) {
        const double ki = fft::freq(i, n);
        for (int j = 0; j < n; ++j) {
            const double kj = fft::freq(j, n);
            const std::size_t idx = std::size_t(i) * n + j;
            // drop the unmatched Nyquist mode: its derivative alias is zero
            const double fi = (i == n / 2) ? 0.0 : ki;
            const double fj = (j == n / 2) ? 0.0 : kj;
            const fft::cplx w = dx[idx];
            dx[idx] = fft::cplx(0.0, 2.0 * kPi * fi) * w;
            dy[idx] = fft::cplx(0.0, 2.0 * kPi * fj) * w;
        }
    }
    ux = fft::inverse2d_real(std::move(dx), n);
    uy = fft::inverse2d_real(std::move(dy), n);
}

GradientSamples gradient_samples(const SurfaceMesh& mesh, const ScalarField& u) {
    require_bound(mesh, u);
    GradientSamples g;
    if (mesh.is_torus()) {
        std::vector<double> ux, uy;
        torus_flat_partials(mesh, u, ux, uy);
        g.magnitude.resize(ux.size());
        g.weight = mesh.area_weights;
        for (std::size_t i = 0; i < ux.size(); ++i)
            g.magnitude[i] = std::exp(-mesh.conformal_factor[i]) * std::hypot(ux[i], uy[i]);
        return g;
    }
    g.magnitude.reserve(mesh.triangles.size());
    g.weight.reserve(mesh.triangles.size());
    for (const auto& f : mesh.triangles) {
        const auto &A = mesh.nodes[f[0]], &B = mesh.nodes[f[1]], &C = mesh.nodes[f[2]];
        const std::array<double, 3> ab{B[0] - A[0], B[1] - A[1], B[2] - A[2]};
        const std::array<double, 3> ac{C[0] - A[0], C[1] - A[1], C[2] - A[2]};
        const std::array<double, 3> nrm{ab[1] * ac[2] - ab[2] * ac[1],
                                        ab[2] * ac[0] - ab[0] * ac[2],
                                        ab[0] * ac[1] - ab[1] * ac[0]};
        const double two_area = std::sqrt(nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2]);
        const double area = 0.5 * two_area;
        // P1 gradient: sum u_i (n x e_i) / (2A), e_i the opposite edge
        std::array<double, 3> grad{0.0, 0.0, 0.0};
        const std::array<std::array<double, 3>, 3> edges{{{C[0] - B[0], C[1] - B[1], C[2] - B[2]},
                                                          {A[0] - C[0], A[1] - C[1], A[2] - C[2]},
                                                          {B[0] - A[0], B[1] - A[1], B[2] - A[2]}}};
        for (int v = 0; v < 3; ++v) {
            const auto& e = edges[std::size_t(v)];
            const std::array<double, 3> cr{(nrm[1] * e[2] - nrm[2] * e[1]) / two_area,
                                           (nrm[2] * e[0] - nrm[0] * e[2]) / two_area,
                                           (nrm[0] * e[1] - nrm[1] * e[0]) / two_area};
            for (int k = 0; k < 3; ++k) grad[k] += u.values[f[v]] * cr[k] / (2.0 * area);
        }
        g.magnitude.push_back(std::sqrt(grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2]));
        g.weight.push_back(area);
    }
    return g;
}

}  // namespace mtlab
