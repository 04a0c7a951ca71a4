#include "mtlab/green.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include "mtlab/errors.hpp"
#include "mtlab/util.hpp"

namespace mtlab {

namespace {

const double kPi = 3.14159265358979323846;

}  // namespace

ScalarField solve_green(const SurfaceMesh& mesh, const ScalarField& psi, int y) {
    require_bound(mesh, psi);
    if (y < 0 || y >= mesh.node_count()) throw InvalidArgument("solve_green: bad pole node");
    const double psi_int = integrate(mesh, psi);
    double psi_l1 = 0.0;
    for (std::size_t i = 0; i < psi.values.size(); ++i)
        psi_l1 += std::abs(psi.values[i]) * mesh.area_weights[i];
    if (std::abs(psi_int) <= 1e-10 * psi_l1)
        throw InvalidWeight("solve_green: int psi dv_g = 0");

    ScalarField rhs = constant_field(mesh, 0.0);
    for (std::size_t i = 0; i < rhs.values.size(); ++i)
        rhs.values[i] = 8.0 * kPi * psi.values[i] / psi_int;
    // nodal delta, quadrature-dual of delta_y
    rhs.values[std::size_t(y)] -= 8.0 * kPi / mesh.area_weights[std::size_t(y)];
    // mean correction restores exact compatibility under floating error
    const double excess = integrate(mesh, rhs) / mesh.total_area;
    for (double& v : rhs.values) v -= excess;
    return solve_poisson(mesh, rhs, psi);
}

GreenExpansion fit_expansion(const SurfaceMesh& mesh, const ScalarField& G, int y, double r_in,
                             double r_out) {
    require_bound(mesh, G);
    const double cell = mesh.cell_size(y);
    if (r_in < 4.0 * cell) throw InvalidArgument("fit_expansion: r_in below 4 mesh cells");
    if (!(r_out > r_in)) throw InvalidArgument("fit_expansion: empty annulus");
    if (r_out >= chart_limit(mesh)) throw InvalidArgument("fit_expansion: r_out beyond chart");
    NormalChart chart = normal_chart(mesh, y, r_out);

    std::vector<int> idx;
    for (int i = 0; i < mesh.node_count(); ++i) {
        const double r = chart.r[std::size_t(i)];
        if (r >= r_in && r <= r_out) idx.push_back(i);
    }
    if (int(idx.size()) < 50) throw FitError("fit_expansion: fewer than 50 annulus nodes");

    constexpr int kBasis = 6;
    double ata[kBasis][kBasis] = {};
    double atb[kBasis] = {};
    for (int node : idx) {
        const double r = chart.r[std::size_t(node)];
        const double t = chart.theta[std::size_t(node)];
        const double ct = std::cos(t), st = std::sin(t);
        const double row[kBasis] = {1.0,          r * ct,          r * st,
                                    r * r * ct * ct, 2.0 * r * r * ct * st, r * r * st * st};
        const double target = G.values[std::size_t(node)] + 4.0 * std::log(r);
        for (int a = 0; a < kBasis; ++a) {
            for (int b = a; b < kBasis; ++b) ata[a][b] += row[a] * row[b];
            atb[a] += row[a] * target;
        }
    }
    for (int a = 0; a < kBasis; ++a)
        for (int b = 0; b < a; ++b) ata[a][b] = ata[b][a];
    // Cholesky-free small solve
    double mat[kBasis][kBasis];
    double rhs[kBasis];
    std::copy(&ata[0][0], &ata[0][0] + kBasis * kBasis, &mat[0][0]);
    std::copy(atb, atb + kBasis, rhs);
    for (int c = 0; c < kBasis; ++c) {
        int piv = c;
        for (int r2 = c + 1; r2 < kBasis; ++r2)
            if (std::abs(mat[r2][c]) > std::abs(mat[piv][c])) piv = r2;
        if (std::abs(mat[piv][c]) < 1e-14) throw FitError("fit_expansion: singular basis");
        if (piv != c) {
            for (int k = 0; k < kBasis; ++k) std::swap(mat[c][k], mat[piv][k]);
            std::swap(rhs[c], rhs[piv]);
        }
        for (int r2 = c + 1; r2 < kBasis; ++r2) {
            const double m = mat[r2][c] / mat[c][c];
            for (int k = c; k < kBasis; ++k) mat[r2][k] -= m * mat[c][k];
            rhs[r2] -= m * rhs[c];
        }
    }
    double coef[kBasis];
    for (int r2 = kBasis - 1; r2 >= 0; --r2) {
        double acc = rhs[r2];
        for (int k = r2 + 1; k < kBasis; ++k) acc -= mat[r2][k] * coef[k];
        coef[r2] = acc / mat[r2][r2];
    }

    double ss = 0.0;
    for (int node : idx) {
        const double r = chart.r[std::size_t(node)];
        const double t = chart.theta[std::size_t(node)];
        const double ct = std::cos(t), st = std::sin(t);
        const double fitted = coef[0] + coef[1] * r * ct + coef[2] * r * st +
                              coef[3] * r * r * ct * ct + coef[4] * 2.0 * r * r * ct * st +
                              coef[5] * r * r * st * st;
        const double resid = G.values[std::size_t(node)] + 4.0 * std::log(r) - fitted;
        ss += resid * resid;
    }
    GreenExpansion exp;
    exp.pole = y;
    exp.A = coef[0];
    exp.b = {coef[1], coef[2]};
    exp.c = {coef[3], coef[4], coef[5]};
    exp.fit_rms = std::sqrt(ss / double(idx.size()));
    exp.r_in = r_in;
    exp.r_out = r_out;
    if (exp.fit_rms > 0.05 * std::abs(exp.A) + 1e-6)
        throw ExpansionInvalid("fit_expansion: residual " + format_g17(exp.fit_rms) +
                               " too large for A = " + format_g17(exp.A));
    return exp;
}

GreenExpansion fit_expansion(const SurfaceMesh& mesh, const ScalarField& G, int y) {
    const double cell = mesh.cell_size(y);
    // clamp the outer radius on coarse meshes where 24 cells would leave the chart
    const double r_out = std::min(24.0 * cell, 0.9 * chart_limit(mesh));
    return fit_expansion(mesh, G, y, 6.0 * cell, r_out);
}

RobinField robin_field(const SurfaceMesh& mesh, const ScalarField& psi, const ScalarField& h,
                       const std::vector<int>& sample_nodes, double h_zero_tol, int threads) {
    require_bound(mesh, psi);
    require_bound(mesh, h);
    if (sample_nodes.empty()) throw InvalidArgument("robin_field: no sample nodes");
    RobinField rf;
    rf.samples.resize(sample_nodes.size());

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            const int node = sample_nodes[s];
            RobinSample& out = rf.samples[s];
            out.node = node;
            out.h = h.values[std::size_t(node)];
            out.in_Z = out.h <= h_zero_tol;
            if (out.in_Z) continue;
            ScalarField G = solve_green(mesh, psi, node);
            GreenExpansion exp = fit_expansion(mesh, G, node);
            out.A = exp.A;
            out.two_log_h_plus_A = 2.0 * std::log(out.h) + exp.A;
        }
    };
    const int nt = std::max(1, threads);
    if (nt == 1 || sample_nodes.size() < 2) {
        work(0, rf.samples.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (rf.samples.size() + nt - 1) / nt;
        for (int t = 0; t < nt; ++t) {
            const std::size_t b = std::min(std::size_t(t) * chunk, rf.samples.size());
            const std::size_t e = std::min(b + chunk, rf.samples.size());
            if (b < e) pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) th.join();
    }

    // order-free reduction; ties broken by lowest node index
    rf.argmax_node = -1;
    rf.max_value = -std::numeric_limits<double>::infinity();
    for (const auto& s : rf.samples) {
        if (s.in_Z) continue;
        if (s.two_log_h_plus_A > rf.max_value ||
            (s.two_log_h_plus_A == rf.max_value && s.node < rf.argmax_node)) {
            rf.max_value = s.two_log_h_plus_A;
            rf.argmax_node = s.node;
        }
    }
    if (rf.argmax_node < 0) throw EmptyDomain("robin_field: every sample lies in Z");
    return rf;
}

std::vector<int> default_robin_samples(const SurfaceMesh& mesh) {
    std::vector<int> out;
    if (mesh.is_torus()) {
        const int n = mesh.resolution;
        const int m = 8;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) out.push_back((a * n / m) * n + (b * n / m));
        return out;
    }
    // icosphere: one node per coarse (level-2) vertex, i.e. the first 162 nodes
    const int coarse = 162;
    for (int i = 0; i < std::min(coarse, mesh.node_count()); ++i) out.push_back(i);
    return out;
}

void write_robin_csv(std::ostream& os, const SurfaceMesh& mesh, const RobinField& rf) {
    const bool torus = mesh.is_torus();
    os << (torus ? "sample_node,x,y,h,A_y,two_log_h_plus_A,in_Z\n"
                 : "sample_node,x,y,z,h,A_y,two_log_h_plus_A,in_Z\n");
    for (const auto& s : rf.samples) {
        const auto& p = mesh.nodes[std::size_t(s.node)];
        os << s.node << ',' << format_g17(p[0]) << ',' << format_g17(p[1]);
        if (!torus) os << ',' << format_g17(p[2]);
        os << ',' << format_g17(s.h) << ',' << format_g17(s.in_Z ? 0.0 : s.A) << ','
           << format_g17(s.in_Z ? 0.0 : s.two_log_h_plus_A) << ',' << (s.in_Z ? 1 : 0) << '\n';
    }
}

}  // namespace mtlab
