#include "mtlab/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtlab/fft.hpp"
#include "mtlab/green.hpp"
#include "mtlab/sparse.hpp"

namespace mtlab {

namespace {

const double kPi = 3.14159265358979323846;
const double kKappa = 1.0;  // shift removing the Laplacian kernel

double weighted_l2(const SurfaceMesh& mesh, const ScalarField& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        acc += f.values[i] * f.values[i] * mesh.area_weights[i];
    return std::sqrt(acc);
}

void project(const ProblemSpec& spec, ScalarField& u) {
    const double tm = tilde_mean(spec, u);
    for (double& v : u.values) v -= tm;
}

// Solve (kappa I - Delta_g) d = rhs.
ScalarField shifted_laplacian_solve(const SurfaceMesh& mesh, const ScalarField& rhs) {
    ScalarField d = constant_field(mesh, 0.0);
    if (mesh.is_torus()) {
        const int n = mesh.resolution;
        bool flat = true;
        const double phi0 = mesh.conformal_factor[0];
        for (double p : mesh.conformal_factor)
            if (std::abs(p - phi0) > 1e-15 * (1.0 + std::abs(phi0))) {
                flat = false;
                break;
            }
        if (flat) {
            // (kappa - e^{-2 phi0} Delta_flat) diagonal in Fourier space
            auto spec = fft::forward2d(rhs.values, n);
            const double s = std::exp(-2.0 * phi0);
            for (int i = 0; i < n; ++i) {
                const double ki = fft::freq(i, n);
                for (int j = 0; j < n; ++j) {
                    const double kj = fft::freq(j, n);
                    spec[std::size_t(i) * n + j] /=
                        kKappa + s * 4.0 * kPi * kPi * (ki * ki + kj * kj);
                }
            }
            d.values = fft::inverse2d_real(std::move(spec), n);
            return d;
        }
        // (kappa e^{2 phi} - Delta_flat) d = e^{2 phi} rhs, SPD; CG with the
        // constant-coefficient spectral inverse as preconditioner
        const std::size_t N = rhs.values.size();
        std::vector<double> w(N), b(N);
        double wbar = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            w[i] = std::exp(2.0 * mesh.conformal_factor[i]);
            wbar += w[i];
            b[i] = w[i] * rhs.values[i];
        }
        wbar /= double(N);
        auto apply_A = [&](const double* x, double* y) {
            ScalarField xs = constant_field(mesh, 0.0);
            std::copy(x, x + N, xs.values.begin());
            auto spec = fft::forward2d(xs.values, n);
            for (int i = 0; i < n; ++i) {
                const double ki = fft::freq(i, n);
                for (int j = 0; j < n; ++j) {
                    const double kj = fft::freq(j, n);
                    spec[std::size_t(i) * n + j] *= 4.0 * kPi * kPi * (ki * ki + kj * kj);
                }
            }
            auto neg_lap = fft::inverse2d_real(std::move(spec), n);
            for (std::size_t i = 0; i < N; ++i) y[i] = kKappa * w[i] * x[i] + neg_lap[i];
        };
        auto apply_M = [&](const double* x, double* y) {
            std::vector<double> tmp(x, x + N);
            auto spec = fft::forward2d(tmp, n);
            for (int i = 0; i < n; ++i) {
                const double ki = fft::freq(i, n);
                for (int j = 0; j < n; ++j) {
                    const double kj = fft::freq(j, n);
                    spec[std::size_t(i) * n + j] /=
                        kKappa * wbar + 4.0 * kPi * kPi * (ki * ki + kj * kj);
                }
            }
            auto res = fft::inverse2d_real(std::move(spec), n);
            std::copy(res.begin(), res.end(), y);
        };
        pcg(apply_A, apply_M, b, d.values, 1e-12, 500);
        return d;
    }
    // triangle backend: (kappa M + S) d = M rhs
    const int N = mesh.node_count();
    std::vector<double> b(std::size_t(N), 0.0);
    for (int i = 0; i < N; ++i)
        b[std::size_t(i)] = mesh.area_weights[std::size_t(i)] * rhs.values[std::size_t(i)];
    std::vector<double> diag(std::size_t(N), 1.0);
    for (int i = 0; i < N; ++i) {
        double dv = kKappa * mesh.area_weights[std::size_t(i)];
        for (int k = mesh.stiffness.row_ptr[i]; k < mesh.stiffness.row_ptr[i + 1]; ++k)
            if (mesh.stiffness.col[k] == i) dv += mesh.stiffness.val[k];
        diag[std::size_t(i)] = dv;
    }
    auto apply_A = [&](const double* x, double* y) {
        mesh.stiffness.multiply(x, y);
        for (int i = 0; i < N; ++i) y[i] += kKappa * mesh.area_weights[std::size_t(i)] * x[i];
    };
    auto apply_M = [&](const double* x, double* y) {
        for (int i = 0; i < N; ++i) y[i] = x[i] / diag[std::size_t(i)];
    };
    pcg(apply_A, apply_M, b, d.values, 1e-12, 20000);
    return d;
}

}  // namespace

MinimizerResult minimize(const ProblemSpec& spec, double eps, const ScalarField& init,
                         const MinimizeOptions& opts) {
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("minimize: eps must lie in (0, 1)");
    const SurfaceMesh& mesh = *spec.mesh;
    require_bound(mesh, init);

    MinimizerResult res;
    res.eps = eps;
    res.u = init;
    project(spec, res.u);

    FunctionalValue fv = eval_J(spec, res.u, eps);
    res.J = fv.J;
    int backtracks = 0;

    for (int it = 0; it <= opts.max_iter; ++it) {
        ScalarField g = el_residual(spec, res.u, eps);
        res.residual_norm = weighted_l2(mesh, g);
        res.iterations = it;
        if (res.residual_norm <= opts.tol_grad) {
            res.converged = true;
            res.line_search_backtracks = backtracks;
            return res;
        }
        if (it == opts.max_iter) break;

        ScalarField d = shifted_laplacian_solve(mesh, g);
        for (double& v : d.values) v = -v;
        project(spec, d);

        double gd = 0.0;
        for (std::size_t i = 0; i < g.values.size(); ++i)
            gd += g.values[i] * d.values[i] * mesh.area_weights[i];
        if (gd >= 0.0) {  // not a descent direction; fall back to -g
            d = g;
            for (double& v : d.values) v = -v;
            project(spec, d);
            gd = 0.0;
            for (std::size_t i = 0; i < g.values.size(); ++i)
                gd += g.values[i] * d.values[i] * mesh.area_weights[i];
        }

        // Armijo with a rounding guard: near the optimum the true decrease per
        // step drops below double rounding of the J evaluation (which carries
        // O(1)-sized intermediate sums even when J itself is ~0).
        const double guard =
            1e-13 * (1.0 + std::abs(res.J) + std::abs(fv.dirichlet) + std::abs(fv.linear) +
                     std::abs(fv.log_term));
        double t = opts.step0;
        ScalarField cand = res.u;
        FunctionalValue cand_v;
        bool accepted = false;
        while (t >= 1e-16) {
            for (std::size_t i = 0; i < cand.values.size(); ++i)
                cand.values[i] = res.u.values[i] + t * d.values[i];
            project(spec, cand);
            cand_v = eval_J(spec, cand, eps);
            if (cand_v.J <= res.J + 1e-4 * t * gd + guard) {
                accepted = true;
                break;
            }
            t *= 0.5;
            ++backtracks;
        }
        if (!accepted) {
            res.line_search_backtracks = backtracks;
            throw StagnationError(res);
        }
        res.u = std::move(cand);
        res.J = cand_v.J;
        fv = cand_v;
    }
    res.line_search_backtracks = backtracks;
    res.converged = false;
    return res;
}

namespace {

double mass_radius_of(const ProblemSpec& spec, const ScalarField& u, int center) {
    const SurfaceMesh& mesh = *spec.mesh;
    NormalChart chart = polar_map(mesh, center);
    std::vector<int> order(std::size_t(mesh.node_count()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return chart.r[std::size_t(a)] != chart.r[std::size_t(b)]
                   ? chart.r[std::size_t(a)] < chart.r[std::size_t(b)]
                   : a < b;
    });
    const double m = *std::max_element(u.values.begin(), u.values.end());
    double total = 0.0;
    std::vector<double> dens(u.values.size());
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        dens[i] = spec.h.values[i] * std::exp(u.values[i] - m) * mesh.area_weights[i];
        total += dens[i];
    }
    double acc = 0.0;
    for (int node : order) {
        acc += dens[std::size_t(node)];
        if (acc >= 0.5 * total) return chart.r[std::size_t(node)];
    }
    return chart.r[std::size_t(order.back())];
}

}  // namespace

ContinuationReport continuation(const ProblemSpec& spec, const std::vector<double>& eps_schedule,
                                const MinimizeOptions& opts) {
    if (eps_schedule.empty()) throw InvalidArgument("continuation: empty schedule");
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
        if (!(eps_schedule[i] > 0.0 && eps_schedule[i] < 1.0))
            throw InvalidArgument("continuation: eps values must lie in (0, 1)");
        if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1]))
            throw InvalidArgument("continuation: schedule must decrease strictly");
    }
    const SurfaceMesh& mesh = *spec.mesh;
    ContinuationReport report;
    ScalarField warm = constant_field(mesh, 0.0);

    for (double eps : eps_schedule) {
        ContinuationRecord rec;
        rec.eps = eps;
        MinimizerResult r;
        try {
            r = minimize(spec, eps, warm, opts);
            rec.converged = r.converged;
        } catch (const StagnationError& e) {
            r = e.best;
            rec.converged = false;
        } catch (const NumericError&) {
            // record the failed step from the previous warm start
            r.u = warm;
            r.eps = eps;
            r.J = eval_J(spec, warm, eps).J;
            rec.converged = false;
        }
        warm = r.u;
        rec.J = r.J;
        const auto it = std::max_element(r.u.values.begin(), r.u.values.end());
        rec.c_eps = *it;
        rec.x_eps = int(it - r.u.values.begin());
        rec.lambda_eps = std::exp(log_h_exp_integral(spec, r.u));
        rec.grad_l2_sq = dirichlet_energy(mesh, r.u);
        for (double q : {1.2, 1.5, 1.8}) rec.grad_q_norms[q] = gradient_q_norm(mesh, r.u, q);
        rec.mass_radius = mass_radius_of(spec, r.u, rec.x_eps);
        report.records.push_back(std::move(rec));
    }

    report.verdict = classify_verdict(report.records);

    RobinField rf = robin_field(mesh, spec.psi, spec.h, default_robin_samples(mesh),
                                spec.h_zero_tol);
    report.blowup_infimum = -8.0 * kPi - 8.0 * kPi * std::log(kPi) - 4.0 * kPi * rf.max_value;
    return report;
}

Verdict classify_verdict(const std::vector<ContinuationRecord>& records) {
    const std::size_t n = records.size();
    if (n < 3) return Verdict::Undecided;
    const auto& a = records[n - 3];
    const auto& b = records[n - 2];
    const auto& c = records[n - 1];
    const double lo = std::min({a.grad_l2_sq, b.grad_l2_sq, c.grad_l2_sq});
    const double hi = std::max({a.grad_l2_sq, b.grad_l2_sq, c.grad_l2_sq});
    if (hi <= lo * 1.02 + 1e-12 && c.converged) return Verdict::Attained;
    if (a.grad_l2_sq < b.grad_l2_sq && b.grad_l2_sq < c.grad_l2_sq &&
        a.mass_radius > b.mass_radius && b.mass_radius > c.mass_radius)
        return Verdict::Blowup;
    return Verdict::Undecided;
}

double attainment_gap(const ProblemSpec& spec, const MinimizerResult& result, double M) {
    (void)spec;
    if (!result.converged) throw InvalidArgument("attainment_gap: result did not converge");
    return (-8.0 * kPi - 8.0 * kPi * std::log(kPi) - 4.0 * kPi * M) - result.J;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Attained: return "Attained";
        case Verdict::Blowup: return "Blowup";
        default: return "Undecided";
    }
}

}  // namespace mtlab
