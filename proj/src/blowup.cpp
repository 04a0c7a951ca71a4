#include "mtlab/blowup.hpp"

#include <algorithm>
#include <cmath>

#include "mtlab/errors.hpp"

namespace mtlab {

namespace {

const double kPi = 3.14159265358979323846;
const double kEpsUpper = std::exp(-std::exp(1.0));  // e^{-e}

// C^2 quintic smoothstep on [0,1]; |s'| <= 15/8
double smoothstep5(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double lambda_of(const ProblemSpec& spec, const ScalarField& u) {
    return std::exp(log_h_exp_integral(spec, u));
}

}  // namespace

double bubble(double h_p, double x1, double x2) {
    if (!(h_p > 0.0)) throw InvalidArgument("bubble: h(p) must be positive");
    return -2.0 * std::log(1.0 + kPi * h_p * (x1 * x1 + x2 * x2));
}

double bubble_radial(double h_p, double r) { return bubble(h_p, r, 0.0); }

double bubble_mass_quadrature(double h_p, double R, int panels) {
    if (!(h_p > 0.0) || !(R > 0.0)) throw InvalidArgument("bubble mass: h_p, R must be positive");
    if (panels % 2 != 0) ++panels;
    const double dr = R / panels;
    auto f = [&](double r) { return 2.0 * kPi * r * h_p * std::exp(bubble_radial(h_p, r)); };
    double acc = f(0.0) + f(R);
    for (int i = 1; i < panels; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f(i * dr);
    return acc * dr / 3.0;
}

double bubble_mass_closed_form(double h_p, double R) {
    const double s = kPi * h_p * R * R;
    return s / (1.0 + s);
}

double bubble_pde_residual_max(double h_p, double R, int grid) {
    if (grid < 8) throw InvalidArgument("bubble residual: grid too small");
    const double dr = R / grid;
    double worst = 0.0;
    for (int i = 1; i < grid; ++i) {
        const double r = i * dr;
        const double fm = bubble_radial(h_p, r - dr);
        const double f0 = bubble_radial(h_p, r);
        const double fp = bubble_radial(h_p, r + dr);
        const double lap = (fp - 2.0 * f0 + fm) / (dr * dr) + (fp - fm) / (2.0 * dr * r);
        worst = std::max(worst, std::abs(lap + 8.0 * kPi * h_p * std::exp(f0)));
    }
    return worst;
}

TestFunctionParams make_test_function_params(const ProblemSpec& spec, int p, double eps,
                                             ScalarField G, GreenExpansion expansion) {
    if (!(eps > 0.0 && eps < kEpsUpper))
        throw InvalidArgument("test function needs eps in (0, e^{-e})");
    if (p < 0 || p >= spec.mesh->node_count())
        throw InvalidArgument("test function: bad center node");
    require_bound(*spec.mesh, G);
    TestFunctionParams params;
    params.p = p;
    params.eps = eps;
    params.alpha = std::pow(eps * std::log(-std::log(eps)), -0.25);
    const double a2 = params.alpha * params.alpha;
    params.C_eps = -2.0 * std::log((a2 + 1.0) / a2) - expansion.A;
    params.expansion = expansion;
    params.G_p = std::move(G);
    return params;
}

TestFunctionParams make_test_function_params(const ProblemSpec& spec, int p, double eps) {
    ScalarField G = solve_green(*spec.mesh, spec.psi, p);
    GreenExpansion expansion = fit_expansion(*spec.mesh, G, p);
    return make_test_function_params(spec, p, eps, std::move(G), expansion);
}

double inner_branch_value(const TestFunctionParams& params, double r, double theta) {
    const auto& b = params.expansion.b;
    return -2.0 * std::log(r * r + params.eps) + b[0] * r * std::cos(theta) +
           b[1] * r * std::sin(theta) + std::log(params.eps);
}

double expansion_branch_value(const TestFunctionParams& params, double r, double theta) {
    const auto& e = params.expansion;
    return -4.0 * std::log(r) + e.A + e.b[0] * r * std::cos(theta) +
           e.b[1] * r * std::sin(theta) + params.C_eps + std::log(params.eps);
}

ScalarField build_test_function(const ProblemSpec& spec, const TestFunctionParams& params) {
    const SurfaceMesh& mesh = *spec.mesh;
    const double rin = params.alpha * std::sqrt(params.eps);
    const double rout = 2.0 * rin;
    if (rout >= polar_map_limit(mesh))
        throw ScaleError("build_test_function: 2 alpha sqrt(eps) exceeds the chart radius");

    NormalChart chart = polar_map(mesh, params.p);
    const auto& e = params.expansion;
    const double logeps = std::log(params.eps);
    ScalarField phi = constant_field(mesh, 0.0);
    for (int i = 0; i < mesh.node_count(); ++i) {
        const double r = chart.r[std::size_t(i)];
        const double t = chart.theta[std::size_t(i)];
        const double bterm = e.b[0] * r * std::cos(t) + e.b[1] * r * std::sin(t);
        double v;
        if (r <= rin) {
            v = -2.0 * std::log(r * r + params.eps) + bterm + logeps;
        } else if (r < rout) {
            const double beta =
                params.G_p.values[std::size_t(i)] - (-4.0 * std::log(r) + e.A + bterm);
            const double eta = 1.0 - smoothstep5((r - rin) / rin);
            v = params.G_p.values[std::size_t(i)] - eta * beta + params.C_eps + logeps;
        } else {
            v = params.G_p.values[std::size_t(i)] + params.C_eps + logeps;
        }
        phi.values[std::size_t(i)] = v;
    }
    return phi;
}

double eval_test_function_J(const ProblemSpec& spec, const TestFunctionParams& params) {
    return eval_J(spec, build_test_function(spec, params), 0.0).J;
}

double asymptotic_bracket(double psi_p_over_int, double K_p, const GreenExpansion& expansion,
                          const LocalJet& h_jet) {
    const double h_p = h_jet.value;
    const double b1 = expansion.b[0], b2 = expansion.b[1];
    const double k1 = h_jet.grad[0], k2 = h_jet.grad[1];
    return 0.5 * (psi_p_over_int + 1.0) - K_p / (4.0 * kPi) + (b1 * b1 + b2 * b2) / (8.0 * kPi) +
           h_jet.laplacian / (8.0 * kPi * h_p) + (k1 * b1 + k2 * b2) / (4.0 * kPi * h_p);
}

double asymptotic_J(const ProblemSpec& spec, int p, const LocalJet& h_jet, const LocalJet& psi_jet,
                    const GreenExpansion& expansion, double K_p, double eps) {
    (void)p;
    const double h_p = h_jet.value;
    if (!(h_p > spec.h_zero_tol)) throw InvalidArgument("asymptotic_J: point lies in Z");
    const double bracket = asymptotic_bracket(psi_jet.value / spec.psi_integral, K_p, expansion,
                                              h_jet);
    return -8.0 * kPi - 8.0 * kPi * std::log(kPi) - 4.0 * kPi * expansion.A -
           8.0 * kPi * std::log(h_p) - 16.0 * kPi * kPi * bracket * eps * (-std::log(eps));
}

double condition_margin(const ProblemSpec& spec, int p, const LocalJet& h_jet,
                        const GreenExpansion& expansion, double K_p) {
    const double h_p = h_jet.value;
    if (!(h_p > spec.h_zero_tol)) throw InvalidArgument("condition_margin: point lies in Z");
    const double psi_p = spec.psi.values[std::size_t(p)];
    const double b1 = expansion.b[0], b2 = expansion.b[1];
    const double k1 = h_jet.grad[0], k2 = h_jet.grad[1];
    return h_jet.laplacian + 2.0 * (b1 * k1 + b2 * k2) +
           (4.0 * kPi * (psi_p / spec.psi_integral + 1.0) + (b1 * b1 + b2 * b2) - 2.0 * K_p) * h_p;
}

double rescaled_profile_error(const ProblemSpec& spec, const ScalarField& u, int center,
                              double h_center, double R) {
    const SurfaceMesh& mesh = *spec.mesh;
    require_bound(mesh, u);
    if (!(h_center > 0.0)) throw InvalidArgument("rescaled_profile_error: h(p) must be positive");
    const double c_eps = u.values[std::size_t(center)];
    const double r_eps = std::sqrt(lambda_of(spec, u)) * std::exp(-0.5 * c_eps);
    if (r_eps * R >= polar_map_limit(mesh))
        throw ScaleError("rescaled_profile_error: R r_eps exceeds the chart radius");
    NormalChart chart = polar_map(mesh, center);
    double err = 0.0;
    for (int i = 0; i < mesh.node_count(); ++i) {
        const double r = chart.r[std::size_t(i)];
        if (r > r_eps * R) continue;
        const double rescaled = u.values[std::size_t(i)] - c_eps;
        err = std::max(err, std::abs(rescaled - bubble_radial(h_center, r / r_eps)));
    }
    return err;
}

std::map<double, double> mass_fractions(const ProblemSpec& spec, const ScalarField& u, int center,
                                        const std::vector<double>& radii) {
    const SurfaceMesh& mesh = *spec.mesh;
    require_bound(mesh, u);
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw InvalidArgument("mass_fractions: radii must be positive");
        if (i > 0 && !(radii[i] > radii[i - 1]))
            throw InvalidArgument("mass_fractions: radii must increase");
    }
    NormalChart chart = polar_map(mesh, center);
    const double m = *std::max_element(u.values.begin(), u.values.end());
    double total = 0.0;
    std::vector<double> dens(u.values.size());
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        dens[i] = spec.h.values[i] * std::exp(u.values[i] - m) * mesh.area_weights[i];
        total += dens[i];
    }
    std::map<double, double> out;
    for (double radius : radii) {
        double acc = 0.0;
        for (std::size_t i = 0; i < dens.size(); ++i)
            if (chart.r[i] <= radius) acc += dens[i];
        out[radius] = acc / total;
    }
    return out;
}

double lower_bound_check(const ProblemSpec& spec, const ScalarField& u, int center,
                         const ScalarField& G_center, const GreenExpansion& expansion, double h_p,
                         double R) {
    const SurfaceMesh& mesh = *spec.mesh;
    require_bound(mesh, u);
    require_bound(mesh, G_center);
    if (!(h_p > 0.0)) throw InvalidArgument("lower_bound_check: h(p) must be positive");
    const double c_eps = u.values[std::size_t(center)];
    const double log_lambda = log_h_exp_integral(spec, u);
    const double rhs = -c_eps + 2.0 * log_lambda - 2.0 * std::log(kPi) - 2.0 * std::log(h_p) -
                       expansion.A;
    const double r_eps = std::sqrt(std::exp(log_lambda)) * std::exp(-0.5 * c_eps);
    NormalChart chart = polar_map(mesh, center);
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < mesh.node_count(); ++i) {
        if (chart.r[std::size_t(i)] < R * r_eps) continue;
        margin = std::min(margin,
                          u.values[std::size_t(i)] - G_center.values[std::size_t(i)] - rhs);
    }
    if (!std::isfinite(margin))
        throw ScaleError("lower_bound_check: no nodes outside B_{R r_eps}");
    return margin;
}

BlowupReport make_blowup_report(const ProblemSpec& spec, const ScalarField& u, int center,
                                const ScalarField& G_center, const GreenExpansion& expansion,
                                double h_center, double profile_R,
                                const std::vector<double>& mass_radii, double lower_R) {
    BlowupReport rep;
    rep.center = center;
    rep.c_eps = u.values[std::size_t(center)];
    rep.lambda_eps = lambda_of(spec, u);
    rep.r_eps = std::sqrt(rep.lambda_eps) * std::exp(-0.5 * rep.c_eps);
    rep.profile_sup_error = rescaled_profile_error(spec, u, center, h_center, profile_R);
    rep.mass_fraction = mass_fractions(spec, u, center, mass_radii);
    rep.lower_bound_violation =
        lower_bound_check(spec, u, center, G_center, expansion, h_center, lower_R);
    return rep;
}

}  // namespace mtlab
