#include "mtlab/functional.hpp"

#include <algorithm>
#include <cmath>

#include "mtlab/errors.hpp"

namespace mtlab {

namespace {

const double kPi = 3.14159265358979323846;

double field_max(const ScalarField& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : f.values) m = std::max(m, v);
    return m;
}

}  // namespace

ProblemSpec make_problem(const SurfaceMesh& mesh, ScalarField psi, ScalarField h,
                         double h_zero_tol) {
    require_bound(mesh, psi);
    require_bound(mesh, h);
    ProblemSpec spec;
    spec.mesh = &mesh;
    spec.psi_integral = integrate(mesh, psi);
    double psi_l1 = 0.0;
    for (std::size_t i = 0; i < psi.values.size(); ++i)
        psi_l1 += std::abs(psi.values[i]) * mesh.area_weights[i];
    if (std::abs(spec.psi_integral) <= 1e-10 * psi_l1)
        throw InvalidWeight("make_problem: int psi dv_g = 0");
    const double hmax = field_max(h);
    spec.h_zero_tol = h_zero_tol < 0.0 ? 1e-8 * hmax : h_zero_tol;
    for (double v : h.values)
        if (v < -1e-12) throw InvalidArgument("make_problem: h must be nonnegative");
    if (!(hmax > spec.h_zero_tol))
        throw InvalidArgument("make_problem: h vanishes identically");
    spec.psi = std::move(psi);
    spec.h = std::move(h);
    return spec;
}

double tilde_mean(const ProblemSpec& spec, const ScalarField& u) {
    require_bound(*spec.mesh, u);
    double acc = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        acc += spec.psi.values[i] * u.values[i] * spec.mesh->area_weights[i];
    return acc / spec.psi_integral;
}

double log_h_exp_integral(const ProblemSpec& spec, const ScalarField& u) {
    const double m = field_max(u);
    double acc = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        acc += spec.h.values[i] * std::exp(u.values[i] - m) * spec.mesh->area_weights[i];
    return m + std::log(acc);
}

FunctionalValue eval_J(const ProblemSpec& spec, const ScalarField& u, double eps) {
    require_bound(*spec.mesh, u);
    if (!(eps >= 0.0 && eps < 1.0)) throw InvalidArgument("eval_J: eps must lie in [0, 1)");
    FunctionalValue v;
    v.eps = eps;
    v.dirichlet = 0.5 * dirichlet_energy(*spec.mesh, u);
    const double coeff = 8.0 * kPi * (1.0 - eps);
    v.linear = coeff * tilde_mean(spec, u);
    const double loglam = log_h_exp_integral(spec, u);
    v.log_term = coeff * loglam;
    v.lambda = std::exp(loglam);
    v.J = v.dirichlet + v.linear - v.log_term;
    return v;
}

ScalarField el_residual(const ProblemSpec& spec, const ScalarField& u, double eps) {
    require_bound(*spec.mesh, u);
    ScalarField lap = apply_laplacian(*spec.mesh, u);
    const double m = field_max(u);
    double lam_shifted = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        lam_shifted += spec.h.values[i] * std::exp(u.values[i] - m) * spec.mesh->area_weights[i];
    const double coeff = 8.0 * kPi * (1.0 - eps);
    ScalarField r = constant_field(*spec.mesh, 0.0);
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        const double density = spec.h.values[i] * std::exp(u.values[i] - m) / lam_shifted;
        r.values[i] =
            -lap.values[i] + coeff * (spec.psi.values[i] / spec.psi_integral - density);
    }
    return r;
}

double mt_ratio(const ProblemSpec& spec, const ScalarField& u) { return mt_ratio_weakened(spec, u, 1.0); }

double mt_ratio_weakened(const ProblemSpec& spec, const ScalarField& u, double w) {
    require_bound(*spec.mesh, u);
    const double m = field_max(u);
    double acc = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        acc += std::exp(u.values[i] - m) * spec.mesh->area_weights[i];
    const double log_int = m + std::log(acc);
    const double energy = dirichlet_energy(*spec.mesh, u);
    return log_int - energy / (16.0 * kPi * w) - tilde_mean(spec, u);
}

double gradient_q_norm(const SurfaceMesh& mesh, const ScalarField& u, double q) {
    GradientSamples g = gradient_samples(mesh, u);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.magnitude.size(); ++i)
        acc += std::pow(g.magnitude[i], q) * g.weight[i];
    return std::pow(acc, 1.0 / q);
}

namespace {

double centered_q_norm(const ProblemSpec& spec, const ScalarField& u, double q) {
    const double tm = tilde_mean(spec, u);
    double acc = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        acc += std::pow(std::abs(u.values[i] - tm), q) * spec.mesh->area_weights[i];
    return std::pow(acc, 1.0 / q);
}

void require_nonconstant(const SurfaceMesh& mesh, const ScalarField& u) {
    double lo = u.values[0], hi = u.values[0];
    for (double v : u.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo <= 1e-14 * (1.0 + std::abs(hi)))
        throw DegenerateInput("ratio undefined for constant fields");
    (void)mesh;
}

}  // namespace

double poincare_ratio(const ProblemSpec& spec, const ScalarField& u, double q) {
    require_bound(*spec.mesh, u);
    if (!(q > 1.0)) throw InvalidArgument("poincare_ratio: q must exceed 1");
    require_nonconstant(*spec.mesh, u);
    return centered_q_norm(spec, u, q) / gradient_q_norm(*spec.mesh, u, q);
}

double sobolev_poincare_ratio(const ProblemSpec& spec, const ScalarField& u, double p) {
    require_bound(*spec.mesh, u);
    if (!(p >= 1.0)) throw InvalidArgument("sobolev_poincare_ratio: p must be >= 1");
    require_nonconstant(*spec.mesh, u);
    return centered_q_norm(spec, u, p) / std::sqrt(dirichlet_energy(*spec.mesh, u));
}

}  // namespace mtlab
