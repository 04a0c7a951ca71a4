// Acceptance suite: one pass/fail line per criterion, exit nonzero when any
// selected criterion fails. Usage: acceptance [id...]
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mtlab/blowup.hpp"
#include "mtlab/errors.hpp"
#include "mtlab/io.hpp"
#include "mtlab/minimizer.hpp"
#include "mtlab/rng.hpp"
#include "mtlab/util.hpp"

using namespace mtlab;

namespace {

const double kPi = 3.14159265358979323846;

struct Outcome {
    bool pass = true;
    std::string detail;
    std::string csv;  // deterministic metric rows, compared bytewise by criterion 10
};

SurfaceMesh flat_torus(int n) {
    return build_torus(n, [](double, double) { return 0.0; });
}

double weighted_l2(const SurfaceMesh& mesh, const ScalarField& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        acc += f.values[i] * f.values[i] * mesh.area_weights[i];
    return std::sqrt(acc);
}

void note(Outcome& out, bool ok, const std::string& what) {
    if (!ok) out.pass = false;
    out.detail += (out.detail.empty() ? "" : "; ") + what + (ok ? " [ok]" : " [FAILED]");
}

// ---------------------------------------------------------------- criterion 1
Outcome criterion_gradient_oracle() {
    Outcome out;
    SurfaceMesh mesh = flat_torus(64);
    ScalarField psi = sample(mesh, [](const std::array<double, 3>& p) {
        return 1.0 + 0.5 * std::cos(2 * kPi * p[0]);
    });
    ScalarField h = sample(mesh, [](const std::array<double, 3>& p) {
        return 1.0 + 0.3 * std::sin(2 * kPi * p[1]);
    });
    ProblemSpec spec = make_problem(mesh, psi, h);
    const double eps = 0.1;
    ScalarField u = random_bandlimited(mesh, 4, 1.0, 2024);
    ScalarField r = el_residual(spec, u, eps);

    CsvWriter csv("direction,rel_error_t1em4,decay_ratio");
    double worst_rel = 0.0, worst_decay = 0.0;
    for (int dir = 0; dir < 10; ++dir) {
        ScalarField v = random_bandlimited(mesh, 4, 1.0, 3000 + dir);
        double predicted = 0.0;
        for (std::size_t i = 0; i < v.values.size(); ++i)
            predicted += r.values[i] * v.values[i] * mesh.area_weights[i];
        std::vector<double> errs;
        for (double t : {1e-2, 1e-3, 1e-4}) {
            ScalarField up = u, um = u;
            for (std::size_t i = 0; i < u.values.size(); ++i) {
                up.values[i] += t * v.values[i];
                um.values[i] -= t * v.values[i];
            }
            const double fd = (eval_J(spec, up, eps).J - eval_J(spec, um, eps).J) / (2.0 * t);
            errs.push_back(std::abs(fd - predicted));
        }
        const double rel = errs[2] / std::abs(predicted);
        const double decay = errs[1] / errs[0];  // ~1e-2 for O(t^2)
        worst_rel = std::max(worst_rel, rel);
        worst_decay = std::max(worst_decay, decay);
        csv.row_start();
        csv.cell(static_cast<long long>(dir));
        csv.cell(rel);
        csv.cell(decay);
        csv.row_end();
    }
    note(out, worst_rel <= 1e-6, "max relative FD error " + format_g17(worst_rel) + " <= 1e-6");
    note(out, worst_decay <= 0.05, "O(t^2) decay ratio " + format_g17(worst_decay) + " <= 0.05");
    out.csv = csv.str();
    return out;
}

// ---------------------------------------------------------------- criterion 2
Outcome criterion_constant_solution() {
    Outcome out;
    SurfaceMesh mesh = flat_torus(64);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));

    const double res0 = weighted_l2(mesh, el_residual(spec, constant_field(mesh, 0.0), 0.1));
    note(out, res0 <= 1e-12, "residual at u=0 is " + format_g17(res0) + " <= 1e-12");

    CsvWriter csv("seed,iterations,residual,J");
    MinimizeOptions opts;
    opts.max_iter = 200;
    for (int seed = 1; seed <= 5; ++seed) {
        MinimizerResult r = minimize(spec, 0.1, random_bandlimited(mesh, 4, 0.1, seed), opts);
        note(out, r.converged && r.residual_norm <= 1e-8 && std::abs(r.J) <= 1e-8 &&
                      r.iterations <= 200,
             "seed " + std::to_string(seed) + ": iters " + std::to_string(r.iterations) +
                 ", res " + format_g17(r.residual_norm) + ", |J| " + format_g17(std::abs(r.J)));
        csv.row_start();
        csv.cell(static_cast<long long>(seed));
        csv.cell(static_cast<long long>(r.iterations));
        csv.cell(r.residual_norm);
        csv.cell(r.J);
        csv.row_end();
    }
    out.csv = csv.str();
    return out;
}

// ---------------------------------------------------------------- criterion 3
Outcome criterion_expansion_trace_identity() {
    Outcome out;
    CsvWriter csv("case,c1_plus_c3,K_p,lhs,fit_rms");

    SurfaceMesh flat = flat_torus(256);
    ScalarField psi = constant_field(flat, 1.0);
    GreenExpansion ef = fit_expansion(flat, solve_green(flat, psi, 0), 0);
    const double flat_sum = ef.c[0] + ef.c[2];
    note(out, std::abs(flat_sum - 4.0 * kPi) <= 0.02 * 4.0 * kPi,
         "flat c1+c3 = " + format_g17(flat_sum) + " within 2% of 4 pi");
    csv.row_start();
    csv.cell(std::string("flat"));
    csv.cell(flat_sum);
    csv.cell(0.0);
    csv.cell(flat_sum);
    csv.cell(ef.fit_rms);
    csv.row_end();

    SurfaceMesh curved =
        build_torus(256, [](double x, double) { return 0.1 * std::cos(2 * kPi * x); });
    ScalarField psic = constant_field(curved, 1.0);
    GreenExpansion ec = fit_expansion(curved, solve_green(curved, psic, 0), 0);
    const double K_p = gaussian_curvature(curved).values[0];
    const double lhs = ec.c[0] + ec.c[2] + (2.0 / 3.0) * K_p;
    const double tol = std::max(0.02 * 4.0 * kPi, 10.0 * ec.fit_rms);
    note(out, std::abs(lhs - 4.0 * kPi) <= tol,
         "conformal c1+c3+(2/3)K = " + format_g17(lhs) + " within " + format_g17(tol) +
             " of 4 pi");
    csv.row_start();
    csv.cell(std::string("conformal"));
    csv.cell(ec.c[0] + ec.c[2]);
    csv.cell(K_p);
    csv.cell(lhs);
    csv.cell(ec.fit_rms);
    csv.row_end();
    out.csv = csv.str();
    return out;
}

// ---------------------------------------------------------------- criterion 4
Outcome criterion_bubble_closed_forms() {
    Outcome out;
    CsvWriter csv("h_p,R,quadrature,closed_form,abs_error");
    for (auto [hp, R] : std::initializer_list<std::pair<double, double>>{{1, 1}, {1, 5}, {2, 3}}) {
        const double q = bubble_mass_quadrature(hp, R);
        const double cf = bubble_mass_closed_form(hp, R);
        note(out, std::abs(q - cf) < 1e-6,
             "mass(h_p=" + format_g17(hp) + ", R=" + format_g17(R) + ") error " +
                 format_g17(std::abs(q - cf)));
        csv.row_start();
        csv.cell(hp);
        csv.cell(R);
        csv.cell(q);
        csv.cell(cf);
        csv.cell(std::abs(q - cf));
        csv.row_end();
    }
    const double r1 = bubble_pde_residual_max(1.0, 4.0, 128);
    const double r2 = bubble_pde_residual_max(1.0, 4.0, 256);
    const double r4 = bubble_pde_residual_max(1.0, 4.0, 512);
    const bool order2 = r1 / r2 > 3.0 && r1 / r2 < 5.0 && r2 / r4 > 3.0 && r2 / r4 < 5.0;
    note(out, order2,
         "PDE residual ratios " + format_g17(r1 / r2) + ", " + format_g17(r2 / r4) + " ~ 4");
    out.csv = csv.str();
    return out;
}

// ---------------------------------------------------------------- criterion 5
Outcome criterion_seam_identity() {
    Outcome out;
    SurfaceMesh mesh = flat_torus(512);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));
    ScalarField G = solve_green(mesh, spec.psi, 0);
    GreenExpansion e = fit_expansion(mesh, G, 0);
    CsvWriter csv("eps,max_seam_jump");
    for (double eps : {1e-3, 1e-4, 1e-5}) {
        TestFunctionParams params = make_test_function_params(spec, 0, eps, G, e);
        const double rin = params.alpha * std::sqrt(eps);
        double worst = 0.0;
        for (int k = 0; k < 64; ++k) {
            const double theta = 2.0 * kPi * k / 64.0;
            worst = std::max(worst, std::abs(inner_branch_value(params, rin, theta) -
                                             expansion_branch_value(params, rin, theta)));
        }
        note(out, worst <= 1e-12,
             "eps=" + format_g17(eps) + " seam jump " + format_g17(worst) + " <= 1e-12");
        csv.row_start();
        csv.cell(eps);
        csv.cell(worst);
        csv.row_end();
    }
    out.csv = csv.str();
    return out;
}

// ---------------------------------------------------------------- criterion 6
Outcome criterion_asymptotic_expansion() {
    Outcome out;
    SurfaceMesh coarse = flat_torus(256);
    SurfaceMesh fine = flat_torus(512);
    const double A256 =
        fit_expansion(coarse, solve_green(coarse, constant_field(coarse, 1.0), 0), 0).A;
    ScalarField psi = constant_field(fine, 1.0);
    ScalarField Gf = solve_green(fine, psi, 0);
    GreenExpansion ef = fit_expansion(fine, Gf, 0);
    const double A = ef.A + (ef.A - A256) / 3.0;  // Richardson n=256/512
    const double C_inf = -8.0 * kPi - 8.0 * kPi * std::log(kPi) - 4.0 * kPi * A;

    ProblemSpec spec = make_problem(fine, psi, constant_field(fine, 1.0));
    CsvWriter csv("eps,J_numeric,gap_to_constant,ratio,abs_gap_to_asymptotic");
    std::vector<double> abs_gaps;
    double ratio_finest = 0.0;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
        TestFunctionParams params = make_test_function_params(spec, 0, eps, Gf, ef);
        const double Jn = eval_test_function_J(spec, params);
        const double signal = eps * (-std::log(eps));
        const double ratio = (Jn - C_inf) / signal;
        const double Ja = C_inf - 16.0 * kPi * kPi * signal;
        abs_gaps.push_back(std::abs(Jn - Ja));
        if (eps == 1e-5) ratio_finest = ratio;
        csv.row_start();
        csv.cell(eps);
        csv.cell(Jn);
        csv.cell(Jn - C_inf);
        csv.cell(ratio);
        csv.cell(std::abs(Jn - Ja));
        csv.row_end();
    }
    const double target = -16.0 * kPi * kPi;
    note(out, std::abs(ratio_finest - target) <= 0.05 * std::abs(target),
         "ratio at eps=1e-5 is " + format_g17(ratio_finest) + " vs " + format_g17(target) +
             " (needs 5%)");
    note(out, abs_gaps[0] > abs_gaps[1] && abs_gaps[1] > abs_gaps[2],
         "three-eps asymptotic gap sequence " + format_g17(abs_gaps[0]) + " > " +
             format_g17(abs_gaps[1]) + " > " + format_g17(abs_gaps[2]));
    out.csv = csv.str();
    return out;
}

// ---------------------------------------------------------------- criterion 7
Outcome criterion_condition_plugin() {
    Outcome out;
    SurfaceMesh mesh = flat_torus(64);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));

    GreenExpansion e;  // exact plug-in inputs for the symmetric flat case
    e.A = 0.0;
    LocalJet h1{0, 1.0, {0.0, 0.0}, {{{0.0, 0.0}, {0.0, 0.0}}}, 0.0};
    const double margin = condition_margin(spec, 0, h1, e, 0.0);
    note(out, std::abs(margin - 8.0 * kPi) <= 1e-10,
         "flat margin " + format_g17(margin) + " = 8 pi");

    CsvWriter csv("trial,margin,identity_residual,signs_agree");
    csv.row_start();
    csv.cell(static_cast<long long>(-1));
    csv.cell(margin);
    csv.cell(margin - 8.0 * kPi);
    csv.cell(static_cast<long long>(1));
    csv.row_end();

    std::mt19937_64 gen(4242);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    std::uniform_real_distribution<double> pos(0.2, 3.0);
    bool all_match = true;
    double worst_resid = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int p = int(gen() % std::uint64_t(mesh.node_count()));
        GreenExpansion re;
        re.A = uni(gen);
        re.b = {uni(gen), uni(gen)};
        LocalJet hj{p, pos(gen), {uni(gen), uni(gen)}, {{{0.0, 0.0}, {0.0, 0.0}}}, uni(gen)};
        const double K_p = uni(gen);
        const double m = condition_margin(spec, p, hj, re, K_p);
        const double bracket = asymptotic_bracket(
            spec.psi.values[std::size_t(p)] / spec.psi_integral, K_p, re, hj);
        const double resid = std::abs(m - 8.0 * kPi * hj.value * bracket) /
                             std::max(1.0, std::abs(m));
        const bool same_sign = (m > 0.0) == (bracket > 0.0);
        all_match = all_match && same_sign && resid <= 1e-10;
        worst_resid = std::max(worst_resid, resid);
        csv.row_start();
        csv.cell(static_cast<long long>(trial));
        csv.cell(m);
        csv.cell(resid);
        csv.cell(static_cast<long long>(same_sign ? 1 : 0));
        csv.row_end();
    }
    note(out, all_match,
         "20 random jets: sign equivalence exact, worst identity residual " +
             format_g17(worst_resid));
    out.csv = csv.str();
    return out;
}

// ---------------------------------------------------------------- criterion 8
Outcome criterion_profile_recovery() {
    Outcome out;
    SurfaceMesh mesh = flat_torus(512);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));
    TestFunctionParams params = make_test_function_params(spec, 0, 1e-5);
    ScalarField phi = build_test_function(spec, params);

    const double err = rescaled_profile_error(spec, phi, 0, 1.0, 5.0);
    note(out, err <= 0.05, "profile sup error on B_5 is " + format_g17(err) + " <= 0.05");

    const double lam = std::exp(log_h_exp_integral(spec, phi));
    const double r_eps = std::sqrt(lam) * std::exp(-0.5 * phi.values[0]);
    auto mf = mass_fractions(spec, phi, 0, {10.0 * r_eps});
    const double frac = mf.at(10.0 * r_eps);
    note(out, frac >= 0.9, "mass fraction at 10 r_eps is " + format_g17(frac) + " >= 0.9");

    CsvWriter csv("profile_error,mass_fraction_10r");
    csv.row_start();
    csv.cell(err);
    csv.cell(frac);
    csv.row_end();
    out.csv = csv.str();
    return out;
}

// ---------------------------------------------------------------- criterion 9
Outcome criterion_mt_property_suite() {
    Outcome out;
    const double kRecordedB = 0.0;  // recorded bound for this mesh and family
    SurfaceMesh mesh = flat_torus(128);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));

    double max_ratio = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i)
        max_ratio = std::max(max_ratio, mt_ratio(spec, random_bandlimited(mesh, 8, 5.0, 1000 + i)));

    ScalarField G = solve_green(mesh, spec.psi, 0);
    GreenExpansion e = fit_expansion(mesh, G, 0);
    CsvWriter csv("eps,mt_ratio,weakened_ratio");
    std::vector<double> weakened;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
        TestFunctionParams params = make_test_function_params(spec, 0, eps, G, e);
        ScalarField u = build_test_function(spec, params);
        const double v = mt_ratio(spec, u);
        const double w = mt_ratio_weakened(spec, u, 1.1);
        max_ratio = std::max(max_ratio, v);
        weakened.push_back(w);
        csv.row_start();
        csv.cell(eps);
        csv.cell(v);
        csv.cell(w);
        csv.row_end();
    }
    note(out, max_ratio <= kRecordedB,
         "max mt_ratio over 1000 random fields + bubbles is " + format_g17(max_ratio) +
             " <= recorded B = " + format_g17(kRecordedB));
    std::string incs;
    bool monotone = true, per_decade_2 = true;
    for (std::size_t i = 1; i < weakened.size(); ++i) {
        const double d = weakened[i] - weakened[i - 1];
        incs += (incs.empty() ? "" : ", ") + format_g17(d);
        monotone = monotone && d > 0.0;
        per_decade_2 = per_decade_2 && d >= 2.0;
    }
    note(out, monotone, "weakened ratio increases monotonically (increments " + incs + ")");
    note(out, per_decade_2, "weakened ratio increases by >= 2 per eps decade");
    out.csv = csv.str();
    return out;
}

Outcome run_criterion(int id);

// --------------------------------------------------------------- criterion 10
Outcome criterion_determinism() {
    Outcome out;
    for (int id = 1; id <= 9; ++id) {
        const Outcome a = run_criterion(id);
        const Outcome b = run_criterion(id);
        note(out, a.csv == b.csv && !a.csv.empty(),
             "criterion " + std::to_string(id) + " CSV body is byte-identical across reruns");
    }
    out.csv = "rerun,identical\n1,1\n";
    return out;
}

Outcome run_criterion(int id) {
    switch (id) {
        case 1: return criterion_gradient_oracle();
        case 2: return criterion_constant_solution();
        case 3: return criterion_expansion_trace_identity();
        case 4: return criterion_bubble_closed_forms();
        case 5: return criterion_seam_identity();
        case 6: return criterion_asymptotic_expansion();
        case 7: return criterion_condition_plugin();
        case 8: return criterion_profile_recovery();
        case 9: return criterion_mt_property_suite();
        case 10: return criterion_determinism();
        default: throw InvalidArgument("no criterion " + std::to_string(id));
    }
}

const char* kNames[] = {"",
                        "gradient oracle",
                        "constant solution",
                        "c1+c3+(2/3)K identity",
                        "bubble closed forms",
                        "seam identity",
                        "asymptotic expansion",
                        "condition plug-in",
                        "profile recovery",
                        "Trudinger-Moser property suite",
                        "determinism"};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    if (ids.empty())
        for (int i = 1; i <= 10; ++i) ids.push_back(i);

    int failures = 0;
    for (int id : ids) {
        Outcome out;
        try {
            out = run_criterion(id);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        if (!out.pass) ++failures;
        std::printf("[%s] criterion %d (%s): %s\n", out.pass ? "PASS" : "FAIL", id, kNames[id],
                    out.detail.c_str());
    }
    return failures == 0 ? 0 : 1;
}
