#include <doctest.h>

#include <cmath>

#include "mtlab/blowup.hpp"
#include "mtlab/green.hpp"
#include "mtlab/io.hpp"
#include "mtlab/minimizer.hpp"
#include "mtlab/rng.hpp"

using namespace mtlab;

namespace {

const double kPi = 3.14159265358979323846;

SurfaceMesh flat_torus(int n) {
    return build_torus(n, [](double, double) { return 0.0; });
}

}  // namespace

TEST_CASE("minimize: constant problem converges to zero from random seeds") {
    SurfaceMesh mesh = flat_torus(64);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));
    MinimizeOptions opts;
    opts.max_iter = 200;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        ScalarField init = random_bandlimited(mesh, 4, 0.1, seed);
        MinimizerResult r = minimize(spec, 0.1, init, opts);
        CHECK(r.converged);
        CHECK(r.residual_norm <= 1e-8);
        CHECK(std::abs(r.J) <= 1e-8);
        CHECK(r.iterations <= 200);
        CHECK(std::abs(tilde_mean(spec, r.u)) <= 1e-12);
    }
    CHECK_THROWS_AS(minimize(spec, 0.0, constant_field(mesh, 0.0), opts), InvalidArgument);
}

TEST_CASE("minimize: nonconstant h, seed independence, deterministic rerun") {
    SurfaceMesh mesh = flat_torus(64);
    ScalarField h = sample(mesh, [](const std::array<double, 3>& p) {
        return 1.0 + 0.5 * std::cos(2 * kPi * p[0]);
    });
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), h);
    MinimizeOptions opts;
    opts.max_iter = 400;

    MinimizerResult a = minimize(spec, 0.2, random_bandlimited(mesh, 4, 0.1, 10), opts);
    MinimizerResult b = minimize(spec, 0.2, random_bandlimited(mesh, 4, 0.1, 20), opts);
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK(a.residual_norm <= 1e-8);
    CHECK(a.J == doctest::Approx(b.J).epsilon(1e-9));

    // residual matches an independent re-evaluation
    ScalarField r = el_residual(spec, a.u, 0.2);
    double acc = 0.0;
    for (std::size_t i = 0; i < r.values.size(); ++i)
        acc += r.values[i] * r.values[i] * mesh.area_weights[i];
    CHECK(std::sqrt(acc) == doctest::Approx(a.residual_norm).epsilon(1e-14).scale(1e-8));

    // bitwise deterministic rerun
    MinimizerResult a2 = minimize(spec, 0.2, random_bandlimited(mesh, 4, 0.1, 10), opts);
    CHECK(a2.J == a.J);
    CHECK(a2.iterations == a.iterations);
    CHECK(a2.u.values == a.u.values);
}

TEST_CASE("minimize: descent accepted steps never increase J (rounding slack)") {
    SurfaceMesh mesh = flat_torus(32);
    ScalarField h = sample(mesh, [](const std::array<double, 3>& p) {
        return 1.0 + 0.4 * std::sin(2 * kPi * p[1]);
    });
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), h);
    MinimizeOptions opts;
    opts.max_iter = 3;  // few steps; compare J against a fresh evaluation each time
    ScalarField init = random_bandlimited(mesh, 4, 0.5, 5);
    double prev = eval_J(spec, init, 0.3).J + 1e-9;
    for (int steps = 1; steps <= 4; ++steps) {
        MinimizeOptions o2;
        o2.max_iter = steps;
        o2.tol_grad = 0.0;
        MinimizerResult r = minimize(spec, 0.3, init, o2);
        CHECK(r.J <= prev + 1e-9 * (1.0 + std::abs(prev)));
        prev = r.J;
    }
}

TEST_CASE("minimize on the icosphere backend") {
    SurfaceMesh sphere = build_icosphere(3);
    ProblemSpec spec = make_problem(sphere, constant_field(sphere, 1.0),
                                    constant_field(sphere, 1.0));
    MinimizeOptions opts;
    opts.max_iter = 300;
    MinimizerResult r = minimize(spec, 0.2, random_smooth(sphere, 0.1, 13), opts);
    CHECK(r.converged);
    CHECK(r.residual_norm <= 1e-8);
    // constant minimizer: J = -8 pi (1-eps) log int h dv (volume is not 1 here)
    const double expect = -8.0 * 3.14159265358979323846 * 0.8 * std::log(sphere.total_area);
    CHECK(r.J == doctest::Approx(expect).epsilon(1e-7));

    // nonconstant h on the sphere
    ScalarField h = sample(sphere, [](const std::array<double, 3>& p) { return 1.2 + 0.5 * p[2]; });
    ProblemSpec spec2 = make_problem(sphere, constant_field(sphere, 1.0), h);
    MinimizerResult r2 = minimize(spec2, 0.2, random_smooth(sphere, 0.1, 14), opts);
    CHECK(r2.converged);
    CHECK(r2.residual_norm <= 1e-8);
}

TEST_CASE("continuation on the constant problem: Attained with J -> 0") {
    SurfaceMesh mesh = flat_torus(32);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));
    ContinuationReport rep = continuation(spec, {0.5, 0.2, 0.1, 0.05});
    CHECK(rep.verdict == Verdict::Attained);
    CHECK(std::abs(rep.records.back().J) <= 1e-8);
    for (std::size_t i = 1; i < rep.records.size(); ++i)
        CHECK(rep.records[i].eps < rep.records[i - 1].eps);

    // blowup infimum ties back to the green-module constant
    RobinField rf = robin_field(mesh, spec.psi, spec.h, default_robin_samples(mesh),
                                spec.h_zero_tol);
    CHECK(rep.blowup_infimum ==
          doctest::Approx(-8.0 * kPi - 8.0 * kPi * std::log(kPi) - 4.0 * kPi * rf.max_value)
              .epsilon(1e-12));

    CHECK_THROWS_AS(continuation(spec, {0.2, 0.2}), InvalidArgument);
    CHECK_THROWS_AS(continuation(spec, {}), InvalidArgument);

    // CSV body has the pinned header and one line per record
    const std::string csv = continuation_csv(rep);
    CHECK(csv.substr(0, 4) == "eps,");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + long(rep.records.size()));

    // warm-started J values never increase as eps decreases
    for (std::size_t i = 1; i < rep.records.size(); ++i)
        CHECK(rep.records[i].J <= rep.records[i - 1].J + 1e-10);

    // identical schedule reproduces the verdict and J values exactly
    ContinuationReport rep2 = continuation(spec, {0.5, 0.2, 0.1, 0.05});
    CHECK(rep2.verdict == rep.verdict);
    for (std::size_t i = 0; i < rep.records.size(); ++i)
        CHECK(rep2.records[i].J == rep.records[i].J);
}

TEST_CASE("attainment_gap") {
    SurfaceMesh mesh = flat_torus(32);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));
    MinimizerResult r = minimize(spec, 0.1, constant_field(mesh, 0.0));
    CHECK(r.converged);

    const double M = 1.25;
    const double blowup_level = -8.0 * kPi - 8.0 * kPi * std::log(kPi) - 4.0 * kPi * M;
    CHECK(attainment_gap(spec, r, M) == doctest::Approx(blowup_level - r.J).epsilon(1e-13));

    // at J equal to the blowup value the gap vanishes
    MinimizerResult fake = r;
    fake.J = blowup_level;
    CHECK(attainment_gap(spec, fake, M) == doctest::Approx(0.0).epsilon(1e-13).scale(1.0));

    MinimizerResult bad = r;
    bad.converged = false;
    CHECK_THROWS_AS(attainment_gap(spec, bad, M), InvalidArgument);
}

TEST_CASE("verdict rule fires Blowup on a synthetic concentrating path") {
    // records taken from the explicit concentrating family with shrinking eps:
    // gradients grow, the half-mass radius shrinks, c_eps increases strictly
    SurfaceMesh mesh = flat_torus(128);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));
    ScalarField G = solve_green(mesh, spec.psi, 0);
    GreenExpansion e = fit_expansion(mesh, G, 0);

    std::vector<ContinuationRecord> records;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        TestFunctionParams params = make_test_function_params(spec, 0, eps, G, e);
        ScalarField u = build_test_function(spec, params);
        ContinuationRecord rec;
        rec.eps = eps;
        rec.c_eps = *std::max_element(u.values.begin(), u.values.end());
        rec.grad_l2_sq = dirichlet_energy(mesh, u);
        auto mf = mass_fractions(spec, u, 0, {0.01, 0.02, 0.05, 0.1, 0.2, 0.4});
        rec.mass_radius = 0.4;
        for (const auto& [r, f] : mf)
            if (f >= 0.5) {
                rec.mass_radius = r;
                break;
            }
        rec.converged = false;
        records.push_back(rec);
    }
    CHECK(classify_verdict(records) == Verdict::Blowup);
    CHECK(records[0].c_eps < records[1].c_eps);
    CHECK(records[1].c_eps < records[2].c_eps);

    // stabilized paths classify as Attained, short ones as Undecided
    SurfaceMesh small = flat_torus(32);
    ProblemSpec spec_s = make_problem(small, constant_field(small, 1.0), constant_field(small, 1.0));
    ContinuationReport rep = continuation(spec_s, {0.4, 0.3, 0.2});
    CHECK(rep.verdict == Verdict::Attained);
    ContinuationReport two = continuation(spec_s, {0.4, 0.3});
    CHECK(two.verdict == Verdict::Undecided);
}

TEST_CASE("test-function scales: alpha grows and the neck shrinks as eps drops") {
    SurfaceMesh mesh = flat_torus(128);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));
    ScalarField G = solve_green(mesh, spec.psi, 0);
    GreenExpansion e = fit_expansion(mesh, G, 0);
    double prev_alpha = 0.0, prev_neck = 1e300;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        TestFunctionParams params = make_test_function_params(spec, 0, eps, G, e);
        CHECK(params.alpha > prev_alpha);
        CHECK(params.alpha * std::sqrt(eps) < prev_neck);
        prev_alpha = params.alpha;
        prev_neck = params.alpha * std::sqrt(eps);
    }
}
