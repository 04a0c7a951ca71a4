#include <doctest.h>

#include <cmath>

#include "mtlab/errors.hpp"
#include "mtlab/functional.hpp"
#include "mtlab/rng.hpp"

using namespace mtlab;

namespace {

const double kPi = 3.14159265358979323846;

SurfaceMesh flat_torus(int n) {
    return build_torus(n, [](double, double) { return 0.0; });
}

ScalarField cos_x(const SurfaceMesh& mesh) {
    return sample(mesh, [](const std::array<double, 3>& p) { return std::cos(2 * kPi * p[0]); });
}

double inner(const ProblemSpec& spec, const ScalarField& a, const ScalarField& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        acc += a.values[i] * b.values[i] * spec.mesh->area_weights[i];
    return acc;
}

}  // namespace

TEST_CASE("make_problem validates the standing hypotheses") {
    SurfaceMesh mesh = flat_torus(32);
    CHECK_THROWS_AS(make_problem(mesh, cos_x(mesh), constant_field(mesh, 1.0)), InvalidWeight);
    CHECK_THROWS_AS(make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, -1.0)),
                    InvalidArgument);
    CHECK_THROWS_AS(make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 0.0)),
                    InvalidArgument);
    ProblemSpec ok = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 2.0));
    CHECK(ok.psi_integral == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ok.h_zero_tol == doctest::Approx(2e-8).epsilon(1e-12));
}

TEST_CASE("tilde_mean") {
    SurfaceMesh mesh = flat_torus(64);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));
    CHECK(tilde_mean(spec, constant_field(mesh, 3.7)) == doctest::Approx(3.7).epsilon(1e-13));
    CHECK(std::abs(tilde_mean(spec, cos_x(mesh))) < 1e-14);

    ScalarField psi = sample(mesh, [](const std::array<double, 3>& p) {
        return 1.0 + std::cos(2 * kPi * p[0]);
    });
    ProblemSpec spec2 = make_problem(mesh, psi, constant_field(mesh, 1.0));
    CHECK(tilde_mean(spec2, cos_x(mesh)) == doctest::Approx(0.5).epsilon(1e-13));

    // linearity and centering
    ScalarField u = random_smooth(mesh, 2.0, 5);
    const double tm = tilde_mean(spec2, u);
    ScalarField centered = u;
    for (double& v : centered.values) v -= tm;
    CHECK(std::abs(tilde_mean(spec2, centered)) < 1e-12);
}

TEST_CASE("eval_J: zero point, decomposition, shift invariance") {
    SurfaceMesh mesh = flat_torus(64);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));

    FunctionalValue v0 = eval_J(spec, constant_field(mesh, 0.0), 0.0);
    CHECK(std::abs(v0.J) < 1e-14);
    CHECK(v0.lambda == doctest::Approx(1.0).epsilon(1e-14));

    // J(0) = -8 pi (1-eps) log int h dv_g
    ScalarField h = sample(mesh, [](const std::array<double, 3>& p) {
        return 1.0 + 0.3 * std::sin(2 * kPi * p[1]);
    });
    ProblemSpec spec_h = make_problem(mesh, constant_field(mesh, 1.0), h);
    for (double eps : {0.0, 0.2, 0.7}) {
        FunctionalValue v = eval_J(spec_h, constant_field(mesh, 0.0), eps);
        CHECK(v.J == doctest::Approx(-8.0 * kPi * (1.0 - eps) * std::log(integrate(mesh, h)))
                         .epsilon(1e-12));
    }

    ScalarField u = random_smooth(mesh, 2.0, 9);
    FunctionalValue a = eval_J(spec_h, u, 0.3);
    CHECK(a.J == doctest::Approx(a.dirichlet + a.linear - a.log_term).epsilon(1e-12));
    CHECK(a.lambda > 0.0);

    for (double c : {17.3, -50.0, 50.0}) {
        ScalarField shifted = u;
        for (double& w : shifted.values) w += c;
        FunctionalValue b = eval_J(spec_h, shifted, 0.3);
        CHECK(b.J == doctest::Approx(a.J).epsilon(1e-9));
    }

    CHECK_THROWS_AS(eval_J(spec, u, 1.0), InvalidArgument);
    CHECK_THROWS_AS(eval_J(spec, u, -0.1), InvalidArgument);
}

TEST_CASE("el_residual: constant solution and zero mean") {
    SurfaceMesh mesh = flat_torus(64);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));
    for (double eps : {0.0, 0.1, 0.5}) {
        ScalarField r = el_residual(spec, constant_field(mesh, 0.0), eps);
        for (double v : r.values) CHECK(std::abs(v) < 1e-12);
    }

    ScalarField psi = sample(mesh, [](const std::array<double, 3>& p) {
        return 1.0 + 0.5 * std::cos(2 * kPi * p[0]);
    });
    ScalarField h = sample(mesh, [](const std::array<double, 3>& p) {
        return 1.0 + 0.3 * std::sin(2 * kPi * p[1]);
    });
    ProblemSpec spec2 = make_problem(mesh, psi, h);
    ScalarField u = random_smooth(mesh, 1.5, 21);
    ScalarField r = el_residual(spec2, u, 0.1);
    double l1 = 0.0;
    for (std::size_t i = 0; i < r.values.size(); ++i)
        l1 += std::abs(r.values[i]) * mesh.area_weights[i];
    CHECK(std::abs(integrate(mesh, r)) < 1e-11 * l1);
}

TEST_CASE("el_residual is the finite-difference gradient of J") {
    SurfaceMesh mesh = flat_torus(32);
    ScalarField psi = sample(mesh, [](const std::array<double, 3>& p) {
        return 1.0 + 0.5 * std::cos(2 * kPi * p[0]);
    });
    ScalarField h = sample(mesh, [](const std::array<double, 3>& p) {
        return 1.0 + 0.3 * std::sin(2 * kPi * p[1]);
    });
    ProblemSpec spec = make_problem(mesh, psi, h);
    const double eps = 0.1;
    ScalarField u = random_smooth(mesh, 1.0, 3);
    ScalarField v = random_smooth(mesh, 1.0, 4);
    ScalarField r = el_residual(spec, u, eps);
    const double predicted = inner(spec, r, v);

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
    CHECK(errs[1] < 0.05 * errs[0]);   // at least slope ~2 per decade
    CHECK(errs[1] > 0.001 * errs[0]);  // and not slope 3
    CHECK(errs[2] < 1e-6 * std::abs(predicted));
}

TEST_CASE("mt_ratio basics") {
    SurfaceMesh mesh = flat_torus(64);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));
    CHECK(std::abs(mt_ratio(spec, constant_field(mesh, 0.0))) < 1e-14);
    CHECK(mt_ratio(spec, constant_field(mesh, 7.0)) ==
          doctest::Approx(mt_ratio(spec, constant_field(mesh, 0.0))).epsilon(1e-12).scale(1.0));

    ScalarField u = random_smooth(mesh, 3.0, 77);
    ScalarField shifted = u;
    for (double& w : shifted.values) w += 17.3;
    CHECK(mt_ratio(spec, shifted) == doctest::Approx(mt_ratio(spec, u)).epsilon(1e-9));

    // weakening the coefficient can only increase the ratio
    CHECK(mt_ratio_weakened(spec, u, 1.1) >= mt_ratio(spec, u));

    // a quick bounded sweep; the full 1000-field bound lives in the acceptance suite
    double worst = -1e300;
    for (int s = 0; s < 50; ++s)
        worst = std::max(worst, mt_ratio(spec, random_bandlimited(mesh, 4, 5.0, 100 + s)));
    CHECK(worst < 0.0);
}

TEST_CASE("gradient 2-norm agrees with the Dirichlet energy route") {
    // two algebraic routes to the same quantity: per-cell gradients vs the
    // spectral/stiffness energy
    SurfaceMesh torus = build_torus(64, [](double x, double) { return 0.1 * std::cos(2 * kPi * x); });
    ScalarField u = random_smooth(torus, 1.0, 31);
    const double via_cells = gradient_q_norm(torus, u, 2.0);
    CHECK(via_cells * via_cells == doctest::Approx(dirichlet_energy(torus, u)).epsilon(1e-10));

    SurfaceMesh sphere = build_icosphere(3);
    ScalarField v = random_smooth(sphere, 1.0, 32);
    const double via_tris = gradient_q_norm(sphere, v, 2.0);
    CHECK(via_tris * via_tris == doctest::Approx(dirichlet_energy(sphere, v)).epsilon(1e-10));
}

TEST_CASE("poincare and sobolev-poincare ratios") {
    SurfaceMesh mesh = flat_torus(64);
    ProblemSpec spec = make_problem(mesh, constant_field(mesh, 1.0), constant_field(mesh, 1.0));
    ScalarField u = cos_x(mesh);

    CHECK(poincare_ratio(spec, u, 2.0) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-10));
    CHECK(sobolev_poincare_ratio(spec, u, 2.0) ==
          doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-10));

    ScalarField u3 = u;
    for (double& v : u3.values) v *= 3.0;
    CHECK(poincare_ratio(spec, u3, 1.4) ==
          doctest::Approx(poincare_ratio(spec, u, 1.4)).epsilon(1e-12));
    CHECK(sobolev_poincare_ratio(spec, u3, 4.0) ==
          doctest::Approx(sobolev_poincare_ratio(spec, u, 4.0)).epsilon(1e-12));

    CHECK_THROWS_AS(poincare_ratio(spec, constant_field(mesh, 2.0), 2.0), DegenerateInput);
    CHECK_THROWS_AS(poincare_ratio(spec, u, 1.0), InvalidArgument);
    CHECK_THROWS_AS(sobolev_poincare_ratio(spec, u, 0.5), InvalidArgument);

    // refinement stability within 10%
    auto f = [](const std::array<double, 3>& p) {
        return std::sin(2 * kPi * p[0]) * std::exp(0.2 * std::cos(2 * kPi * p[1]));
    };
    SurfaceMesh fine = flat_torus(128);
    ProblemSpec spec_f = make_problem(fine, constant_field(fine, 1.0), constant_field(fine, 1.0));
    const double pr_c = poincare_ratio(spec, sample(mesh, f), 1.5);
    const double pr_f = poincare_ratio(spec_f, sample(fine, f), 1.5);
    CHECK(std::abs(pr_f - pr_c) <= 0.1 * pr_c);
    const double sp_c = sobolev_poincare_ratio(spec, sample(mesh, f), 4.0);
    const double sp_f = sobolev_poincare_ratio(spec_f, sample(fine, f), 4.0);
    CHECK(std::abs(sp_f - sp_c) <= 0.1 * sp_c);
}
