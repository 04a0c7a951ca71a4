#pragma once

#include <map>
#include <vector>

#include "mtlab/functional.hpp"
#include "mtlab/green.hpp"

namespace mtlab {

// Entire-plane bubble phi0(x) = -2 log(1 + pi h_p |x|^2); solves
// Delta phi0 = -8 pi h_p e^{phi0}, phi0(0) = 0, unit h_p e^{phi0} mass.
double bubble(double h_p, double x1, double x2);
double bubble_radial(double h_p, double r);

// int_{B_R} h_p e^{phi0} dx by composite-Simpson radial quadrature, and its
// closed form pi h_p R^2 / (1 + pi h_p R^2).
double bubble_mass_quadrature(double h_p, double R, int panels = 4096);
double bubble_mass_closed_form(double h_p, double R);

// max over a radial grid of |Delta phi0 + 8 pi h_p e^{phi0}| with second-order
// finite differences; O(grid spacing^2).
double bubble_pde_residual_max(double h_p, double R, int grid);

// Parameters of the explicit concentrating family.
struct TestFunctionParams {
    int p = 0;
    double eps = 0.0;
    double alpha = 0.0;  // (eps log(-log eps))^{-1/4}
    double C_eps = 0.0;  // -2 log((alpha^2+1)/alpha^2) - A_p
    GreenExpansion expansion;
    ScalarField G_p;
};

TestFunctionParams make_test_function_params(const ProblemSpec& spec, int p, double eps);
TestFunctionParams make_test_function_params(const ProblemSpec& spec, int p, double eps,
                                             ScalarField G, GreenExpansion expansion);

// Piecewise family: bubble core for r <= a sqrt(eps), cutoff-blended Green
// function for a sqrt(eps) <= r <= 2 a sqrt(eps), Green function outside.
// Continuous at the seam by the choice of C_eps.
ScalarField build_test_function(const ProblemSpec& spec, const TestFunctionParams& params);

// The two closed-form branch values at a seam point (used to pin continuity).
double inner_branch_value(const TestFunctionParams& params, double r, double theta);
double expansion_branch_value(const TestFunctionParams& params, double r, double theta);

double eval_test_function_J(const ProblemSpec& spec, const TestFunctionParams& params);

// Bracket multiplying -16 pi^2 eps(-log eps) in the expansion of J(phi_eps).
double asymptotic_bracket(double psi_p_over_int, double K_p, const GreenExpansion& expansion,
                          const LocalJet& h_jet);

// Full second-order prediction of J(phi_eps), the o(.) term dropped.
double asymptotic_J(const ProblemSpec& spec, int p, const LocalJet& h_jet, const LocalJet& psi_jet,
                    const GreenExpansion& expansion, double K_p, double eps);

// Margin of the sufficient existence condition at p; positive means the
// condition holds. Equals 8 pi h(p) times the asymptotic bracket.
double condition_margin(const ProblemSpec& spec, int p, const LocalJet& h_jet,
                        const GreenExpansion& expansion, double K_p);

// sup over nodes within |x| <= R (rescaled by r_eps) of |u(x)-c_eps - phi0|.
double rescaled_profile_error(const ProblemSpec& spec, const ScalarField& u, int center,
                              double h_center, double R);

// fraction of int h e^u mass within each radius of the center
std::map<double, double> mass_fractions(const ProblemSpec& spec, const ScalarField& u, int center,
                                        const std::vector<double>& radii);

// Most negative margin of u - G_center >= -c_eps + 2 log lambda - 2 log pi
// - 2 log h_p - A_p over nodes outside B_{R r_eps}; reported, not asserted.
double lower_bound_check(const ProblemSpec& spec, const ScalarField& u, int center,
                         const ScalarField& G_center, const GreenExpansion& expansion, double h_p,
                         double R);

struct BlowupReport {
    int center = 0;
    double c_eps = 0.0;
    double lambda_eps = 0.0;
    double r_eps = 0.0;  // sqrt(lambda) e^{-c/2}
    double profile_sup_error = 0.0;
    std::map<double, double> mass_fraction;
    double lower_bound_violation = 0.0;
};

BlowupReport make_blowup_report(const ProblemSpec& spec, const ScalarField& u, int center,
                                const ScalarField& G_center, const GreenExpansion& expansion,
                                double h_center, double profile_R,
                                const std::vector<double>& mass_radii, double lower_R);

}  // namespace mtlab
