#pragma once

#include "mtlab/surface.hpp"

namespace mtlab {

// The data of one variational problem instance.
struct ProblemSpec {
    const SurfaceMesh* mesh = nullptr;
    ScalarField psi;
    ScalarField h;
    double h_zero_tol = 0.0;
    double psi_integral = 0.0;
};

// Validates int psi != 0 and h >= 0, h not identically 0.
// h_zero_tol < 0 selects the default 1e-8 * max h.
ProblemSpec make_problem(const SurfaceMesh& mesh, ScalarField psi, ScalarField h,
                         double h_zero_tol = -1.0);

struct FunctionalValue {
    double J = 0.0;
    double dirichlet = 0.0;  // (1/2) int |grad u|^2
    double linear = 0.0;     // 8 pi (1-eps) * tilde u
    double log_term = 0.0;   // 8 pi (1-eps) * log int h e^u
    double eps = 0.0;
    double lambda = 0.0;  // int h e^u dv_g
};

// psi-weighted mean: (int psi u) / (int psi)
double tilde_mean(const ProblemSpec& spec, const ScalarField& u);

// J_eps(u) = (1/2)||grad u||^2 + 8 pi (1-eps) tilde u - 8 pi (1-eps) log int h e^u.
// eps = 0 gives the unperturbed functional.
FunctionalValue eval_J(const ProblemSpec& spec, const ScalarField& u, double eps);

// L2(dv_g) gradient of J_eps:  -Delta u + 8 pi (1-eps)(psi/int psi - h e^u / lambda).
// Vanishes exactly at solutions of the Euler-Lagrange equation; integrates to zero.
ScalarField el_residual(const ProblemSpec& spec, const ScalarField& u, double eps);

// log int e^u - ||grad u||^2/(16 pi) - tilde u; bounded above on each mesh.
double mt_ratio(const ProblemSpec& spec, const ScalarField& u);
// Same with the Dirichlet coefficient weakened to 1/(16 pi w); w>1 breaks the bound.
double mt_ratio_weakened(const ProblemSpec& spec, const ScalarField& u, double w);

// ||u - tilde u||_q / ||grad u||_q, q > 1
double poincare_ratio(const ProblemSpec& spec, const ScalarField& u, double q);

// ||u - tilde u||_p / ||grad u||_2, p >= 1
double sobolev_poincare_ratio(const ProblemSpec& spec, const ScalarField& u, double p);

// ||grad u||_q via the per-cell gradient quadrature.
double gradient_q_norm(const SurfaceMesh& mesh, const ScalarField& u, double q);

// Stable log int h e^u dv_g (max-shifted).
double log_h_exp_integral(const ProblemSpec& spec, const ScalarField& u);

}  // namespace mtlab
