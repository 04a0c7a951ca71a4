#pragma once

#include <map>
#include <vector>

#include "mtlab/errors.hpp"
#include "mtlab/functional.hpp"

namespace mtlab {

struct MinimizeOptions {
    double tol_grad = 1e-8;
    int max_iter = 500;
    double step0 = 1.0;
};

struct MinimizerResult {
    ScalarField u;  // projected: tilde u = 0
    double J = 0.0;
    double eps = 0.0;
    double residual_norm = 0.0;  // sqrt(int r^2 dv_g)
    int iterations = 0;
    bool converged = false;
    int line_search_backtracks = 0;
};

// Line search collapsed; carries the best iterate found.
struct StagnationError : Error {
    MinimizerResult best;
    explicit StagnationError(MinimizerResult b)
        : Error("minimize: line search stagnated"), best(std::move(b)) {}
};

// Preconditioned projected descent on J_eps over {tilde u = 0}:
// direction -(kappa I - Delta_g)^{-1} grad J, kappa = 1, Armijo backtracking.
MinimizerResult minimize(const ProblemSpec& spec, double eps, const ScalarField& init,
                         const MinimizeOptions& opts = {});

enum class Verdict { Attained, Blowup, Undecided };

struct ContinuationRecord {
    double eps = 0.0;
    double J = 0.0;
    double c_eps = 0.0;  // max u
    int x_eps = 0;       // argmax node
    double lambda_eps = 0.0;
    double grad_l2_sq = 0.0;
    std::map<double, double> grad_q_norms;  // q in {1.2, 1.5, 1.8}
    double mass_radius = 0.0;               // smallest r holding half the h e^u mass
    bool converged = false;
};

struct ContinuationReport {
    std::vector<ContinuationRecord> records;
    Verdict verdict = Verdict::Undecided;
    double blowup_infimum = 0.0;  // -8 pi - 8 pi log pi - 4 pi max(2 log h + A)
};

// Warm-started minimization along a strictly decreasing eps schedule.
ContinuationReport continuation(const ProblemSpec& spec, const std::vector<double>& eps_schedule,
                                const MinimizeOptions& opts = {});

// Verdict policy over the last three records: Attained when grad_l2_sq has
// stabilized (within 2%) and the final record converged; Blowup when
// grad_l2_sq grows and mass_radius shrinks strictly; otherwise Undecided.
Verdict classify_verdict(const std::vector<ContinuationRecord>& records);

// (-8 pi - 8 pi log pi - 4 pi M) - result.J; positive means the minimizer
// beats the blowup energy level.
double attainment_gap(const ProblemSpec& spec, const MinimizerResult& result, double M);

const char* verdict_name(Verdict v);

}  // namespace mtlab
