#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace mtlab {

// Compressed-row sparse matrix (square, symmetric use only here).
struct CsrMatrix {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    void multiply(const double* x, double* y) const;
};

struct Triplet {
    int i, j;
    double v;
};

CsrMatrix csr_from_triplets(int n, std::vector<Triplet> trips);

// Preconditioned conjugate gradient for an SPD operator given as a callback.
// Returns the iteration count; throws NumericError if max_iter is exhausted.
int pcg(const std::function<void(const double*, double*)>& apply_A,
        const std::function<void(const double*, double*)>& apply_Minv,
        const std::vector<double>& b, std::vector<double>& x, double rel_tol, int max_iter);

}  // namespace mtlab
