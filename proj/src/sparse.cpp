#include "mtlab/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "mtlab/errors.hpp"

namespace mtlab {

void CsrMatrix::multiply(const double* x, double* y) const {
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) acc += val[k] * x[col[k]];
        y[i] = acc;
    }
}

CsrMatrix csr_from_triplets(int n, std::vector<Triplet> trips) {
    std::sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    CsrMatrix m;
    m.n = n;
    m.row_ptr.assign(n + 1, 0);
    for (std::size_t k = 0; k < trips.size();) {
        std::size_t k2 = k;
        double acc = 0.0;
        while (k2 < trips.size() && trips[k2].i == trips[k].i && trips[k2].j == trips[k].j) {
            acc += trips[k2].v;
            ++k2;
        }
        m.col.push_back(trips[k].j);
        m.val.push_back(acc);
        m.row_ptr[trips[k].i + 1]++;
        k = k2;
    }
    for (int i = 0; i < n; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
}

int pcg(const std::function<void(const double*, double*)>& apply_A,
        const std::function<void(const double*, double*)>& apply_Minv,
        const std::vector<double>& b, std::vector<double>& x, double rel_tol, int max_iter) {
    const std::size_t n = b.size();
    if (x.size() != n) x.assign(n, 0.0);
    auto dot = [n](const std::vector<double>& a, const std::vector<double>& c) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * c[i];
        return s;
    };
    std::vector<double> r(n), z(n), p(n), Ap(n);
    apply_A(x.data(), Ap.data());
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        return 0;
    }
    apply_Minv(r.data(), z.data());
    p = z;
    double rz = dot(r, z);
    for (int it = 0; it < max_iter; ++it) {
        if (std::sqrt(dot(r, r)) <= rel_tol * bnorm) return it;
        apply_A(p.data(), Ap.data());
        const double alpha = rz / dot(p, Ap);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        apply_Minv(r.data(), z.data());
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (std::sqrt(dot(r, r)) <= rel_tol * bnorm) return max_iter;
    throw NumericError("pcg: no convergence within iteration budget");
}

}  // namespace mtlab
