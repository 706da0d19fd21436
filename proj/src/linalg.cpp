#include "gridflex/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace gridflex {

LuFactors lu_factor(const Matrix& a) {
    if (a.rows() != a.cols()) throw Error("lu_factor: matrix not square");
    const std::size_t n = a.rows();
    LuFactors f;
    f.lu = a;
    f.perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.perm[i] = static_cast<int>(i);

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
    const double pivot_tol = 1e-12 * std::max(1.0, scale);

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(f.lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(f.lu(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best <= pivot_tol)
            throw SingularMatrixError("lu_factor: singular matrix (pivot " +
                                      std::to_string(best) + " at column " + std::to_string(k) + ")");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
        }
        const double inv_pivot = 1.0 / f.lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = f.lu(i, k) * inv_pivot;
            f.lu(i, k) = m;
            if (m == 0.0) continue;
            const double* rk = f.lu.row_ptr(k);
            double* ri = f.lu.row_ptr(i);
            for (std::size_t j = k + 1; j < n; ++j) ri[j] -= m * rk[j];
        }
    }
    return f;
}

Vector lu_solve(const LuFactors& f, const Vector& b) {
    const std::size_t n = f.lu.rows();
    if (b.size() != n) throw Error("lu_solve: dimension mismatch");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[static_cast<std::size_t>(f.perm[i])];
    // forward substitution (unit lower triangle)
    for (std::size_t i = 1; i < n; ++i) {
        double s = x[i];
        const double* ri = f.lu.row_ptr(i);
        for (std::size_t j = 0; j < i; ++j) s -= ri[j] * x[j];
        x[i] = s;
    }
    // back substitution
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        const double* ri = f.lu.row_ptr(ii);
        for (std::size_t j = ii + 1; j < n; ++j) s -= ri[j] * x[j];
        x[ii] = s / ri[ii];
    }
    return x;
}

Vector lu_solve(const LinearSystem& sys) { return lu_solve(lu_factor(sys.a), sys.b); }

Vector lu_solve(const Matrix& a, const Vector& b) { return lu_solve(lu_factor(a), b); }

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm_inf(const Vector& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

Vector mat_vec(const Matrix& a, const Vector& x) {
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ri = a.row_ptr(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += ri[j] * x[j];
        y[i] = s;
    }
    return y;
}

Vector mat_transpose_vec(const Matrix& a, const Vector& x) {
    Vector y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ri = a.row_ptr(i);
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t j = 0; j < a.cols(); ++j) y[j] += ri[j] * xi;
    }
    return y;
}

}  // namespace gridflex
