#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridflex {

using Vector = std::vector<double>;
using Complex = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Error raised by any gridflex component; carries a plain message.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class SingularMatrixError : public Error {
public:
    explicit SingularMatrixError(const std::string& what) : Error(what) {}
};

/// Dense row-major matrix. Sized for desk-scale problems; no sparsity.
template <typename T>
class BasicMatrix {
public:
    BasicMatrix() = default;
    BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static BasicMatrix identity(std::size_t n) {
        BasicMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    T* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const T* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    void append_row(const std::vector<T>& row) {
        if (cols_ == 0) cols_ = row.size();
        if (row.size() != cols_) throw Error("append_row: column count mismatch");
        data_.insert(data_.end(), row.begin(), row.end());
        ++rows_;
    }

    std::vector<T> row(std::size_t r) const {
        return std::vector<T>(row_ptr(r), row_ptr(r) + cols_);
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using ComplexMatrix = BasicMatrix<Complex>;

/// Square system A x = b.
struct LinearSystem {
    Matrix a;
    Vector b;
};

/// LU factors of a square matrix with partial pivoting (row permutation).
struct LuFactors {
    Matrix lu;
    std::vector<int> perm;
};

/// Factor a square matrix; throws SingularMatrixError when a pivot falls
/// below 1e-12 in magnitude relative to the matrix scale.
LuFactors lu_factor(const Matrix& a);

Vector lu_solve(const LuFactors& f, const Vector& b);
Vector lu_solve(const LinearSystem& sys);
Vector lu_solve(const Matrix& a, const Vector& b);

// Vector helpers.
double dot(const Vector& a, const Vector& b);
double norm_inf(const Vector& v);
Vector mat_vec(const Matrix& a, const Vector& x);
Vector mat_transpose_vec(const Matrix& a, const Vector& x);

}  // namespace gridflex
