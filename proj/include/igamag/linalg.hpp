#pragma once

#include <vector>

namespace igamag::linalg {

struct Triplet {
    int row, col;
    double val;
};

/// Compressed sparse row matrix; column indices strictly increasing within
/// each row, duplicates summed at construction.
class SparseMatrix {
public:
    SparseMatrix() = default;
    static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> trips);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const std::vector<int>& row_ptr() const { return ptr_; }
    const std::vector<int>& col_idx() const { return col_; }
    const std::vector<double>& values() const { return val_; }

    /// y = A x, deterministic summation order within each row.
    std::vector<double> spmv(const std::vector<double>& x) const;

    SparseMatrix transpose() const;
    std::vector<double> diagonal() const;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<int> ptr_{0};
    std::vector<int> col_;
    std::vector<double> val_;
};

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    double rel_residual = 0.0;  // achieved |b - Ax| / |b|
};

/// Conjugate gradients with diagonal (Jacobi) preconditioning for symmetric
/// positive definite systems. x is used as the initial guess and carries the
/// best iterate on return (even when max_iter is exceeded).
SolveReport solve_spd(const SparseMatrix& A, const std::vector<double>& b,
                      std::vector<double>& x, double rtol = 1e-12,
                      int max_iter = -1);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);

}  // namespace igamag::linalg
