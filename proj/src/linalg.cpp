#include "igamag/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace igamag::linalg {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> trips) {
    for (const auto& t : trips)
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw std::invalid_argument("from_triplets: index out of range");
    std::stable_sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.ptr_.assign(rows + 1, 0);
    for (size_t k = 0; k < trips.size();) {
        size_t e = k;
        double sum = 0.0;
        while (e < trips.size() && trips[e].row == trips[k].row && trips[e].col == trips[k].col)
            sum += trips[e++].val;
        m.col_.push_back(trips[k].col);
        m.val_.push_back(sum);
        ++m.ptr_[trips[k].row + 1];
        k = e;
    }
    for (int r = 0; r < rows; ++r) m.ptr_[r + 1] += m.ptr_[r];
    return m;
}

std::vector<double> SparseMatrix::spmv(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != cols_)
        throw std::invalid_argument("spmv: dimension mismatch");
    std::vector<double> y(rows_, 0.0);
    for (int r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (int k = ptr_[r]; k < ptr_[r + 1]; ++k) acc += val_[k] * x[col_[k]];
        y[r] = acc;
    }
    return y;
}

SparseMatrix SparseMatrix::transpose() const {
    std::vector<Triplet> trips;
    trips.reserve(val_.size());
    for (int r = 0; r < rows_; ++r)
        for (int k = ptr_[r]; k < ptr_[r + 1]; ++k) trips.push_back({col_[k], r, val_[k]});
    return from_triplets(cols_, rows_, std::move(trips));
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(rows_, 0.0);
    for (int r = 0; r < rows_; ++r)
        for (int k = ptr_[r]; k < ptr_[r + 1]; ++k)
            if (col_[k] == r) d[r] = val_[k];
    return d;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

SolveReport solve_spd(const SparseMatrix& A, const std::vector<double>& b,
                      std::vector<double>& x, double rtol, int max_iter) {
    const int n = A.rows();
    if (A.cols() != n || static_cast<int>(b.size()) != n)
        throw std::invalid_argument("solve_spd: dimension mismatch");
    if (x.empty()) x.assign(n, 0.0);
    if (static_cast<int>(x.size()) != n)
        throw std::invalid_argument("solve_spd: initial guess dimension mismatch");
    if (max_iter < 0) max_iter = 20 * n + 100;

    const std::vector<double> diag = A.diagonal();
    std::vector<double> inv_diag(n);
    for (int i = 0; i < n; ++i) {
        if (!(diag[i] > 0.0))
            throw std::invalid_argument("solve_spd: non-positive diagonal entry");
        inv_diag[i] = 1.0 / diag[i];
    }

    SolveReport rep;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        rep.converged = true;
        return rep;
    }

    std::vector<double> r = A.spmv(x);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    std::vector<double> z(n), p(n), best_x = x;
    double best_res = norm2(r) / bnorm;
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);

    for (int it = 0; it < max_iter; ++it) {
        const double rnorm = norm2(r) / bnorm;
        if (rnorm < best_res) {
            best_res = rnorm;
            best_x = x;
        }
        if (rnorm <= rtol) {
            rep.converged = true;
            rep.iterations = it;
            rep.rel_residual = rnorm;
            return rep;
        }
        const std::vector<double> Ap = A.spmv(p);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) break;  // not SPD or breakdown
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rep.iterations = it + 1;
    }
    std::vector<double> rr = A.spmv(x);
    for (int i = 0; i < n; ++i) rr[i] = b[i] - rr[i];
    const double final_res = norm2(rr) / bnorm;
    if (final_res <= best_res) {
        rep.rel_residual = final_res;
    } else {
        x = best_x;
        rep.rel_residual = best_res;
    }
    rep.converged = rep.rel_residual <= rtol;
    return rep;
}

}  // namespace igamag::linalg
