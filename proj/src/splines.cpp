#include "igamag/splines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace igamag::splines {

KnotVector::KnotVector(int degree, std::vector<double> knots)
    : degree_(degree), knots_(std::move(knots)) {
    if (degree_ < 0) throw std::invalid_argument("knot vector: negative degree");
    const int m = static_cast<int>(knots_.size());
    const int n = m - degree_ - 1;
    if (n < degree_ + 1)
        throw std::invalid_argument("knot vector: too few knots for degree " +
                                    std::to_string(degree_));
    for (int i = 1; i < m; ++i)
        if (knots_[i] < knots_[i - 1])
            throw std::invalid_argument("knot vector: knots must be non-decreasing");
    if (knots_.front() != 0.0 || knots_.back() != 1.0)
        throw std::invalid_argument("knot vector: parameter range must be [0,1]");
    for (int i = 0; i <= degree_; ++i)
        if (knots_[i] != 0.0 || knots_[m - 1 - i] != 1.0)
            throw std::invalid_argument("knot vector: not open (clamped)");
    if (knots_[degree_ + 1] == 0.0 || knots_[m - degree_ - 2] == 1.0)
        throw std::invalid_argument("knot vector: end knot repeated more than degree+1 times");
    // interior multiplicity <= degree
    int run = 1;
    for (int i = degree_ + 2; i < m - degree_ - 1; ++i) {
        run = (knots_[i] == knots_[i - 1]) ? run + 1 : 1;
        if (run > degree_)
            throw std::invalid_argument("knot vector: interior multiplicity exceeds degree");
    }
}

int KnotVector::find_span(double u) const {
    if (!(u >= 0.0 && u <= 1.0))
        throw std::domain_error("find_span: parameter outside [0,1]");
    const int p = degree_;
    const int n = num_funcs();
    if (u >= knots_[n]) return n - 1;  // right-endpoint convention
    int low = p, high = n, mid = (low + high) / 2;
    while (u < knots_[mid] || u >= knots_[mid + 1]) {
        if (u < knots_[mid])
            high = mid;
        else
            low = mid;
        mid = (low + high) / 2;
    }
    return mid;
}

std::vector<double> KnotVector::breakpoints() const {
    std::vector<double> bks;
    for (double k : knots_)
        if (bks.empty() || k != bks.back()) bks.push_back(k);
    return bks;
}

int KnotVector::multiplicity(double u) const {
    return static_cast<int>(std::count(knots_.begin(), knots_.end(), u));
}

KnotVector KnotVector::open_uniform(int degree, int elements) {
    if (elements < 1) throw std::invalid_argument("open_uniform: elements < 1");
    std::vector<double> knots;
    for (int i = 0; i <= degree; ++i) knots.push_back(0.0);
    for (int i = 1; i < elements; ++i)
        knots.push_back(static_cast<double>(i) / elements);
    for (int i = 0; i <= degree; ++i) knots.push_back(1.0);
    return KnotVector(degree, std::move(knots));
}

KnotVector KnotVector::from_breakpoints(int degree, const std::vector<double>& bks,
                                        const std::vector<int>& interior_mult) {
    if (bks.size() < 2 || interior_mult.size() + 2 != bks.size())
        throw std::invalid_argument("from_breakpoints: inconsistent input");
    std::vector<double> knots;
    for (int i = 0; i <= degree; ++i) knots.push_back(bks.front());
    for (size_t k = 1; k + 1 < bks.size(); ++k)
        for (int r = 0; r < interior_mult[k - 1]; ++r) knots.push_back(bks[k]);
    for (int i = 0; i <= degree; ++i) knots.push_back(bks.back());
    return KnotVector(degree, std::move(knots));
}

KnotVector KnotVector::refined_uniform(int passes) const {
    if (passes <= 0) return *this;
    KnotVector cur = *this;
    for (int pass = 0; pass < passes; ++pass) {
        std::vector<double> knots;
        const auto& U = cur.knots_;
        for (size_t i = 0; i + 1 < U.size(); ++i) {
            knots.push_back(U[i]);
            if (U[i + 1] > U[i]) knots.push_back(0.5 * (U[i] + U[i + 1]));
        }
        knots.push_back(U.back());
        cur = KnotVector(cur.degree_, std::move(knots));
    }
    return cur;
}

BasisEvaluation eval_bspline(const KnotVector& kvec, double u) {
    if (!(u >= 0.0 && u <= 1.0))
        throw std::domain_error("eval_bspline: parameter outside [0,1]");
    const int p = kvec.degree();
    const auto& U = kvec.knots();
    const int span = kvec.find_span(u);

    BasisEvaluation out;
    out.first = span - p;
    out.values.assign(p + 1, 0.0);
    out.derivatives.assign(p + 1, 0.0);

    // Cox-de Boor triangular scheme; the degree p-1 row is kept for the
    // derivative formula.
    std::vector<double> left(p + 1), right(p + 1), N(p + 1), lower;
    N[0] = 1.0;
    if (p == 1) lower = N;
    for (int j = 1; j <= p; ++j) {
        left[j] = u - U[span + 1 - j];
        right[j] = U[span + j] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double tmp = N[r] / (right[r + 1] + left[j - r]);
            N[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        N[j] = saved;
        if (j == p - 1) lower = N;  // B_{i,p-1}, i = span-p+1 .. span
    }
    out.values = N;

    if (p >= 1) {
        for (int k = 0; k <= p; ++k) {
            const int i = span - p + k;
            double t1 = 0.0, t2 = 0.0;
            if (k >= 1 && U[i + p] > U[i]) t1 = lower[k - 1] / (U[i + p] - U[i]);
            if (k <= p - 1 && U[i + p + 1] > U[i + 1])
                t2 = lower[k] / (U[i + p + 1] - U[i + 1]);
            out.derivatives[k] = p * (t1 - t2);
        }
    }
    return out;
}

WeightedBasisEvaluation eval_nurbs(const KnotVector& kv,
                                   const std::vector<double>& weights, double u) {
    if (static_cast<int>(weights.size()) != kv.num_funcs())
        throw std::invalid_argument("eval_nurbs: weight count mismatch");
    for (double w : weights)
        if (!(w > 0.0)) throw std::invalid_argument("eval_nurbs: non-positive weight");

    BasisEvaluation b = eval_bspline(kv, u);
    const int p = kv.degree();
    double W = 0.0, Wd = 0.0;
    for (int k = 0; k <= p; ++k) {
        W += weights[b.first + k] * b.values[k];
        Wd += weights[b.first + k] * b.derivatives[k];
    }
    WeightedBasisEvaluation out;
    out.first = b.first;
    out.values.assign(p + 1, 0.0);
    out.derivatives.assign(p + 1, 0.0);
    for (int k = 0; k <= p; ++k) {
        const double wi = weights[b.first + k];
        out.values[k] = wi * b.values[k] / W;
        out.derivatives[k] = wi * (b.derivatives[k] * W - b.values[k] * Wd) / (W * W);
    }
    return out;
}

std::pair<KnotVector, std::vector<WPoint>>
insert_knot(const KnotVector& kv, const std::vector<WPoint>& row, double u_new) {
    if (!(u_new > 0.0 && u_new < 1.0))
        throw std::invalid_argument("insert_knot: knot must lie strictly inside (0,1)");
    const int p = kv.degree();
    const int n = kv.num_funcs();
    if (static_cast<int>(row.size()) != n)
        throw std::invalid_argument("insert_knot: control row size mismatch");
    const int s = kv.multiplicity(u_new);
    if (s + 1 > p)
        throw std::invalid_argument("insert_knot: multiplicity would exceed degree");
    const auto& U = kv.knots();
    const int k = kv.find_span(u_new);

    std::vector<WPoint> q(n + 1);
    for (int i = 0; i <= k - p; ++i) q[i] = row[i];
    for (int i = k - s; i <= n - 1; ++i) q[i + 1] = row[i];
    for (int i = k - p + 1; i <= k - s; ++i) {
        const double a = (u_new - U[i]) / (U[i + p] - U[i]);
        q[i].wx = a * row[i].wx + (1.0 - a) * row[i - 1].wx;
        q[i].wy = a * row[i].wy + (1.0 - a) * row[i - 1].wy;
        q[i].w = a * row[i].w + (1.0 - a) * row[i - 1].w;
    }

    std::vector<double> knots(U);
    knots.insert(knots.begin() + k + 1, u_new);
    return {KnotVector(p, std::move(knots)), std::move(q)};
}

}  // namespace igamag::splines
