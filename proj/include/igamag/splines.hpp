#pragma once

#include <utility>
#include <vector>

namespace igamag::splines {

/// Open (clamped) knot vector on [0,1]: both end knots repeated degree+1
/// times, interior multiplicities at most the degree.
class KnotVector {
public:
    KnotVector() = default;
    KnotVector(int degree, std::vector<double> knots);

    int degree() const { return degree_; }
    const std::vector<double>& knots() const { return knots_; }
    /// Number of basis functions n = #knots - degree - 1.
    int num_funcs() const { return static_cast<int>(knots_.size()) - degree_ - 1; }

    /// Index i with knots[i] <= u < knots[i+1]; u = 1 maps to the last
    /// non-empty span.
    int find_span(double u) const;

    /// Unique knot values, in increasing order.
    std::vector<double> breakpoints() const;
    /// Multiplicity of a knot value (0 if absent).
    int multiplicity(double u) const;

    bool operator==(const KnotVector&) const = default;

    static KnotVector open_uniform(int degree, int elements);
    /// Open knot vector over given breakpoints; interior_mult[i] is the
    /// multiplicity of breakpoints[i+1] (the interior ones only).
    static KnotVector from_breakpoints(int degree, const std::vector<double>& bks,
                                       const std::vector<int>& interior_mult);
    /// One midpoint inserted per non-empty span, repeated `passes` times.
    KnotVector refined_uniform(int passes) const;

private:
    int degree_ = 0;
    std::vector<double> knots_;
};

/// The degree+1 basis functions that do not vanish at the evaluation point.
struct BasisEvaluation {
    int first = 0;                    // global index of the first function below
    std::vector<double> values;       // degree+1 entries, sum to 1
    std::vector<double> derivatives;  // first derivatives, sum to 0
};

/// Rational case has the same layout.
using WeightedBasisEvaluation = BasisEvaluation;

/// Cox-de Boor evaluation with first derivatives.
BasisEvaluation eval_bspline(const KnotVector& kv, double u);

/// NURBS basis: weighted B-splines normalised by the weight function,
/// derivatives by the quotient rule. weights.size() must equal num_funcs().
WeightedBasisEvaluation eval_nurbs(const KnotVector& kv,
                                   const std::vector<double>& weights, double u);

/// Control point in homogeneous (weighted) coordinates.
struct WPoint {
    double wx = 0, wy = 0, w = 1;
};

/// Single knot insertion (Boehm). The curve as a point set is unchanged.
/// u_new must lie strictly inside (0,1) and the resulting multiplicity must
/// not exceed the degree.
std::pair<KnotVector, std::vector<WPoint>>
insert_knot(const KnotVector& kv, const std::vector<WPoint>& row, double u_new);

}  // namespace igamag::splines
