#pragma once

#include <vector>

namespace igamag::quadrature {

/// Gauss-Legendre rule mapped to [0,1]; exact for polynomials of degree
/// 2n-1.
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

GaussRule gauss_legendre(int n);

}  // namespace igamag::quadrature
