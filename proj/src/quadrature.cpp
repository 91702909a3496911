#include "igamag/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace igamag::quadrature {

// Nodes by Newton iteration on the Legendre polynomial, then mapped from
// [-1,1] to [0,1].
GaussRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    GaussRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.x[i] = 0.5 * (1.0 - z);
        rule.x[n - 1 - i] = 0.5 * (1.0 + z);
        rule.w[i] = 0.5 * w;
        rule.w[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

}  // namespace igamag::quadrature
