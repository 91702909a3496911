#pragma once

// Shared fixtures and independent reference implementations for the test
// suites. The evaluators here follow the recursive definitions directly and
// deliberately share no code with the library paths they check.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "igamag/geometry.hpp"

namespace testutil {

// B_{i,0} with the right-endpoint closure on the last non-empty span
inline double bspline_rec(const std::vector<double>& U, int i, int p, double u) {
    if (p == 0) {
        if (U[i] <= u && u < U[i + 1]) return 1.0;
        if (u == U.back() && U[i] < U[i + 1] && U[i + 1] == U.back()) return 1.0;
        return 0.0;
    }
    double left = 0.0, right = 0.0;
    if (U[i + p] > U[i])
        left = (u - U[i]) / (U[i + p] - U[i]) * bspline_rec(U, i, p - 1, u);
    if (U[i + p + 1] > U[i + 1])
        right = (U[i + p + 1] - u) / (U[i + p + 1] - U[i + 1]) *
                bspline_rec(U, i + 1, p - 1, u);
    return left + right;
}

inline double bspline_rec_deriv(const std::vector<double>& U, int i, int p, double u) {
    if (p == 0) return 0.0;
    double left = 0.0, right = 0.0;
    if (U[i + p] > U[i]) left = p / (U[i + p] - U[i]) * bspline_rec(U, i, p - 1, u);
    if (U[i + p + 1] > U[i + 1])
        right = p / (U[i + p + 1] - U[i + 1]) * bspline_rec(U, i + 1, p - 1, u);
    return left - right;
}

// direct evaluation of the rational map and its parametric gradient from the
// recursive basis, for use as an assembly oracle
struct OracleMap {
    double x, y;
    double xu, xv, yu, yv;
    double det() const { return xu * yv - xv * yu; }
};

inline OracleMap oracle_map(const igamag::geom::Patch& p, double u, double v) {
    const auto& Uu = p.ku.knots();
    const auto& Uv = p.kv.knots();
    const int nu = p.net.nu, nv = p.net.nv;
    double S[2] = {0, 0}, Su[2] = {0, 0}, Sv[2] = {0, 0}, W = 0, Wu = 0, Wv = 0;
    for (int j = 0; j < nv; ++j) {
        const double bv = bspline_rec(Uv, j, p.kv.degree(), v);
        const double dv = bspline_rec_deriv(Uv, j, p.kv.degree(), v);
        for (int i = 0; i < nu; ++i) {
            const double bu = bspline_rec(Uu, i, p.ku.degree(), u);
            const double du = bspline_rec_deriv(Uu, i, p.ku.degree(), u);
            const double w = p.net.weight(i, j);
            const auto& pt = p.net.at(i, j);
            S[0] += w * pt.x * bu * bv;
            S[1] += w * pt.y * bu * bv;
            Su[0] += w * pt.x * du * bv;
            Su[1] += w * pt.y * du * bv;
            Sv[0] += w * pt.x * bu * dv;
            Sv[1] += w * pt.y * bu * dv;
            W += w * bu * bv;
            Wu += w * du * bv;
            Wv += w * bu * dv;
        }
    }
    OracleMap m;
    m.x = S[0] / W;
    m.y = S[1] / W;
    m.xu = (Su[0] - m.x * Wu) / W;
    m.yu = (Su[1] - m.y * Wu) / W;
    m.xv = (Sv[0] - m.x * Wv) / W;
    m.yv = (Sv[1] - m.y * Wv) / W;
    return m;
}

// single-patch model with uniform edge tags and one material
inline igamag::geom::MultiPatchModel
single_patch_model(igamag::geom::Patch patch, igamag::geom::EdgeTag all_edges,
                   igamag::geom::Material mat = {}) {
    igamag::geom::MultiPatchModel m;
    m.pole_count = 2;
    patch.region = patch.region.empty() ? "mat" : patch.region;
    m.materials[patch.region] = mat;
    m.subdomain.push_back(igamag::geom::Subdomain::Rotor);
    m.edge_tags.push_back({all_edges, all_edges, all_edges, all_edges});
    m.patches.push_back(std::move(patch));
    return m;
}

inline igamag::geom::Patch unit_square_patch() {
    igamag::geom::Patch p;
    p.ku = igamag::splines::KnotVector(1, {0, 0, 1, 1});
    p.kv = igamag::splines::KnotVector(1, {0, 0, 1, 1});
    p.net.nu = p.net.nv = 2;
    p.net.pts = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    p.net.w = {1, 1, 1, 1};
    p.region = "mat";
    return p;
}

// distorted single patch with rational weights; Jacobian stays positive for
// the given perturbation size
inline igamag::geom::Patch random_patch(unsigned seed, double wobble = 0.12) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dp(-wobble, wobble);
    std::uniform_real_distribution<double> dw(0.8, 1.3);
    igamag::geom::Patch p;
    p.ku = igamag::splines::KnotVector(2, {0, 0, 0, 0.5, 1, 1, 1});
    p.kv = igamag::splines::KnotVector(2, {0, 0, 0, 0.4, 1, 1, 1});
    const int n = 4;
    p.net.nu = p.net.nv = n;
    p.net.pts.resize(n * n);
    p.net.w.resize(n * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double h = 1.0 / (n - 1);
            p.net.at(i, j) = {i * h + dp(rng) * h, j * h + dp(rng) * h};
            p.net.w[j * n + i] = dw(rng);
        }
    p.region = "mat";
    return p;
}

// two-subdomain annulus sector model with a conforming interface circle:
// rotor rings [r0,r1],[r1,r2] and stator rings [r2,r3],[r3,r4], the same
// angular segments everywhere, anti-periodic sides, Dirichlet at r0 and r4
inline igamag::geom::MultiPatchModel conforming_ring_model(bool with_magnet = true) {
    using namespace igamag::geom;
    MultiPatchModel m;
    m.pole_count = 6;
    m.axial_length = 0.1;
    const double deg = std::numbers::pi / 180.0;
    const std::vector<double> angles = {0, 20, 40, 60};
    const double r0 = 0.03, r1 = 0.04, r2 = 0.0465, r3 = 0.055, r4 = 0.07;

    m.materials["air"] = {kNu0, {0, 0}, 0.0};
    m.materials["magnet"] = {kNu0 / 1.05,
                             with_magnet ? Point2{0.0, 8e5} : Point2{0.0, 0.0}, 0.0};
    m.materials["iron"] = {kNu0 / 1000.0, {0, 0}, 0.0};

    auto ring = [&](Subdomain sd, double ra, double rb, const char* region, bool din,
                    bool dout, bool ag_in, bool ag_out) {
        for (size_t s = 0; s + 1 < angles.size(); ++s) {
            m.patches.push_back(
                make_annular_patch(ra, rb, angles[s] * deg, angles[s + 1] * deg, region));
            m.subdomain.push_back(sd);
            // u0/u1 are the circles, v0/v1 the radial cuts
            std::array<EdgeTag, 4> tags{EdgeTag::None, EdgeTag::None, EdgeTag::None,
                                        EdgeTag::None};
            if (s == 0) tags[static_cast<int>(Side::V0)] = EdgeTag::Right;
            if (s + 2 == angles.size()) tags[static_cast<int>(Side::V1)] = EdgeTag::Left;
            if (din) tags[static_cast<int>(Side::U0)] = EdgeTag::Dirichlet;
            if (dout) tags[static_cast<int>(Side::U1)] = EdgeTag::Dirichlet;
            if (ag_in) tags[static_cast<int>(Side::U0)] = EdgeTag::AirGap;
            if (ag_out) tags[static_cast<int>(Side::U1)] = EdgeTag::AirGap;
            m.edge_tags.push_back(tags);
        }
    };
    ring(Subdomain::Rotor, r0, r1, "magnet", true, false, false, false);
    ring(Subdomain::Rotor, r1, r2, "air", false, false, false, true);
    ring(Subdomain::Stator, r2, r3, "air", false, false, true, false);
    ring(Subdomain::Stator, r3, r4, "iron", false, true, false, false);
    return m;
}

}  // namespace testutil
