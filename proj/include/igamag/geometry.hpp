#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "igamag/splines.hpp"

namespace igamag::geom {

struct Point2 {
    double x = 0, y = 0;
};

inline Point2 rotated(const Point2& p, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Rectangular grid of weighted control points, u-index fastest.
struct ControlNet {
    int nu = 0, nv = 0;
    std::vector<Point2> pts;
    std::vector<double> w;

    const Point2& at(int i, int j) const { return pts[j * nu + i]; }
    Point2& at(int i, int j) { return pts[j * nu + i]; }
    double weight(int i, int j) const { return w[j * nu + i]; }
};

/// NURBS curve in the plane.
struct Curve {
    splines::KnotVector kv;
    std::vector<Point2> pts;
    std::vector<double> w;
};

/// Tensor-product NURBS patch, the image of [0,1]^2.
struct Patch {
    splines::KnotVector ku, kv;
    ControlNet net;
    std::string region;
};

struct MapEval {
    Point2 x;
    double J[2][2];  // d(x,y)/d(u,v), column k = derivative in direction k
    double det() const { return J[0][0] * J[1][1] - J[0][1] * J[1][0]; }
};

/// Evaluate the patch map and its Jacobian.
MapEval eval_map(const Patch& patch, double u, double v);

/// Point and tangent of a NURBS curve.
void eval_curve(const Curve& c, double u, Point2& x, Point2& dx);

enum class Side { U0 = 0, U1 = 1, V0 = 2, V1 = 3 };
enum class EdgeTag { None = 0, Dirichlet, Left, Right, AirGap };
enum class Subdomain { Rotor = 0, Stator = 1 };

const char* to_string(Side s);
const char* to_string(EdgeTag t);
const char* to_string(Subdomain s);

/// Map a coordinate along an edge to the patch parameter pair.
inline void edge_param(Side s, double t, double& u, double& v) {
    switch (s) {
        case Side::U0: u = 0; v = t; break;
        case Side::U1: u = 1; v = t; break;
        case Side::V0: u = t; v = 0; break;
        case Side::V1: u = t; v = 1; break;
    }
}

/// Vacuum reluctivity 1/mu0 [m/H].
inline constexpr double kNu0 = 1.0 / (4.0e-7 * 3.14159265358979323846);

struct Material {
    double nu = kNu0;       // reluctivity [m/H]
    Point2 h_pm{0.0, 0.0};  // magnetisation [A/m]
    double j_src = 0.0;     // source current density [A/m^2]
};

struct Winding {
    std::string phase;
    std::string region;
    double turns = 0;
    int polarity = 1;
    double area = 0;  // coil cross-section [m^2]
};

struct MultiPatchModel {
    std::vector<Patch> patches;
    std::vector<Subdomain> subdomain;              // per patch
    std::vector<std::array<EdgeTag, 4>> edge_tags; // per patch, indexed by Side
    std::map<std::string, Material> materials;
    std::vector<Winding> windings;
    int pole_count = 2;
    double rotor_angle = 0.0;
    double axial_length = 1.0;

    double pole_pitch() const { return 2.0 * 3.14159265358979323846 / pole_count; }
    EdgeTag tag(int patch, Side s) const { return edge_tags[patch][static_cast<int>(s)]; }
};

/// Circular arc about `center`, exact rational quadratic segments of at most
/// 90 degrees each.
Curve make_arc(Point2 center, double radius, double th0, double th1);

/// Annular sector about the origin: radial line (degree 1) times exact arc
/// (degree 2). u runs with the radius, v with the angle, so the circular
/// edges are the u0/u1 sides and the radial cuts the v0/v1 sides.
Patch make_annular_patch(double r_in, double r_out, double th0, double th1,
                         std::string region);

/// Rigid rotation of one subdomain about the origin; returns a new model.
MultiPatchModel rotate_subdomain(const MultiPatchModel& model, Subdomain which,
                                 double dtheta);

/// Split a patch at parameter t in direction dir (0 = u, 1 = v) into two
/// patches covering the same point set. t must be an interior parameter.
std::pair<Patch, Patch> split_patch(const Patch& patch, int dir, double t);

/// Control polygon of one patch edge, ordered along the edge parameter.
struct EdgeGeometry {
    std::vector<Point2> pts;
    std::vector<double> w;
    splines::KnotVector kv;
};

EdgeGeometry edge_geometry(const MultiPatchModel& m, int patch, Side s);

/// Pointwise coincidence of two edges (optionally after rotating the first
/// by `rotation` about the origin), with identical knots and weights.
bool edges_coincide(const EdgeGeometry& a, const EdgeGeometry& b, double tol,
                    double rotation = 0.0);

/// Diagnostics: empty list means the model is valid.
std::vector<std::string> validate_model(const MultiPatchModel& model);

}  // namespace igamag::geom
