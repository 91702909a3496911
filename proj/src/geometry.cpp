#include "igamag/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "igamag/quadrature.hpp"

namespace igamag::geom {

namespace {
constexpr double kPi = std::numbers::pi;
}

const char* to_string(Side s) {
    switch (s) {
        case Side::U0: return "u0";
        case Side::U1: return "u1";
        case Side::V0: return "v0";
        case Side::V1: return "v1";
    }
    return "?";
}

const char* to_string(EdgeTag t) {
    switch (t) {
        case EdgeTag::None: return "none";
        case EdgeTag::Dirichlet: return "dirichlet";
        case EdgeTag::Left: return "left";
        case EdgeTag::Right: return "right";
        case EdgeTag::AirGap: return "airgap";
    }
    return "?";
}

const char* to_string(Subdomain s) {
    return s == Subdomain::Rotor ? "rotor" : "stator";
}

MapEval eval_map(const Patch& patch, double u, double v) {
    const auto bu = splines::eval_bspline(patch.ku, u);
    const auto bv = splines::eval_bspline(patch.kv, v);
    const int pu = patch.ku.degree(), pv = patch.kv.degree();

    // homogeneous sums S = sum w P B B, W = sum w B B and their derivatives
    double S[2] = {0, 0}, Su[2] = {0, 0}, Sv[2] = {0, 0};
    double W = 0, Wu = 0, Wv = 0;
    for (int b = 0; b <= pv; ++b) {
        for (int a = 0; a <= pu; ++a) {
            const int i = bu.first + a, j = bv.first + b;
            const double w = patch.net.weight(i, j);
            const Point2& P = patch.net.at(i, j);
            const double f = bu.values[a] * bv.values[b];
            const double fu = bu.derivatives[a] * bv.values[b];
            const double fv = bu.values[a] * bv.derivatives[b];
            S[0] += w * P.x * f;
            S[1] += w * P.y * f;
            Su[0] += w * P.x * fu;
            Su[1] += w * P.y * fu;
            Sv[0] += w * P.x * fv;
            Sv[1] += w * P.y * fv;
            W += w * f;
            Wu += w * fu;
            Wv += w * fv;
        }
    }
    MapEval out;
    out.x = {S[0] / W, S[1] / W};
    out.J[0][0] = (Su[0] - out.x.x * Wu) / W;
    out.J[1][0] = (Su[1] - out.x.y * Wu) / W;
    out.J[0][1] = (Sv[0] - out.x.x * Wv) / W;
    out.J[1][1] = (Sv[1] - out.x.y * Wv) / W;
    return out;
}

void eval_curve(const Curve& c, double u, Point2& x, Point2& dx) {
    const auto b = splines::eval_nurbs(c.kv, c.w, u);
    x = {0, 0};
    dx = {0, 0};
    const int p = c.kv.degree();
    for (int k = 0; k <= p; ++k) {
        const Point2& P = c.pts[b.first + k];
        x.x += P.x * b.values[k];
        x.y += P.y * b.values[k];
        dx.x += P.x * b.derivatives[k];
        dx.y += P.y * b.derivatives[k];
    }
}

Curve make_arc(Point2 center, double radius, double th0, double th1) {
    if (!(radius > 0.0)) throw std::invalid_argument("make_arc: radius must be positive");
    if (!(th1 > th0)) throw std::invalid_argument("make_arc: empty angular range");
    const double span = th1 - th0;
    const int nseg = std::max(1, static_cast<int>(std::ceil(span / (kPi / 2) - 1e-12)));

    Curve c;
    std::vector<double> knots;
    for (int i = 0; i < 3; ++i) knots.push_back(0.0);
    c.pts.push_back({center.x + radius * std::cos(th0), center.y + radius * std::sin(th0)});
    c.w.push_back(1.0);
    for (int s = 0; s < nseg; ++s) {
        const double a = th0 + span * s / nseg;
        const double b = th0 + span * (s + 1) / nseg;
        const double ha = 0.5 * (b - a);
        const double tm = 0.5 * (a + b);
        // middle control point at the tangent intersection, weight cos(ha)
        c.pts.push_back({center.x + radius / std::cos(ha) * std::cos(tm),
                         center.y + radius / std::cos(ha) * std::sin(tm)});
        c.w.push_back(std::cos(ha));
        c.pts.push_back({center.x + radius * std::cos(b), center.y + radius * std::sin(b)});
        c.w.push_back(1.0);
        if (s + 1 < nseg) {
            const double t = static_cast<double>(s + 1) / nseg;
            knots.push_back(t);
            knots.push_back(t);
        }
    }
    for (int i = 0; i < 3; ++i) knots.push_back(1.0);
    c.kv = splines::KnotVector(2, std::move(knots));
    return c;
}

// u runs with the radius, v with the angle; this ordering keeps the
// Jacobian determinant positive.
Patch make_annular_patch(double r_in, double r_out, double th0, double th1,
                         std::string region) {
    if (!(0.0 < r_in && r_in < r_out))
        throw std::invalid_argument("make_annular_patch: need 0 < r_in < r_out");
    const Curve inner = make_arc({0, 0}, r_in, th0, th1);
    const Curve outer = make_arc({0, 0}, r_out, th0, th1);

    Patch p;
    p.ku = splines::KnotVector(1, {0, 0, 1, 1});
    p.kv = inner.kv;
    p.region = std::move(region);
    const int na = static_cast<int>(inner.pts.size());
    p.net.nu = 2;
    p.net.nv = na;
    p.net.pts.resize(2 * na);
    p.net.w.resize(2 * na);
    for (int j = 0; j < na; ++j) {
        p.net.at(0, j) = inner.pts[j];
        p.net.at(1, j) = outer.pts[j];
        p.net.w[j * 2 + 0] = inner.w[j];
        p.net.w[j * 2 + 1] = outer.w[j];
    }
    return p;
}

MultiPatchModel rotate_subdomain(const MultiPatchModel& model, Subdomain which,
                                 double dtheta) {
    if (!std::isfinite(dtheta))
        throw std::invalid_argument("rotate_subdomain: angle must be finite");
    MultiPatchModel out = model;
    if (dtheta == 0.0) return out;
    std::set<std::string> moved, stayed;
    for (size_t k = 0; k < out.patches.size(); ++k) {
        if (out.subdomain[k] != which) {
            stayed.insert(out.patches[k].region);
            continue;
        }
        moved.insert(out.patches[k].region);
        for (auto& pt : out.patches[k].net.pts) pt = rotated(pt, dtheta);
    }
    // magnetisation is body-fixed: it turns with the subdomain that owns it
    for (const auto& region : moved) {
        Material& mat = out.materials.at(region);
        if (mat.h_pm.x == 0.0 && mat.h_pm.y == 0.0) continue;
        if (stayed.count(region))
            throw std::invalid_argument(
                "rotate_subdomain: magnetised region '" + region +
                "' spans both subdomains");
        mat.h_pm = rotated(mat.h_pm, dtheta);
    }
    if (which == Subdomain::Rotor) out.rotor_angle += dtheta;
    return out;
}

std::pair<Patch, Patch> split_patch(const Patch& patch, int dir, double t) {
    if (dir != 0 && dir != 1) throw std::invalid_argument("split_patch: dir must be 0 or 1");
    if (!(t > 0.0 && t < 1.0))
        throw std::invalid_argument("split_patch: split parameter must be interior");

    Patch work = patch;
    const auto kv_of = [&]() -> splines::KnotVector& { return dir == 0 ? work.ku : work.kv; };

    // raise the multiplicity of t to the degree, row by row
    while (kv_of().multiplicity(t) < kv_of().degree()) {
        const splines::KnotVector kv_old = kv_of();
        splines::KnotVector kv_new = kv_old;
        ControlNet net_new;
        if (dir == 0) {
            net_new.nu = work.net.nu + 1;
            net_new.nv = work.net.nv;
            net_new.pts.resize(net_new.nu * net_new.nv);
            net_new.w.resize(net_new.nu * net_new.nv);
            for (int j = 0; j < work.net.nv; ++j) {
                std::vector<splines::WPoint> row(work.net.nu);
                for (int i = 0; i < work.net.nu; ++i) {
                    const double w = work.net.weight(i, j);
                    row[i] = {w * work.net.at(i, j).x, w * work.net.at(i, j).y, w};
                }
                auto [kv2, row2] = splines::insert_knot(kv_old, row, t);
                kv_new = kv2;
                for (int i = 0; i < net_new.nu; ++i) {
                    net_new.at(i, j) = {row2[i].wx / row2[i].w, row2[i].wy / row2[i].w};
                    net_new.w[j * net_new.nu + i] = row2[i].w;
                }
            }
        } else {
            net_new.nu = work.net.nu;
            net_new.nv = work.net.nv + 1;
            net_new.pts.resize(net_new.nu * net_new.nv);
            net_new.w.resize(net_new.nu * net_new.nv);
            for (int i = 0; i < work.net.nu; ++i) {
                std::vector<splines::WPoint> row(work.net.nv);
                for (int j = 0; j < work.net.nv; ++j) {
                    const double w = work.net.weight(i, j);
                    row[j] = {w * work.net.at(i, j).x, w * work.net.at(i, j).y, w};
                }
                auto [kv2, row2] = splines::insert_knot(kv_old, row, t);
                kv_new = kv2;
                for (int j = 0; j < net_new.nv; ++j) {
                    net_new.at(i, j) = {row2[j].wx / row2[j].w, row2[j].wy / row2[j].w};
                    net_new.w[j * net_new.nu + i] = row2[j].w;
                }
            }
        }
        work.net = std::move(net_new);
        kv_of() = kv_new;
    }

    // split the knot vector at t and rescale each part to [0,1]
    const splines::KnotVector& kv = kv_of();
    const int p = kv.degree();
    const auto& U = kv.knots();
    const int first_t = static_cast<int>(std::lower_bound(U.begin(), U.end(), t) - U.begin());
    // control points 0..first_t-1 belong to the left part (t has multiplicity p)
    const int n_left = first_t;  // = index of first knot equal to t
    std::vector<double> kl(U.begin(), U.begin() + n_left + p);
    kl.push_back(t);
    for (double& x : kl) x = x / t;
    std::vector<double> kr;
    kr.push_back(t);
    kr.insert(kr.end(), U.begin() + first_t, U.end());
    for (double& x : kr) x = (x - t) / (1.0 - t);

    const splines::KnotVector kvl(p, std::move(kl));
    const splines::KnotVector kvr(p, std::move(kr));
    const int nl = kvl.num_funcs();
    const int nr = kvr.num_funcs();

    Patch a = work, b = work;
    auto take = [&](Patch& dst, int begin, int count) {
        ControlNet net;
        if (dir == 0) {
            net.nu = count;
            net.nv = work.net.nv;
            net.pts.resize(net.nu * net.nv);
            net.w.resize(net.nu * net.nv);
            for (int j = 0; j < net.nv; ++j)
                for (int i = 0; i < count; ++i) {
                    net.at(i, j) = work.net.at(begin + i, j);
                    net.w[j * net.nu + i] = work.net.weight(begin + i, j);
                }
        } else {
            net.nu = work.net.nu;
            net.nv = count;
            net.pts.resize(net.nu * net.nv);
            net.w.resize(net.nu * net.nv);
            for (int j = 0; j < count; ++j)
                for (int i = 0; i < net.nu; ++i) {
                    net.at(i, j) = work.net.at(i, begin + j);
                    net.w[j * net.nu + i] = work.net.weight(i, begin + j);
                }
        }
        dst.net = std::move(net);
    };
    take(a, 0, nl);
    take(b, work.net.nu * 0 + (dir == 0 ? work.net.nu - nr : work.net.nv - nr), nr);
    if (dir == 0) {
        a.ku = kvl;
        b.ku = kvr;
    } else {
        a.kv = kvl;
        b.kv = kvr;
    }
    return {a, b};
}

EdgeGeometry edge_geometry(const MultiPatchModel& m, int k, Side s) {
    const Patch& p = m.patches[k];
    EdgeGeometry e{{}, {}, (s == Side::V0 || s == Side::V1) ? p.ku : p.kv};
    const int nu = p.net.nu, nv = p.net.nv;
    switch (s) {
        case Side::U0:
            for (int j = 0; j < nv; ++j) { e.pts.push_back(p.net.at(0, j)); e.w.push_back(p.net.weight(0, j)); }
            break;
        case Side::U1:
            for (int j = 0; j < nv; ++j) { e.pts.push_back(p.net.at(nu - 1, j)); e.w.push_back(p.net.weight(nu - 1, j)); }
            break;
        case Side::V0:
            for (int i = 0; i < nu; ++i) { e.pts.push_back(p.net.at(i, 0)); e.w.push_back(p.net.weight(i, 0)); }
            break;
        case Side::V1:
            for (int i = 0; i < nu; ++i) { e.pts.push_back(p.net.at(i, nv - 1)); e.w.push_back(p.net.weight(i, nv - 1)); }
            break;
    }
    return e;
}

namespace {

bool coincide(const Point2& a, const Point2& b, double tol) {
    return std::hypot(a.x - b.x, a.y - b.y) < tol;
}

}  // namespace

bool edges_coincide(const EdgeGeometry& a, const EdgeGeometry& b, double tol,
                    double rotation) {
    if (a.pts.size() != b.pts.size()) return false;
    if (!(a.kv == b.kv)) return false;
    for (size_t i = 0; i < a.pts.size(); ++i) {
        if (!coincide(rotated(a.pts[i], rotation), b.pts[i], tol)) return false;
        if (std::abs(a.w[i] - b.w[i]) > 1e-12) return false;
    }
    return true;
}

namespace {

// endpoints agree but the interiors don't: an intended, non-conforming joint
bool endpoints_match(const EdgeGeometry& a, const EdgeGeometry& b, double tol) {
    return coincide(a.pts.front(), b.pts.front(), tol) &&
           coincide(a.pts.back(), b.pts.back(), tol);
}

}  // namespace

std::vector<std::string> validate_model(const MultiPatchModel& model) {
    std::vector<std::string> bad;
    constexpr double tol = 1e-9;
    const size_t np = model.patches.size();
    auto say = [&](const std::string& s) { bad.push_back(s); };

    if (model.subdomain.size() != np || model.edge_tags.size() != np)
        say("model: subdomain/edge tag tables do not match the patch count");

    for (size_t k = 0; k < np; ++k) {
        const Patch& p = model.patches[k];
        std::ostringstream id;
        id << "patch " << k;
        if (p.net.nu != p.ku.num_funcs() || p.net.nv != p.kv.num_funcs()) {
            say(id.str() + ": control net size inconsistent with knot vectors");
            continue;
        }
        bool wpos = true;
        for (double w : p.net.w) wpos = wpos && (w > 0.0);
        if (!wpos) say(id.str() + ": non-positive control weight");
        if (!model.materials.count(p.region))
            say(id.str() + ": region '" + p.region + "' has no material");

        // Jacobian positivity at the assembly quadrature points
        const auto gl_u = quadrature::gauss_legendre(p.ku.degree() + 1);
        const auto gl_v = quadrature::gauss_legendre(p.kv.degree() + 1);
        const auto bu = p.ku.breakpoints();
        const auto bv = p.kv.breakpoints();
        bool jac_ok = true;
        for (size_t eu = 0; eu + 1 < bu.size() && jac_ok; ++eu)
            for (size_t ev = 0; ev + 1 < bv.size() && jac_ok; ++ev)
                for (size_t a = 0; a < gl_u.x.size() && jac_ok; ++a)
                    for (size_t b = 0; b < gl_v.x.size() && jac_ok; ++b) {
                        const double u = bu[eu] + (bu[eu + 1] - bu[eu]) * gl_u.x[a];
                        const double v = bv[ev] + (bv[ev + 1] - bv[ev]) * gl_v.x[b];
                        if (!(eval_map(p, u, v).det() > 0.0)) {
                            std::ostringstream os;
                            os << id.str() << ": non-positive Jacobian at element (" << eu
                               << "," << ev << ")";
                            say(os.str());
                            jac_ok = false;
                        }
                    }
    }
    if (!bad.empty() && bad.front().rfind("model:", 0) == 0) return bad;

    for (const auto& wd : model.windings)
        if (!model.materials.count(wd.region))
            say("winding " + wd.phase + ": unknown region '" + wd.region + "'");

    // interface pairing and boundary tag completeness, per subdomain
    const double pitch = model.pole_pitch();
    for (Subdomain sd : {Subdomain::Rotor, Subdomain::Stator}) {
        struct Entry {
            int patch;
            Side side;
            EdgeGeometry geo;
        };
        std::vector<Entry> edges;
        for (size_t k = 0; k < np; ++k) {
            if (model.subdomain[k] != sd) continue;
            for (Side s : {Side::U0, Side::U1, Side::V0, Side::V1})
                edges.push_back({static_cast<int>(k), s,
                                 edge_geometry(model, static_cast<int>(k), s)});
        }
        std::vector<bool> paired(edges.size(), false);
        for (size_t a = 0; a < edges.size(); ++a) {
            for (size_t b = a + 1; b < edges.size(); ++b) {
                if (edges[a].patch == edges[b].patch) continue;
                if (paired[a] || paired[b]) continue;
                if (edges_coincide(edges[a].geo, edges[b].geo, tol)) {
                    paired[a] = paired[b] = true;
                } else if (endpoints_match(edges[a].geo, edges[b].geo, tol) &&
                           edges[a].geo.pts.size() > 2 && edges[b].geo.pts.size() > 2) {
                    std::ostringstream os;
                    os << "patches " << edges[a].patch << "/" << edges[b].patch
                       << ": non-conforming interior interface (" << to_string(edges[a].side)
                       << " vs " << to_string(edges[b].side) << ")";
                    say(os.str());
                    paired[a] = paired[b] = true;
                }
            }
        }
        // untagged boundary edges / tagged interior edges
        std::vector<const Entry*> lefts, rights;
        for (size_t a = 0; a < edges.size(); ++a) {
            const EdgeTag t = model.tag(edges[a].patch, edges[a].side);
            if (paired[a]) {
                if (t != EdgeTag::None) {
                    std::ostringstream os;
                    os << "patch " << edges[a].patch << " side " << to_string(edges[a].side)
                       << ": interior interface carries tag " << to_string(t);
                    say(os.str());
                }
                continue;
            }
            if (t == EdgeTag::None) {
                std::ostringstream os;
                os << "patch " << edges[a].patch << " side " << to_string(edges[a].side)
                   << ": boundary edge has no tag";
                say(os.str());
            }
            if (t == EdgeTag::Left) lefts.push_back(&edges[a]);
            if (t == EdgeTag::Right) rights.push_back(&edges[a]);
        }
        // anti-periodic congruence: rotating a right edge by one pole pitch
        // must land on a left edge
        if (lefts.size() != rights.size()) {
            say(std::string(to_string(sd)) + ": left/right edge counts differ");
        } else {
            for (const Entry* r : rights) {
                bool found = false;
                for (const Entry* l : lefts)
                    if (edges_coincide(r->geo, l->geo, tol, pitch)) found = true;
                if (!found) {
                    std::ostringstream os;
                    os << to_string(sd) << ": right edge of patch " << r->patch
                       << " has no congruent left edge under rotation by the pole pitch";
                    say(os.str());
                }
            }
        }
    }

    // the air-gap interface must be a single circle shared by both subdomains
    std::vector<double> ag_radii;
    for (size_t k = 0; k < np; ++k)
        for (Side s : {Side::U0, Side::U1, Side::V0, Side::V1}) {
            if (model.tag(static_cast<int>(k), s) != EdgeTag::AirGap) continue;
            for (int q = 0; q <= 8; ++q) {
                double u = 0, v = 0;
                edge_param(s, q / 8.0, u, v);
                const auto me = eval_map(model.patches[k], u, v);
                ag_radii.push_back(std::hypot(me.x.x, me.x.y));
            }
        }
    if (!ag_radii.empty()) {
        const auto [mn, mx] = std::minmax_element(ag_radii.begin(), ag_radii.end());
        if (*mx - *mn > tol) say("air gap interface is not a single circle");
    }

    return bad;
}

}  // namespace igamag::geom
