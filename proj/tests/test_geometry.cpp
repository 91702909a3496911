#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "igamag/demo_machine.hpp"
#include "igamag/geometry.hpp"
#include "igamag/quadrature.hpp"
#include "test_helpers.hpp"

using namespace igamag;
using namespace igamag::geom;

namespace {
constexpr double kPi = std::numbers::pi;

double patch_area(const Patch& p, int order = 10) {
    const auto gl = quadrature::gauss_legendre(order);
    const auto bu = p.ku.breakpoints();
    const auto bv = p.kv.breakpoints();
    double area = 0;
    for (size_t eu = 0; eu + 1 < bu.size(); ++eu)
        for (size_t ev = 0; ev + 1 < bv.size(); ++ev)
            for (size_t a = 0; a < gl.x.size(); ++a)
                for (size_t b = 0; b < gl.x.size(); ++b) {
                    const double u = bu[eu] + (bu[eu + 1] - bu[eu]) * gl.x[a];
                    const double v = bv[ev] + (bv[ev + 1] - bv[ev]) * gl.x[b];
                    area += eval_map(p, u, v).det() * (bu[eu + 1] - bu[eu]) *
                            (bv[ev + 1] - bv[ev]) * gl.w[a] * gl.w[b];
                }
    return area;
}

}  // namespace

TEST_CASE("identity map on the unit square") {
    const Patch p = testutil::unit_square_patch();
    const MapEval me = eval_map(p, 0.3, 0.7);
    CHECK(me.x.x == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(me.x.y == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(me.J[0][0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(me.J[0][1] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(me.J[1][0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(me.J[1][1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("annular patch midpoint lands mid-radius at mid-angle") {
    const Patch p = make_annular_patch(1.0, 2.0, 0.0, kPi / 2, "mat");
    const MapEval me = eval_map(p, 0.5, 0.5);
    CHECK(std::hypot(me.x.x, me.x.y) == doctest::Approx(1.5).epsilon(1e-13));
    CHECK(std::atan2(me.x.y, me.x.x) == doctest::Approx(kPi / 4).epsilon(1e-13));
}

TEST_CASE("clamped corner interpolates the first control point") {
    const Patch p = testutil::random_patch(1);
    const MapEval me = eval_map(p, 0.0, 0.0);
    CHECK(me.x.x == doctest::Approx(p.net.at(0, 0).x).epsilon(1e-14));
    CHECK(me.x.y == doctest::Approx(p.net.at(0, 0).y).epsilon(1e-14));
}

TEST_CASE("quarter arc is exactly on the circle") {
    const Curve c = make_arc({0, 0}, 1.0, 0.0, kPi / 2);
    CHECK(c.kv.degree() == 2);
    CHECK(c.pts.size() == 3);
    CHECK(c.w[1] == doctest::Approx(std::cos(kPi / 4)).epsilon(1e-15));
    double worst = 0;
    for (int s = 0; s <= 1000; ++s) {
        Point2 x, dx;
        eval_curve(c, s / 1000.0, x, dx);
        worst = std::max(worst, std::abs(std::hypot(x.x, x.y) - 1.0));
    }
    CHECK(worst < 1e-13);

    Point2 mid, dmid;
    eval_curve(c, 0.5, mid, dmid);
    CHECK(std::atan2(mid.y, mid.x) == doctest::Approx(kPi / 4).epsilon(1e-14));
}

TEST_CASE("half circle from two segments is on-circle with continuous tangent direction") {
    const Curve c = make_arc({0, 0}, 2.0, 0.0, kPi);
    CHECK(c.pts.size() == 5);
    for (int s = 0; s <= 1000; ++s) {
        Point2 x, dx;
        eval_curve(c, s / 1000.0, x, dx);
        CHECK(std::abs(std::hypot(x.x, x.y) - 2.0) < 1e-13);
    }
    Point2 xl, dl, xr, dr;
    eval_curve(c, 0.5 - 1e-9, xl, dl);
    eval_curve(c, 0.5 + 1e-9, xr, dr);
    const double nl = std::hypot(dl.x, dl.y), nr = std::hypot(dr.x, dr.y);
    CHECK(std::abs(dl.x / nl - dr.x / nr) < 1e-7);
    CHECK(std::abs(dl.y / nl - dr.y / nr) < 1e-7);
}

TEST_CASE("make_arc input validation") {
    CHECK_THROWS_AS(make_arc({0, 0}, -1.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_arc({0, 0}, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("annular patch corners, edges, and area") {
    const Patch p = make_annular_patch(1.0, 2.0, 0.0, kPi / 2, "mat");
    const auto c00 = eval_map(p, 0, 0), c10 = eval_map(p, 1, 0);
    const auto c01 = eval_map(p, 0, 1), c11 = eval_map(p, 1, 1);
    CHECK(c00.x.x == doctest::Approx(1.0).epsilon(1e-15));  // (r_in, th0)
    CHECK(c00.x.y == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(c10.x.x == doctest::Approx(2.0).epsilon(1e-15));  // (r_out, th0)
    CHECK(c10.x.y == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(c01.x.x == doctest::Approx(0.0).epsilon(1e-14));  // (r_in, th1)
    CHECK(c01.x.y == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c11.x.y == doctest::Approx(2.0).epsilon(1e-15));  // (r_out, th1)

    // inner circular edge is u = 0
    for (int s = 0; s <= 1000; ++s) {
        const auto me = eval_map(p, 0.0, s / 1000.0);
        CHECK(std::abs(std::hypot(me.x.x, me.x.y) - 1.0) < 1e-13);
    }
    // and the orientation is positive
    CHECK(eval_map(p, 0.5, 0.5).det() > 0.0);
    const double exact = (kPi / 2) * (4.0 - 1.0) / 2.0;
    CHECK(std::abs(patch_area(p) - exact) / exact < 1e-10);
}

TEST_CASE("rotation is rigid and periodic") {
    const auto model = make_demo_machine();

    SUBCASE("zero rotation changes nothing") {
        const auto same = rotate_subdomain(model, Subdomain::Rotor, 0.0);
        for (size_t k = 0; k < model.patches.size(); ++k)
            for (size_t i = 0; i < model.patches[k].net.pts.size(); ++i) {
                CHECK(same.patches[k].net.pts[i].x == model.patches[k].net.pts[i].x);
                CHECK(same.patches[k].net.pts[i].y == model.patches[k].net.pts[i].y);
            }
        CHECK(same.rotor_angle == model.rotor_angle);
    }

    SUBCASE("a full turn in pole pitches returns to the start") {
        auto turned = model;
        for (int i = 0; i < model.pole_count; ++i)
            turned = rotate_subdomain(turned, Subdomain::Rotor, model.pole_pitch());
        for (size_t k = 0; k < model.patches.size(); ++k)
            for (size_t i = 0; i < model.patches[k].net.pts.size(); ++i) {
                CHECK(std::abs(turned.patches[k].net.pts[i].x -
                               model.patches[k].net.pts[i].x) < 1e-12);
                CHECK(std::abs(turned.patches[k].net.pts[i].y -
                               model.patches[k].net.pts[i].y) < 1e-12);
            }
    }

    SUBCASE("radii and pairwise distances are preserved") {
        const auto turned = rotate_subdomain(model, Subdomain::Rotor, 0.1);
        std::vector<Point2> before, after;
        for (size_t k = 0; k < model.patches.size(); ++k) {
            if (model.subdomain[k] != Subdomain::Rotor) continue;
            for (size_t i = 0; i < model.patches[k].net.pts.size(); ++i) {
                before.push_back(model.patches[k].net.pts[i]);
                after.push_back(turned.patches[k].net.pts[i]);
            }
        }
        for (size_t i = 0; i < before.size(); ++i)
            CHECK(std::abs(std::hypot(after[i].x, after[i].y) -
                           std::hypot(before[i].x, before[i].y)) < 1e-13);
        for (size_t i = 0; i < before.size(); i += 7)
            for (size_t j = i + 1; j < before.size(); j += 13) {
                const double d0 = std::hypot(before[i].x - before[j].x,
                                             before[i].y - before[j].y);
                const double d1 =
                    std::hypot(after[i].x - after[j].x, after[i].y - after[j].y);
                CHECK(std::abs(d0 - d1) < 1e-12);
            }
        // the stator is untouched
        for (size_t k = 0; k < model.patches.size(); ++k) {
            if (model.subdomain[k] != Subdomain::Stator) continue;
            CHECK(turned.patches[k].net.pts[0].x == model.patches[k].net.pts[0].x);
        }
    }
}

TEST_CASE("the bundled machine validates cleanly") {
    const auto model = make_demo_machine();
    const auto bad = validate_model(model);
    for (const auto& m : bad) MESSAGE(m);
    CHECK(bad.empty());
}

TEST_CASE("validate_model flags constructed failures") {
    SUBCASE("negative Jacobian from swapped control rows") {
        auto model = make_demo_machine();
        Patch& p = model.patches[0];
        for (int i = 0; i < p.net.nu; ++i) std::swap(p.net.at(i, 0), p.net.at(i, 1));
        const auto bad = validate_model(model);
        bool found = false;
        for (const auto& m : bad) found = found || m.find("Jacobian") != std::string::npos;
        CHECK(found);
    }

    SUBCASE("missing boundary tag") {
        auto model = make_demo_machine();
        model.edge_tags[0][static_cast<int>(Side::V0)] = EdgeTag::None;  // shaft bore
        const auto bad = validate_model(model);
        bool found = false;
        for (const auto& m : bad) found = found || m.find("no tag") != std::string::npos;
        CHECK(found);
    }

    SUBCASE("missing material") {
        auto model = make_demo_machine();
        model.materials.erase("magnet");
        CHECK_FALSE(validate_model(model).empty());
    }
}

TEST_CASE("every circular edge of the bundled machine stays on its circle") {
    const auto model = make_demo_machine();
    for (const auto& p : model.patches) {
        for (Side s : {Side::U0, Side::U1}) {  // arcs are the u-edges
            double u0 = 0, v0 = 0;
            edge_param(s, 0.0, u0, v0);
            const auto start = eval_map(p, u0, v0);
            const double r = std::hypot(start.x.x, start.x.y);
            for (int q = 0; q <= 200; ++q) {
                double u = 0, v = 0;
                edge_param(s, q / 200.0, u, v);
                const auto me = eval_map(p, u, v);
                CHECK(std::abs(std::hypot(me.x.x, me.x.y) - r) < 1e-12 * r);
            }
        }
    }
}

TEST_CASE("split_patch reproduces the point set") {
    // half annulus: the arc (v-direction) has a parametric C0 joint at 0.5
    const Patch p = make_annular_patch(1.0, 2.0, 0.0, kPi, "mat");
    CHECK(p.kv.multiplicity(0.5) == 2);
    const auto [a, b] = split_patch(p, 1, 0.5);
    CHECK(a.kv.num_funcs() == 3);
    CHECK(b.kv.num_funcs() == 3);
    for (int s = 0; s <= 20; ++s)
        for (int t = 0; t <= 4; ++t) {
            const double u = t / 4.0;
            const double v = s / 20.0;
            const auto orig = eval_map(p, u, v);
            const auto part = v <= 0.5 ? eval_map(a, u, v / 0.5)
                                       : eval_map(b, u, (v - 0.5) / 0.5);
            CHECK(std::abs(orig.x.x - part.x.x) < 1e-13);
            CHECK(std::abs(orig.x.y - part.x.y) < 1e-13);
        }
}

TEST_CASE("split_patch inserts knots when needed") {
    const Patch p = make_annular_patch(1.0, 2.0, 0.0, kPi / 2, "mat");
    const auto [a, b] = split_patch(p, 1, 0.25);
    for (int s = 0; s <= 40; ++s) {
        const double v = s / 40.0;
        const auto orig = eval_map(p, 0.7, v);
        const auto part =
            v <= 0.25 ? eval_map(a, 0.7, v / 0.25) : eval_map(b, 0.7, (v - 0.25) / 0.75);
        CHECK(std::abs(orig.x.x - part.x.x) < 1e-13);
        CHECK(std::abs(orig.x.y - part.x.y) < 1e-13);
    }
}
