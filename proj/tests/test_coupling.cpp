#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "igamag/coupling.hpp"
#include "igamag/driver.hpp"
#include "igamag/linalg.hpp"
#include "test_helpers.hpp"

using namespace igamag;
using namespace igamag::coupling;

namespace {
constexpr double kPi = std::numbers::pi;

std::shared_ptr<const geom::MultiPatchModel> shared_model(geom::MultiPatchModel m) {
    return std::make_shared<const geom::MultiPatchModel>(std::move(m));
}

// full periodic two-ring annulus (no anti-periodic cut): rotor ring
// [1, 1.5], stator ring [1.5, 2], interface circle r = 1.5, unit reluctivity
geom::MultiPatchModel periodic_ring_model() {
    using namespace geom;
    MultiPatchModel m;
    m.pole_count = 1;  // the trace window is the full circle
    m.materials["air"] = {1.0, {0, 0}, 0.0};
    auto ring = [&](Subdomain sd, double ra, double rb, bool ag_in, bool ag_out) {
        for (int s = 0; s < 4; ++s) {
            m.patches.push_back(make_annular_patch(ra, rb, s * kPi / 2,
                                                   (s + 1) * kPi / 2, "air"));
            m.subdomain.push_back(sd);
            // circles are the u-edges
            std::array<EdgeTag, 4> tags{ag_in ? EdgeTag::AirGap : EdgeTag::None,
                                        ag_out ? EdgeTag::AirGap : EdgeTag::None,
                                        EdgeTag::None, EdgeTag::None};
            m.edge_tags.push_back(tags);
        }
    };
    ring(Subdomain::Rotor, 1.0, 1.5, false, true);
    ring(Subdomain::Stator, 1.5, 2.0, true, false);
    return m;
}

struct SideSetup {
    assembly::DiscPtr disc;
    std::shared_ptr<assembly::DofMap> dm;
    TraceSpacePtr trace;
};

SideSetup setup_side(const std::shared_ptr<const geom::MultiPatchModel>& model,
                     geom::Subdomain sd, int degree, int refine, bool airgap_dirichlet) {
    SideSetup s;
    s.disc = assembly::discretize(model, sd, degree, refine);
    assembly::DofMapOptions opts;
    opts.dirichlet_airgap = airgap_dirichlet;
    s.dm = std::make_shared<assembly::DofMap>(assembly::build_dof_map(*s.disc, opts));
    s.trace = build_trace_space(s.disc, *s.dm, geom::EdgeTag::AirGap);
    return s;
}

// L2 projection of a scalar function onto a subdomain space (all free)
postproc::Field project_function(const SideSetup& s,
                                 const std::function<double(double, double)>& f) {
    const auto quad = assembly::make_quadrature(*s.disc);
    const auto M = assembly::assemble_mass(*s.disc, *s.dm, quad);
    const auto b = assembly::assemble_load(*s.disc, *s.dm, quad, f);
    std::vector<double> x;
    REQUIRE(linalg::solve_spd(M, b, x, 1e-13, 40 * s.dm->free_count + 100).converged);
    return postproc::expand_field(s.disc, *s.dm, x);
}

}  // namespace

TEST_CASE("relax_update blends coefficient-wise") {
    const auto model = shared_model(testutil::conforming_ring_model());
    const auto side = setup_side(model, geom::Subdomain::Rotor, 2, 0, true);
    TraceFunction a = zero_trace(side.trace);
    TraceFunction b = zero_trace(side.trace);
    a.c[0] = 2.0;
    a.c[1] = 0.0;
    b.c[0] = 0.0;
    b.c[1] = 2.0;
    CHECK(relax_update(a, b, 0.0).c == a.c);
    CHECK(relax_update(a, b, 1.0).c == b.c);
    const auto mid = relax_update(a, b, 0.5);
    CHECK(mid.c[0] == doctest::Approx(1.0));
    CHECK(mid.c[1] == doctest::Approx(1.0));
    CHECK_THROWS_AS(relax_update(a, b, 1.5), std::invalid_argument);
}

TEST_CASE("trace function uses the anti-periodic extension") {
    const auto model = shared_model(testutil::conforming_ring_model());
    const auto side = setup_side(model, geom::Subdomain::Rotor, 2, 1, true);
    TraceFunction f = zero_trace(side.trace);
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dv(-1.0, 1.0);
    for (size_t i = 0; i + 1 < f.c.size(); ++i) f.c[i] = dv(rng);
    f.c.back() = side.trace->ends_rel * f.c.front();
    const double pitch = side.trace->pitch;
    for (double phi : {0.05, 0.3, 0.6, 0.9}) {
        const double base = side.trace->phi_start + phi * pitch;
        CHECK(f.eval(base + pitch) == doctest::Approx(-f.eval(base)).epsilon(1e-12));
        CHECK(f.eval(base - pitch) == doctest::Approx(-f.eval(base)).epsilon(1e-12));
    }
}

TEST_CASE("projection onto the own space is the identity") {
    const auto model = shared_model(testutil::conforming_ring_model());
    const auto side = setup_side(model, geom::Subdomain::Rotor, 2, 1, true);
    TraceFunction f = zero_trace(side.trace);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dv(-1.0, 1.0);
    for (size_t i = 0; i + 1 < f.c.size(); ++i) f.c[i] = dv(rng);
    f.c.back() = side.trace->ends_rel * f.c.front();

    const TraceFunction g = project_trace(f, side.trace, 0.0);
    for (size_t i = 0; i < f.c.size(); ++i)
        CHECK(g.c[i] == doctest::Approx(f.c[i]).epsilon(1e-12));

    const TraceFunction z = project_trace(zero_trace(side.trace), side.trace, 0.0);
    for (double v : z.c) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("coarse-fine-coarse projection round trip is exact on nested spaces") {
    const auto model = shared_model(testutil::conforming_ring_model());
    const auto coarse = setup_side(model, geom::Subdomain::Rotor, 2, 1, true);
    const auto fine = setup_side(model, geom::Subdomain::Rotor, 2, 2, true);

    TraceFunction f = zero_trace(coarse.trace);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> dv(-1.0, 1.0);
    for (size_t i = 0; i + 1 < f.c.size(); ++i) f.c[i] = dv(rng);
    f.c.back() = coarse.trace->ends_rel * f.c.front();

    const TraceFunction up = project_trace(f, fine.trace, 0.0);
    const TraceFunction back = project_trace(up, coarse.trace, 0.0);
    for (size_t i = 0; i < f.c.size(); ++i)
        CHECK(back.c[i] == doctest::Approx(f.c[i]).epsilon(1e-11));
}

TEST_CASE("projection honours the rotation offset with anti-periodic wrap") {
    const auto model = shared_model(testutil::conforming_ring_model());
    const auto side = setup_side(model, geom::Subdomain::Rotor, 2, 2, true);
    const auto& ts = *side.trace;

    // smooth anti-periodic profile cos(3 phi) via coefficients at the
    // Greville angles; the end constraint holds because cos(3(phi+60deg))
    // equals -cos(3 phi)
    TraceFunction f = zero_trace(side.trace);
    for (const auto& seg : ts.segs) {
        const auto& kv = ts.seg_space(seg);
        const auto& knots = kv.knots();
        const int p = kv.degree();
        for (int i = 0; i < kv.num_funcs(); ++i) {
            double g = 0;
            for (int r = 1; r <= p; ++r) g += knots[i + r];
            g /= p;
            double u = 0, v = 0;
            geom::edge_param(seg.side, g, u, v);
            const auto ep = geom::eval_map(ts.disc->patch(seg.disc_patch), u, v);
            f.c[seg.offset + i] = std::cos(3.0 * std::atan2(ep.x.y, ep.x.x));
        }
    }

    const double offset = 0.21;
    const TraceFunction g = project_trace(f, side.trace, offset);
    // g approximates f(phi - offset); the first sample reaches through the
    // anti-periodic wrap
    for (double frac : {0.05, 0.25, 0.5, 0.75, 0.95}) {
        const double phi = ts.phi_start + frac * ts.pitch;
        CHECK(g.eval(phi) == doctest::Approx(f.eval(phi - offset)).epsilon(5e-3));
    }
}

TEST_CASE("neumann load: zero field, sign flip, and the linear harmonic") {
    const auto model = shared_model(periodic_ring_model());
    const auto rotor = setup_side(model, geom::Subdomain::Rotor, 2, 2, false);
    const auto stator = setup_side(model, geom::Subdomain::Stator, 2, 1, false);

    SUBCASE("zero rotor solution gives a zero load") {
        const auto zero = postproc::zero_field(rotor.disc);
        const auto g = neumann_load(zero, *rotor.trace, *stator.trace, *stator.dm);
        for (double v : g) CHECK(v == 0.0);
    }

    SUBCASE("flipping the normal flips the load exactly") {
        const auto f = project_function(rotor, [](double x, double) { return x; });
        const auto gp = neumann_load(f, *rotor.trace, *stator.trace, *stator.dm, +1.0);
        const auto gm = neumann_load(f, *rotor.trace, *stator.trace, *stator.dm, -1.0);
        REQUIRE(gp.size() == gm.size());
        for (size_t i = 0; i < gp.size(); ++i) CHECK(gp[i] == doctest::Approx(-gm[i]));
    }

    SUBCASE("the harmonic A = x reproduces the analytic gap flux") {
        // A = r cos(phi) lies in the rational space: flux dA/dr = cos(phi)
        const auto f = project_function(rotor, [](double x, double) { return x; });
        for (int s = 0; s < 100; ++s) {
            const double phi = -kPi + 2 * kPi * (s + 0.5) / 100;
            const double flux = gap_flux(f, *rotor.trace, phi);
            CHECK(std::abs(flux - std::cos(phi)) < 1e-8);
        }
    }

    SUBCASE("a cubic harmonic converges to the analytic flux") {
        const auto coarse = setup_side(model, geom::Subdomain::Rotor, 2, 1, false);
        auto err = [&](const SideSetup& side_r) {
            const auto f = project_function(
                side_r, [](double x, double y) {
                    const double r = std::hypot(x, y), phi = std::atan2(y, x);
                    return r * r * r * std::cos(3 * phi);
                });
            double worst = 0;
            for (int s = 0; s < 60; ++s) {
                const double phi = -kPi + 2 * kPi * (s + 0.5) / 60;
                const double flux = gap_flux(f, *side_r.trace, phi);
                worst = std::max(worst,
                                 std::abs(flux - 3.0 * 1.5 * 1.5 * std::cos(3 * phi)));
            }
            return worst;
        };
        const double e1 = err(coarse);
        const double e2 = err(rotor);
        CHECK(e2 < e1);
        CHECK(e2 < 2e-2 * 3.0 * 1.5 * 1.5);
    }
}

TEST_CASE("interface jump of one exactly shared field is tiny") {
    const auto model = shared_model(periodic_ring_model());
    const auto rotor = setup_side(model, geom::Subdomain::Rotor, 2, 1, false);
    const auto stator = setup_side(model, geom::Subdomain::Stator, 2, 2, false);
    const auto fr = project_function(rotor, [](double x, double) { return x; });
    const auto fs = project_function(stator, [](double x, double) { return x; });
    CHECK(interface_jump(fr, *rotor.trace, fs, *stator.trace) < 1e-9);
}

TEST_CASE("zero sources converge at the first iteration with zero fields") {
    const auto model = shared_model(testutil::conforming_ring_model(false));
    DtnOptions opts;
    opts.refine = 1;
    const DtnResult res = dtn_iterate(model, opts);
    CHECK(res.state.converged);
    CHECK(res.state.iterations == 1);
    const auto quad = assembly::make_quadrature(*res.disc_rotor);
    CHECK(postproc::l2_norm(res.rotor, quad) == 0.0);
}

TEST_CASE("non-convergence is reported, not thrown") {
    const auto model = shared_model(testutil::conforming_ring_model());
    DtnOptions opts;
    opts.refine = 0;
    opts.max_iter = 1;
    const DtnResult res = dtn_iterate(model, opts);
    CHECK_FALSE(res.state.converged);
    CHECK(res.state.iterations == 1);
    CHECK(res.state.history.size() == 1);
}

TEST_CASE("coupled solve agrees with the monolithic system on a conforming interface") {
    const auto model = shared_model(testutil::conforming_ring_model());
    const int degree = 2, refine = 1;
    const double tol = 1e-7;

    DtnOptions opts;
    opts.degree = degree;
    opts.refine = refine;
    opts.alpha = 0.5;
    opts.tol = tol;
    const DtnResult dtn = dtn_iterate(model, opts);
    REQUIRE(dtn.state.converged);

    const driver::MonolithicResult mono = driver::solve_monolithic(model, degree, refine);

    // compare per subdomain on the DtN discretisations
    for (auto sd : {geom::Subdomain::Rotor, geom::Subdomain::Stator}) {
        const auto& disc = sd == geom::Subdomain::Rotor ? dtn.disc_rotor : dtn.disc_stator;
        const auto& field = sd == geom::Subdomain::Rotor ? dtn.rotor : dtn.stator;
        const auto quad = assembly::make_quadrature(*disc);
        double num = 0, den = 0;
        for (int k = 0; k < disc->num_patches(); ++k) {
            // locate the same model patch in the monolithic discretisation
            int km = -1;
            for (int m = 0; m < mono.disc->num_patches(); ++m)
                if (mono.disc->patch_ids[m] == disc->patch_ids[k]) km = m;
            REQUIRE(km >= 0);
            for (double u : {0.1, 0.35, 0.62, 0.88})
                for (double v : {0.15, 0.5, 0.85}) {
                    const double a = postproc::eval_field_at(field, k, u, v).a_z;
                    const double b = postproc::eval_field_at(mono.field, km, u, v).a_z;
                    num += (a - b) * (a - b);
                    den += b * b;
                }
        }
        CHECK(std::sqrt(num / den) < 10 * tol);
    }

    SUBCASE("the converged interface jump is below the tolerance scale") {
        CHECK(coupling::interface_jump(dtn.rotor, *dtn.trace_rotor, dtn.stator,
                                       *dtn.trace_stator) < 10 * tol);
    }
}
