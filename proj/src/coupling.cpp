#include "igamag/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace igamag::coupling {

namespace {

constexpr double kPi = std::numbers::pi;

double unwrap_near(double angle, double ref) {
    while (angle < ref - kPi) angle += 2 * kPi;
    while (angle > ref + kPi) angle -= 2 * kPi;
    return angle;
}

struct EdgePoint {
    geom::Point2 x;
    geom::Point2 dx;  // derivative w.r.t. the edge parameter
};

EdgePoint eval_edge(const geom::Patch& p, geom::Side s, double t) {
    double u = 0, v = 0;
    geom::edge_param(s, t, u, v);
    const geom::MapEval me = geom::eval_map(p, u, v);
    if (s == geom::Side::U0 || s == geom::Side::U1)
        return {me.x, {me.J[0][1], me.J[1][1]}};
    return {me.x, {me.J[0][0], me.J[1][0]}};
}

}  // namespace

const splines::KnotVector& TraceSpace::seg_space(const Seg& s) const {
    const assembly::PatchSpace& sp = disc->spaces[s.disc_patch];
    return (s.side == geom::Side::V0 || s.side == geom::Side::V1) ? sp.ku : sp.kv;
}

splines::WeightedBasisEvaluation TraceSpace::seg_basis(const Seg& s, double t) const {
    return splines::eval_nurbs(seg_space(s), s.wts, t);
}

double TraceSpace::param_from_angle(const Seg& s, double phi) const {
    const geom::Patch& patch = disc->patch(s.disc_patch);
    double lo = 0.0, hi = 1.0;
    double t = std::clamp((phi - s.phi0) / (s.phi1 - s.phi0), 0.0, 1.0);
    for (int it = 0; it < 100; ++it) {
        const EdgePoint ep = eval_edge(patch, s.side, t);
        const double ang = unwrap_near(std::atan2(ep.x.y, ep.x.x), phi);
        const double err = ang - phi;
        if (std::abs(err) < 1e-14) return t;
        if (err > 0)
            hi = t;
        else
            lo = t;
        const double r2 = ep.x.x * ep.x.x + ep.x.y * ep.x.y;
        const double dang = (ep.x.x * ep.dx.y - ep.x.y * ep.dx.x) / r2;
        double tn = t - err / dang;
        if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
        if (tn == t) break;
        t = tn;
    }
    return t;
}

TraceSpacePtr build_trace_space(assembly::DiscPtr disc, const assembly::DofMap& dm,
                                geom::EdgeTag tag) {
    auto ts = std::make_shared<TraceSpace>();
    ts->disc = disc;
    ts->chain = assembly::build_interface_chain(*disc, dm, tag);

    double prev_phi1 = 0.0;
    for (size_t i = 0; i < ts->chain.segs.size(); ++i) {
        const assembly::ChainSeg& cs = ts->chain.segs[i];
        TraceSpace::Seg seg;
        seg.disc_patch = cs.disc_patch;
        seg.side = cs.side;
        seg.offset = cs.offset;
        const geom::Patch& patch = disc->patch(cs.disc_patch);

        const EdgePoint e0 = eval_edge(patch, cs.side, 0.0);
        const EdgePoint e1 = eval_edge(patch, cs.side, 1.0);
        double phi0 = std::atan2(e0.x.y, e0.x.x);
        if (i > 0) phi0 = unwrap_near(phi0, prev_phi1);
        double phi1 = unwrap_near(std::atan2(e1.x.y, e1.x.x), phi0);
        if (!(phi1 > phi0))
            throw std::runtime_error(
                "trace space: edge parameter must increase with the angle");
        if (i > 0 && std::abs(phi0 - prev_phi1) > 1e-9)
            throw std::runtime_error("trace space: interface edges are not contiguous");
        seg.phi0 = phi0;
        seg.phi1 = phi1;
        prev_phi1 = phi1;

        seg.wts = assembly::edge_weights(disc->spaces[cs.disc_patch], cs.side);
        const auto& kv = (cs.side == geom::Side::V0 || cs.side == geom::Side::V1)
                             ? disc->spaces[cs.disc_patch].ku
                             : disc->spaces[cs.disc_patch].kv;
        for (double b : kv.breakpoints()) {
            if (b == 0.0) {
                seg.brk_phi.push_back(phi0);
            } else if (b == 1.0) {
                seg.brk_phi.push_back(phi1);
            } else {
                const EdgePoint eb = eval_edge(patch, cs.side, b);
                seg.brk_phi.push_back(
                    unwrap_near(std::atan2(eb.x.y, eb.x.x), 0.5 * (phi0 + phi1)));
            }
        }
        ts->segs.push_back(std::move(seg));
    }

    ts->phi_start = ts->segs.front().phi0;
    ts->pitch = disc->model->pole_pitch();
    const double span = ts->segs.back().phi1 - ts->phi_start;
    if (std::abs(span - ts->pitch) > 1e-7)
        throw std::runtime_error("trace space: interface does not span one pole pitch");

    const EdgePoint mid =
        eval_edge(disc->patch(ts->segs.front().disc_patch), ts->segs.front().side, 0.5);
    ts->radius = std::hypot(mid.x.x, mid.x.y);

    const assembly::DofRef& front = ts->chain.funcs.front();
    const assembly::DofRef& back = ts->chain.funcs.back();
    ts->ends_tied = front.kind == back.kind && front.index == back.index;
    ts->ends_rel = front.sign * back.sign;
    return ts;
}

TraceFunction zero_trace(TraceSpacePtr space) {
    TraceFunction f;
    f.c.assign(space->size(), 0.0);
    f.space = std::move(space);
    return f;
}

TraceFunction extract_trace(const std::vector<double>& x_free,
                            const assembly::DofMap& dm, TraceSpacePtr space) {
    TraceFunction f;
    f.c.resize(space->size());
    for (int i = 0; i < space->size(); ++i) {
        const assembly::DofRef& r = space->chain.funcs[i];
        const double v = r.kind == assembly::DofKind::Free ? x_free[r.index]
                                                           : dm.slot_value[r.index];
        f.c[i] = r.sign * v;
    }
    f.space = std::move(space);
    return f;
}

double TraceFunction::eval(double phi) const {
    const TraceSpace& ts = *space;
    double sgn = 1.0;
    while (phi < ts.phi_start - 1e-12) {
        phi += ts.pitch;
        sgn = -sgn;
    }
    while (phi > ts.phi_start + ts.pitch + 1e-12) {
        phi -= ts.pitch;
        sgn = -sgn;
    }
    phi = std::clamp(phi, ts.phi_start, ts.phi_start + ts.pitch);
    const TraceSpace::Seg* seg = &ts.segs.back();
    for (const auto& s : ts.segs)
        if (phi <= s.phi1 + 1e-14) {
            seg = &s;
            break;
        }
    const double t = ts.param_from_angle(*seg, phi);
    const auto b = ts.seg_basis(*seg, t);
    double acc = 0;
    for (size_t i = 0; i < b.values.size(); ++i)
        acc += c[seg->offset + b.first + i] * b.values[i];
    return sgn * acc;
}

namespace {

// union of element boundaries of a target window with the (shifted, wrapped)
// boundaries of a source space
std::vector<double> merged_breakpoints(const TraceSpace& target,
                                       const TraceSpace* source, double offset) {
    const double a = target.phi_start, b = target.phi_start + target.pitch;
    std::set<double> cuts;
    for (const auto& s : target.segs)
        for (double phi : s.brk_phi) cuts.insert(std::clamp(phi, a, b));
    if (source) {
        for (const auto& s : source->segs)
            for (double phi : s.brk_phi) {
                const double base = phi + offset;
                const double k0 = std::floor((a - base) / source->pitch);
                for (int m = -1; m <= 2; ++m) {
                    const double x = base + (k0 + m) * source->pitch;
                    if (x > a + 1e-13 && x < b - 1e-13) cuts.insert(x);
                }
            }
    }
    cuts.insert(a);
    cuts.insert(b);
    std::vector<double> out;
    for (double x : cuts)
        if (out.empty() || x - out.back() > 1e-13) out.push_back(x);
    return out;
}

const TraceSpace::Seg& locate_seg(const TraceSpace& ts, double phi) {
    for (const auto& s : ts.segs)
        if (phi <= s.phi1 + 1e-14 && phi >= s.phi0 - 1e-14) return s;
    throw std::runtime_error("trace space: angle outside the interface window");
}

// reduced numbering when the chain ends are one periodic entity
struct Reduction {
    int n = 0;
    bool tied = false;
    double rel = 1.0;
    int red(int i) const { return (tied && i == n - 1) ? 0 : i; }
    double fac(int i) const { return (tied && i == n - 1) ? rel : 1.0; }
    int size() const { return tied ? n - 1 : n; }
};

}  // namespace

TraceFunction project_trace(const TraceFunction& f, TraceSpacePtr target,
                            double rotation_offset) {
    const TraceSpace& ts = *target;
    const std::vector<double> cuts = merged_breakpoints(ts, f.space.get(), rotation_offset);
    const int p_t = ts.disc->degree;
    const int p_f = f.space->disc->degree;
    const auto gl = quadrature::gauss_legendre(std::max(p_t, p_f) + 2);

    const Reduction rd{ts.size(), ts.ends_tied, ts.ends_rel};
    std::vector<linalg::Triplet> mt;
    std::vector<double> rhs(rd.size(), 0.0);

    for (size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double h = cuts[c + 1] - cuts[c];
        if (h < 1e-13) continue;
        const TraceSpace::Seg& seg = locate_seg(ts, 0.5 * (cuts[c] + cuts[c + 1]));
        for (size_t q = 0; q < gl.x.size(); ++q) {
            const double phi = cuts[c] + h * gl.x[q];
            const double w = h * gl.w[q] * ts.radius;
            const double t = ts.param_from_angle(seg, phi);
            const auto b = ts.seg_basis(seg, t);
            const double fv = f.eval(phi - rotation_offset);
            for (size_t i = 0; i < b.values.size(); ++i) {
                const int gi = seg.offset + b.first + static_cast<int>(i);
                rhs[rd.red(gi)] += rd.fac(gi) * b.values[i] * fv * w;
                for (size_t j = 0; j < b.values.size(); ++j) {
                    const int gj = seg.offset + b.first + static_cast<int>(j);
                    mt.push_back({rd.red(gi), rd.red(gj),
                                  rd.fac(gi) * rd.fac(gj) * b.values[i] * b.values[j] * w});
                }
            }
        }
    }

    const linalg::SparseMatrix M =
        linalg::SparseMatrix::from_triplets(rd.size(), rd.size(), std::move(mt));
    std::vector<double> x(rd.size(), 0.0);
    const linalg::SolveReport rep = solve_spd(M, rhs, x, 1e-13, 40 * rd.size() + 200);
    if (!rep.converged)
        throw std::runtime_error("project_trace: interface mass system did not converge");

    TraceFunction out;
    out.space = std::move(target);
    out.c.resize(rd.n);
    for (int i = 0; i < rd.n; ++i) out.c[i] = rd.fac(i) * x[rd.red(i)];
    return out;
}

TraceFunction relax_update(const TraceFunction& lambda_k,
                           const TraceFunction& stator_trace, double alpha) {
    if (lambda_k.space.get() != stator_trace.space.get() ||
        lambda_k.c.size() != stator_trace.c.size())
        throw std::invalid_argument("relax_update: trace space mismatch");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("relax_update: alpha outside [0,1]");
    TraceFunction out;
    out.space = lambda_k.space;
    out.c.resize(lambda_k.c.size());
    for (size_t i = 0; i < out.c.size(); ++i)
        out.c[i] = alpha * stator_trace.c[i] + (1.0 - alpha) * lambda_k.c[i];
    return out;
}

namespace {

// anti-periodic lookup of a field value / normal flux on the gap circle
struct GapSample {
    double a_z;
    double flux;  // nu * dA/dn, n radially outward
};

GapSample gap_sample(const postproc::Field& field, const TraceSpace& ts, double phi) {
    double sgn = 1.0;
    while (phi < ts.phi_start - 1e-12) {
        phi += ts.pitch;
        sgn = -sgn;
    }
    while (phi > ts.phi_start + ts.pitch + 1e-12) {
        phi -= ts.pitch;
        sgn = -sgn;
    }
    phi = std::clamp(phi, ts.phi_start, ts.phi_start + ts.pitch);
    const TraceSpace::Seg& seg = locate_seg(ts, phi);
    const double t = ts.param_from_angle(seg, phi);
    double u = 0, v = 0;
    geom::edge_param(seg.side, t, u, v);
    const postproc::FieldSample s = postproc::eval_field_at(field, seg.disc_patch, u, v);
    const geom::Material& mat =
        ts.disc->model->materials.at(ts.disc->patch(seg.disc_patch).region);
    // dA/dx = -By, dA/dy = Bx
    const double c = std::cos(phi), sn = std::sin(phi);
    const double flux = mat.nu * (-s.b.y * c + s.b.x * sn);
    return {sgn * s.a_z, sgn * flux};
}

}  // namespace

double gap_value(const postproc::Field& field, const TraceSpace& side, double phi) {
    return gap_sample(field, side, phi).a_z;
}

double gap_flux(const postproc::Field& field, const TraceSpace& side, double phi) {
    return gap_sample(field, side, phi).flux;
}

std::vector<double> neumann_load(const postproc::Field& rotor_field,
                                 const TraceSpace& rotor_side,
                                 const TraceSpace& stator_side,
                                 const assembly::DofMap& stator_dm, double normal_sign) {
    if (std::abs(rotor_side.radius - stator_side.radius) > 1e-9)
        throw std::invalid_argument("neumann_load: interface radii differ");
    const std::vector<double> cuts =
        merged_breakpoints(stator_side, &rotor_side, 0.0);
    const int p_max = std::max(rotor_side.disc->degree, stator_side.disc->degree);
    const auto gl = quadrature::gauss_legendre(p_max + 2);

    std::vector<double> g_chain(stator_side.size(), 0.0);
    for (size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double h = cuts[c + 1] - cuts[c];
        if (h < 1e-13) continue;
        const TraceSpace::Seg& seg = locate_seg(stator_side, 0.5 * (cuts[c] + cuts[c + 1]));
        for (size_t q = 0; q < gl.x.size(); ++q) {
            const double phi = cuts[c] + h * gl.x[q];
            const double w = h * gl.w[q] * stator_side.radius;
            const double flux = gap_sample(rotor_field, rotor_side, phi).flux;
            const double t = stator_side.param_from_angle(seg, phi);
            const auto b = stator_side.seg_basis(seg, t);
            for (size_t i = 0; i < b.values.size(); ++i)
                g_chain[seg.offset + b.first + i] += normal_sign * flux * b.values[i] * w;
        }
    }

    std::vector<double> load(stator_dm.free_count, 0.0);
    for (int i = 0; i < stator_side.size(); ++i) {
        const assembly::DofRef& r = stator_side.chain.funcs[i];
        if (r.kind == assembly::DofKind::Free) load[r.index] += r.sign * g_chain[i];
    }
    return load;
}

double interface_jump(const postproc::Field& rotor_field, const TraceSpace& rotor_side,
                      const postproc::Field& stator_field,
                      const TraceSpace& stator_side) {
    const std::vector<double> cuts = merged_breakpoints(stator_side, &rotor_side, 0.0);
    const auto gl = quadrature::gauss_legendre(
        std::max(rotor_side.disc->degree, stator_side.disc->degree) + 2);
    double num = 0, den = 0;
    for (size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double h = cuts[c + 1] - cuts[c];
        if (h < 1e-13) continue;
        for (size_t q = 0; q < gl.x.size(); ++q) {
            const double phi = cuts[c] + h * gl.x[q];
            const double w = h * gl.w[q] * stator_side.radius;
            const double a_rt = gap_sample(rotor_field, rotor_side, phi).a_z;
            const double a_st = gap_sample(stator_field, stator_side, phi).a_z;
            num += (a_rt - a_st) * (a_rt - a_st) * w;
            den += a_st * a_st * w;
        }
    }
    return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

DtnResult dtn_iterate(std::shared_ptr<const geom::MultiPatchModel> model,
                      const DtnOptions& opts) {
    if (!(opts.alpha >= 0.0 && opts.alpha <= 1.0))
        throw std::invalid_argument("dtn_iterate: alpha outside [0,1]");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("dtn_iterate: tol must be positive");

    DtnResult res;
    res.state.alpha = opts.alpha;
    res.state.tol = opts.tol;
    res.state.max_iter = opts.max_iter;

    res.disc_rotor = assembly::discretize(model, geom::Subdomain::Rotor, opts.degree,
                                          opts.refine);
    res.disc_stator = assembly::discretize(model, geom::Subdomain::Stator, opts.degree,
                                           opts.refine);
    assembly::DofMapOptions rt_opts;
    rt_opts.dirichlet_airgap = true;
    res.dm_rotor = std::make_shared<assembly::DofMap>(
        assembly::build_dof_map(*res.disc_rotor, rt_opts));
    res.dm_stator = std::make_shared<assembly::DofMap>(
        assembly::build_dof_map(*res.disc_stator, assembly::DofMapOptions{}));
    res.ndof_rotor = res.dm_rotor->free_count;
    res.ndof_stator = res.dm_stator->free_count;

    const assembly::QuadratureRule quad_rt = assembly::make_quadrature(*res.disc_rotor);
    const assembly::QuadratureRule quad_st = assembly::make_quadrature(*res.disc_stator);
    const assembly::AssembledSystem sys_rt =
        assembly::assemble_system(*res.disc_rotor, *res.dm_rotor, quad_rt);
    const assembly::AssembledSystem sys_st =
        assembly::assemble_system(*res.disc_stator, *res.dm_stator, quad_st);

    res.trace_rotor = build_trace_space(res.disc_rotor, *res.dm_rotor, geom::EdgeTag::AirGap);
    res.trace_stator =
        build_trace_space(res.disc_stator, *res.dm_stator, geom::EdgeTag::AirGap);
    if (std::abs(res.trace_rotor->radius - res.trace_stator->radius) > 1e-9)
        throw std::runtime_error("dtn_iterate: rotor and stator gap circles differ");

    TraceFunction lambda = zero_trace(res.trace_rotor);
    std::vector<double> x_rt(res.ndof_rotor, 0.0), x_st(res.ndof_stator, 0.0);
    postproc::Field prev_rt = postproc::zero_field(res.disc_rotor);
    postproc::Field prev_st = postproc::zero_field(res.disc_stator);

    const int inner_max = 40 * std::max(res.ndof_rotor, res.ndof_stator) + 200;
    for (int k = 1; k <= opts.max_iter; ++k) {
        assembly::apply_dirichlet_trace(*res.dm_rotor, sys_rt, res.trace_rotor->chain,
                                        lambda.c);
        const std::vector<double> rhs_rt = assembly::constrained_rhs(sys_rt, *res.dm_rotor);
        if (!solve_spd(sys_rt.K, rhs_rt, x_rt, opts.inner_rtol, inner_max).converged)
            throw NonConvergenceError("dtn_iterate: rotor solve did not converge");
        postproc::Field f_rt = postproc::expand_field(res.disc_rotor, *res.dm_rotor, x_rt);

        const std::vector<double> g =
            neumann_load(f_rt, *res.trace_rotor, *res.trace_stator, *res.dm_stator);
        const std::vector<double> rhs_st =
            assembly::constrained_rhs(sys_st, *res.dm_stator, &g);
        if (!solve_spd(sys_st.K, rhs_st, x_st, opts.inner_rtol, inner_max).converged)
            throw NonConvergenceError("dtn_iterate: stator solve did not converge");
        postproc::Field f_st = postproc::expand_field(res.disc_stator, *res.dm_stator, x_st);

        const double nrm_rt = postproc::l2_norm(f_rt, quad_rt);
        const double nrm_st = postproc::l2_norm(f_st, quad_st);
        const double d_rt = postproc::l2_diff(f_rt, prev_rt, quad_rt);
        const double d_st = postproc::l2_diff(f_st, prev_st, quad_st);
        const double eps_rt = nrm_rt > 0 ? d_rt / nrm_rt : d_rt;
        const double eps_st = nrm_st > 0 ? d_st / nrm_st : d_st;
        res.state.history.push_back({eps_rt, eps_st});
        res.state.iterations = k;
        prev_rt = std::move(f_rt);
        prev_st = std::move(f_st);

        if (eps_rt < opts.tol && eps_st < opts.tol) {
            res.state.converged = true;
            break;
        }

        const TraceFunction st_trace = extract_trace(x_st, *res.dm_stator, res.trace_stator);
        const TraceFunction projected = project_trace(st_trace, res.trace_rotor, 0.0);
        lambda = relax_update(lambda, projected, opts.alpha);
    }

    res.rotor = std::move(prev_rt);
    res.stator = std::move(prev_st);
    res.lambda = std::move(lambda);
    return res;
}

}  // namespace igamag::coupling
