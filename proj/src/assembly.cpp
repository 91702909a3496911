#include "igamag/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace igamag::assembly {

using geom::EdgeTag;
using geom::Side;
using geom::Subdomain;

namespace {

// knots of `fine` that are missing from `coarse`, with multiplicity
std::vector<double> missing_knots(const splines::KnotVector& coarse,
                                  const splines::KnotVector& fine) {
    std::vector<double> out;
    size_t i = 0;
    for (double k : fine.knots()) {
        if (i < coarse.knots().size() && coarse.knots()[i] == k)
            ++i;
        else
            out.push_back(k);
    }
    if (i != coarse.knots().size())
        throw std::logic_error("missing_knots: knot vectors are not nested");
    return out;
}

// Boehm insertion on a scalar (weight) row
std::vector<double> refine_weight_row(const splines::KnotVector& from,
                                      const splines::KnotVector& to,
                                      const std::vector<double>& row) {
    std::vector<splines::WPoint> hw(row.size());
    for (size_t i = 0; i < row.size(); ++i) hw[i] = {0.0, 0.0, row[i]};
    splines::KnotVector kv = from;
    for (double k : missing_knots(from, to)) {
        auto [kv2, hw2] = splines::insert_knot(kv, hw, k);
        kv = std::move(kv2);
        hw = std::move(hw2);
    }
    std::vector<double> out(hw.size());
    for (size_t i = 0; i < hw.size(); ++i) out[i] = hw[i].w;
    return out;
}

}  // namespace

PatchSpace make_solution_space(const geom::Patch& patch, int degree, int refine) {
    if (degree < 1) throw std::invalid_argument("make_solution_space: degree must be >= 1");
    if (refine < 0) throw std::invalid_argument("make_solution_space: refine must be >= 0");
    auto build = [&](const splines::KnotVector& geo) {
        const auto bks = geo.breakpoints();
        std::vector<int> mult;
        for (size_t i = 1; i + 1 < bks.size(); ++i) {
            // a parametric C0 joint of the map stays C0 in the solution space
            const bool c0 = geo.multiplicity(bks[i]) == geo.degree();
            mult.push_back(c0 ? degree : 1);
        }
        return splines::KnotVector::from_breakpoints(degree, bks, mult)
            .refined_uniform(refine);
    };
    PatchSpace sp{build(patch.ku), build(patch.kv), {}};

    // carry the geometry's weight function into the solution space where it
    // is representable: per direction either the degrees match (knot
    // insertion) or the weights do not vary along it (plain extension)
    const int gnu = patch.net.nu, gnv = patch.net.nv;
    bool const_u = true, const_v = true;
    for (int j = 0; j < gnv; ++j)
        for (int i = 0; i < gnu; ++i) {
            const_u = const_u && std::abs(patch.net.weight(i, j) -
                                          patch.net.weight(0, j)) < 1e-14;
            const_v = const_v && std::abs(patch.net.weight(i, j) -
                                          patch.net.weight(i, 0)) < 1e-14;
        }
    const bool ok_u = degree == patch.ku.degree() || const_u;
    const bool ok_v = degree == patch.kv.degree() || const_v;
    const int nu = sp.nu(), nv = sp.nv();
    sp.weights.assign(static_cast<size_t>(nu) * nv, 1.0);
    if (ok_u && ok_v) {
        // u pass on the geometry grid
        std::vector<std::vector<double>> rows(gnv);
        for (int j = 0; j < gnv; ++j) {
            std::vector<double> row(gnu);
            for (int i = 0; i < gnu; ++i) row[i] = patch.net.weight(i, j);
            if (degree == patch.ku.degree())
                rows[j] = refine_weight_row(patch.ku, sp.ku, row);
            else
                rows[j].assign(nu, row[0]);  // constant along u
        }
        // v pass on the columns
        for (int i = 0; i < nu; ++i) {
            std::vector<double> col(gnv);
            for (int j = 0; j < gnv; ++j) col[j] = rows[j][i];
            std::vector<double> fine;
            if (degree == patch.kv.degree())
                fine = refine_weight_row(patch.kv, sp.kv, col);
            else
                fine.assign(nv, col[0]);  // constant along v
            for (int j = 0; j < nv; ++j) sp.weights[j * nu + i] = fine[j];
        }
    }
    return sp;
}

std::vector<double> edge_weights(const PatchSpace& sp, geom::Side side) {
    std::vector<double> out;
    switch (side) {
        case geom::Side::U0:
            for (int j = 0; j < sp.nv(); ++j) out.push_back(sp.weight(0, j));
            break;
        case geom::Side::U1:
            for (int j = 0; j < sp.nv(); ++j) out.push_back(sp.weight(sp.nu() - 1, j));
            break;
        case geom::Side::V0:
            for (int i = 0; i < sp.nu(); ++i) out.push_back(sp.weight(i, 0));
            break;
        case geom::Side::V1:
            for (int i = 0; i < sp.nu(); ++i) out.push_back(sp.weight(i, sp.nv() - 1));
            break;
    }
    return out;
}

void rational_basis(const PatchSpace& sp, const splines::BasisEvaluation& bu,
                    const splines::BasisEvaluation& bv, std::vector<double>& val,
                    std::vector<double>& du, std::vector<double>& dv) {
    const int pu1 = static_cast<int>(bu.values.size());
    const int pv1 = static_cast<int>(bv.values.size());
    const int nloc = pu1 * pv1;
    val.resize(nloc);
    du.resize(nloc);
    dv.resize(nloc);
    const int nu = sp.nu();
    double W = 0, Wu = 0, Wv = 0;
    for (int i = 0; i < pu1; ++i)
        for (int j = 0; j < pv1; ++j) {
            const double w = sp.weights[(bv.first + j) * nu + (bu.first + i)];
            W += w * bu.values[i] * bv.values[j];
            Wu += w * bu.derivatives[i] * bv.values[j];
            Wv += w * bu.values[i] * bv.derivatives[j];
        }
    for (int i = 0; i < pu1; ++i)
        for (int j = 0; j < pv1; ++j) {
            const int l = i * pv1 + j;
            const double w = sp.weights[(bv.first + j) * nu + (bu.first + i)];
            const double f = bu.values[i] * bv.values[j];
            const double fu = bu.derivatives[i] * bv.values[j];
            const double fv = bu.values[i] * bv.derivatives[j];
            val[l] = w * f / W;
            du[l] = w * (fu * W - f * Wu) / (W * W);
            dv[l] = w * (fv * W - f * Wv) / (W * W);
        }
}

DiscPtr discretize(std::shared_ptr<const geom::MultiPatchModel> model,
                   std::optional<geom::Subdomain> which, int degree, int refine) {
    auto disc = std::make_shared<Discretization>();
    disc->model = std::move(model);
    disc->degree = degree;
    disc->refine = refine;
    for (size_t k = 0; k < disc->model->patches.size(); ++k) {
        if (which && disc->model->subdomain[k] != *which) continue;
        disc->patch_ids.push_back(static_cast<int>(k));
        disc->spaces.push_back(make_solution_space(disc->model->patches[k], degree, refine));
    }
    return disc;
}

namespace {

// union-find with a relative sign on every link: value(a) = sign * value(root)
class SignedUnionFind {
public:
    explicit SignedUnionFind(int n) : parent_(n), sign_(n, 1) {
        for (int i = 0; i < n; ++i) parent_[i] = i;
    }

    std::pair<int, int> find(int a) {
        if (parent_[a] == a) return {a, 1};
        auto [root, s] = find(parent_[a]);
        parent_[a] = root;
        sign_[a] = static_cast<signed char>(s * sign_[a]);
        return {root, sign_[a]};
    }

    // impose value(a) = rel * value(b)
    void unite(int a, int b, int rel) {
        auto [ra, sa] = find(a);
        auto [rb, sb] = find(b);
        if (ra == rb) {
            if (sa != rel * sb)
                throw std::runtime_error("dof map: contradictory constraint signs");
            return;
        }
        parent_[ra] = rb;
        sign_[ra] = static_cast<signed char>(rel * sa * sb);
    }

private:
    std::vector<int> parent_;
    std::vector<signed char> sign_;
};

std::vector<int> edge_locals(const PatchSpace& sp, Side s) {
    const int nu = sp.nu(), nv = sp.nv();
    std::vector<int> out;
    switch (s) {
        case Side::U0:
            for (int j = 0; j < nv; ++j) out.push_back(j * nu);
            break;
        case Side::U1:
            for (int j = 0; j < nv; ++j) out.push_back(j * nu + nu - 1);
            break;
        case Side::V0:
            for (int i = 0; i < nu; ++i) out.push_back(i);
            break;
        case Side::V1:
            for (int i = 0; i < nu; ++i) out.push_back((nv - 1) * nu + i);
            break;
    }
    return out;
}

const splines::KnotVector& edge_space(const PatchSpace& sp, Side s) {
    return (s == Side::V0 || s == Side::V1) ? sp.ku : sp.kv;
}

}  // namespace

DofMap build_dof_map(const Discretization& disc, const DofMapOptions& opts) {
    const geom::MultiPatchModel& model = *disc.model;
    const int np = disc.num_patches();

    std::vector<int> offset(np + 1, 0);
    for (int k = 0; k < np; ++k)
        offset[k + 1] = offset[k] + disc.spaces[k].nu() * disc.spaces[k].nv();
    SignedUnionFind uf(offset[np]);

    struct Entry {
        int k;  // disc patch index
        Side side;
        geom::EdgeGeometry geo;
    };
    std::vector<Entry> edges;
    for (int k = 0; k < np; ++k)
        for (Side s : {Side::U0, Side::U1, Side::V0, Side::V1})
            edges.push_back({k, s, geom::edge_geometry(model, disc.patch_ids[k], s)});

    constexpr double tol = 1e-9;
    auto glue = [&](const Entry& a, const Entry& b, int rel) {
        const auto la = edge_locals(disc.spaces[a.k], a.side);
        const auto lb = edge_locals(disc.spaces[b.k], b.side);
        if (la.size() != lb.size() ||
            !(edge_space(disc.spaces[a.k], a.side) == edge_space(disc.spaces[b.k], b.side)))
            throw std::runtime_error("dof map: coincident edges carry different trace spaces");
        const auto wa = edge_weights(disc.spaces[a.k], a.side);
        const auto wb = edge_weights(disc.spaces[b.k], b.side);
        for (size_t i = 0; i < wa.size(); ++i)
            if (std::abs(wa[i] - wb[i]) > 1e-12)
                throw std::runtime_error(
                    "dof map: coincident edges carry different trace weights");
        for (size_t i = 0; i < la.size(); ++i)
            uf.unite(offset[a.k] + la[i], offset[b.k] + lb[i], rel);
    };

    // C0 gluing of coincident interior interfaces
    for (size_t a = 0; a < edges.size(); ++a) {
        for (size_t b = a + 1; b < edges.size(); ++b) {
            if (edges[a].k == edges[b].k) continue;
            const int pa = disc.patch_ids[edges[a].k], pb = disc.patch_ids[edges[b].k];
            const bool same_sd = model.subdomain[pa] == model.subdomain[pb];
            const bool ag_pair = model.tag(pa, edges[a].side) == EdgeTag::AirGap &&
                                 model.tag(pb, edges[b].side) == EdgeTag::AirGap;
            if (!same_sd && !(opts.glue_airgap && ag_pair)) continue;
            if (!geom::edges_coincide(edges[a].geo, edges[b].geo, tol)) continue;
            if (same_sd && (model.tag(pa, edges[a].side) != EdgeTag::None ||
                            model.tag(pb, edges[b].side) != EdgeTag::None))
                continue;  // tagged edges are boundaries, not interior joints
            glue(edges[a], edges[b], 1);
        }
    }
    if (opts.glue_airgap) {
        // every air-gap edge must have found a partner
        for (const auto& e : edges) {
            const int pid = disc.patch_ids[e.k];
            if (model.tag(pid, e.side) != EdgeTag::AirGap) continue;
            bool matched = false;
            for (const auto& f : edges) {
                if (&f == &e) continue;
                const int fid = disc.patch_ids[f.k];
                if (model.subdomain[fid] == model.subdomain[pid]) continue;
                if (geom::edges_coincide(e.geo, f.geo, tol)) matched = true;
            }
            if (!matched)
                throw std::runtime_error(
                    "dof map: monolithic gluing requested on a non-conforming air gap");
        }
    }

    // anti-periodic pairs: value(left) = -value(right), congruent under +pitch
    const double pitch = model.pole_pitch();
    for (Subdomain sd : {Subdomain::Rotor, Subdomain::Stator}) {
        std::vector<const Entry*> lefts, rights;
        for (const auto& e : edges) {
            const int pid = disc.patch_ids[e.k];
            if (model.subdomain[pid] != sd) continue;
            const EdgeTag t = model.tag(pid, e.side);
            if (t == EdgeTag::Left) lefts.push_back(&e);
            if (t == EdgeTag::Right) rights.push_back(&e);
        }
        if (lefts.size() != rights.size())
            throw std::runtime_error("dof map: left/right edge counts differ");
        for (const Entry* r : rights) {
            const Entry* match = nullptr;
            for (const Entry* l : lefts)
                if (geom::edges_coincide(r->geo, l->geo, tol, pitch)) match = l;
            if (!match)
                throw std::runtime_error("dof map: right edge without congruent left edge");
            glue(*match, *r, -1);
        }
    }

    // Dirichlet marking per equivalence class
    std::vector<EdgeTag> fixed_tag(offset[np], EdgeTag::None);
    for (const auto& e : edges) {
        const EdgeTag t = model.tag(disc.patch_ids[e.k], e.side);
        const bool fix = (t == EdgeTag::Dirichlet && opts.dirichlet_gamma_d) ||
                         (t == EdgeTag::AirGap && opts.dirichlet_airgap && !opts.glue_airgap);
        if (!fix) continue;
        for (int l : edge_locals(disc.spaces[e.k], e.side)) {
            auto [root, s] = uf.find(offset[e.k] + l);
            (void)s;
            if (fixed_tag[root] == EdgeTag::None || t == EdgeTag::Dirichlet)
                fixed_tag[root] = t;
        }
    }

    // deterministic enumeration: first-seen class order, patch by patch
    DofMap dm;
    dm.local.resize(np);
    std::vector<int> assigned(offset[np], -1);
    for (int k = 0; k < np; ++k) {
        const int n = disc.spaces[k].nu() * disc.spaces[k].nv();
        dm.local[k].resize(n);
        for (int l = 0; l < n; ++l) {
            auto [root, s] = uf.find(offset[k] + l);
            if (assigned[root] < 0) {
                if (fixed_tag[root] != EdgeTag::None) {
                    assigned[root] = dm.slot_count();
                    dm.slot_value.push_back(0.0);
                    dm.slot_tag.push_back(fixed_tag[root]);
                } else {
                    assigned[root] = dm.free_count++;
                }
            }
            dm.local[k][l] = {fixed_tag[root] != EdgeTag::None ? DofKind::Fixed : DofKind::Free,
                              assigned[root], static_cast<double>(s)};
        }
    }
    return dm;
}

QuadratureRule make_quadrature(const Discretization& disc, int points_per_dir) {
    QuadratureRule rule;
    rule.points_per_dir = points_per_dir;
    rule.patches.resize(disc.num_patches());
    for (int k = 0; k < disc.num_patches(); ++k) {
        const geom::Patch& patch = disc.patch(k);
        const PatchSpace& sp = disc.spaces[k];
        PatchCache& pc = rule.patches[k];
        auto fill_axis = [&](AxisCache& ax, const splines::KnotVector& kv) {
            const int ngp = points_per_dir > 0 ? points_per_dir : kv.degree() + 1;
            const auto gl = quadrature::gauss_legendre(ngp);
            ax.ngp = ngp;
            ax.bks = kv.breakpoints();
            for (int e = 0; e + 1 < static_cast<int>(ax.bks.size()); ++e) {
                const double a = ax.bks[e], b = ax.bks[e + 1];
                for (int q = 0; q < ngp; ++q) {
                    const double u = a + (b - a) * gl.x[q];
                    ax.gp.push_back(u);
                    ax.gw.push_back((b - a) * gl.w[q]);
                    ax.basis.push_back(splines::eval_bspline(kv, u));
                }
            }
        };
        fill_axis(pc.au, sp.ku);
        fill_axis(pc.av, sp.kv);
        const int neu = pc.au.num_elems(), nev = pc.av.num_elems();
        pc.geo.reserve(static_cast<size_t>(neu) * nev * pc.au.ngp * pc.av.ngp);
        for (int eu = 0; eu < neu; ++eu)
            for (int ev = 0; ev < nev; ++ev)
                for (int a = 0; a < pc.au.ngp; ++a)
                    for (int b = 0; b < pc.av.ngp; ++b)
                        pc.geo.push_back(geom::eval_map(patch, pc.au.gp[eu * pc.au.ngp + a],
                                                        pc.av.gp[ev * pc.av.ngp + b]));
    }
    return rule;
}

namespace {

struct SystemParts {
    bool stiffness = false;
    bool sources = false;
    bool mass = false;
    const std::function<double(double, double)>* load = nullptr;
};

struct SystemOut {
    std::vector<linalg::Triplet> k_ff, k_fc, m_ff;
    std::vector<double> j_src, j_pm, load;
};

SystemOut element_loops(const Discretization& disc, const DofMap& dm,
                        const QuadratureRule& quad, const SystemParts& parts) {
    const geom::MultiPatchModel& model = *disc.model;
    SystemOut out;
    out.j_src.assign(dm.free_count, 0.0);
    out.j_pm.assign(dm.free_count, 0.0);
    out.load.assign(dm.free_count, 0.0);

    for (int k = 0; k < disc.num_patches(); ++k) {
        const PatchSpace& sp = disc.spaces[k];
        const PatchCache& pc = quad.patches[k];
        const geom::Material& mat = model.materials.at(disc.patch(k).region);
        const int pu1 = disc.spaces[k].ku.degree() + 1;
        const int pv1 = disc.spaces[k].kv.degree() + 1;
        const int nloc = pu1 * pv1;
        const int nu = sp.nu();
        const int neu = pc.au.num_elems(), nev = pc.av.num_elems();

        std::vector<double> ke(nloc * nloc), me(nloc * nloc), js(nloc), jp(nloc), fl(nloc);
        std::vector<double> val(nloc), pdu(nloc), pdv(nloc), gx(nloc), gy(nloc);

        for (int eu = 0; eu < neu; ++eu) {
            for (int ev = 0; ev < nev; ++ev) {
                std::fill(ke.begin(), ke.end(), 0.0);
                std::fill(me.begin(), me.end(), 0.0);
                std::fill(js.begin(), js.end(), 0.0);
                std::fill(jp.begin(), jp.end(), 0.0);
                std::fill(fl.begin(), fl.end(), 0.0);
                const auto& bu0 = pc.au.basis[eu * pc.au.ngp];
                const auto& bv0 = pc.av.basis[ev * pc.av.ngp];
                const int fu = bu0.first, fv = bv0.first;

                for (int a = 0; a < pc.au.ngp; ++a) {
                    const auto& bu = pc.au.basis[eu * pc.au.ngp + a];
                    for (int b = 0; b < pc.av.ngp; ++b) {
                        const auto& bv = pc.av.basis[ev * pc.av.ngp + b];
                        const geom::MapEval& ge =
                            pc.geo[((eu * nev + ev) * pc.au.ngp + a) * pc.av.ngp + b];
                        const double det = ge.det();
                        if (!(det > 0.0)) {
                            std::ostringstream os;
                            os << "assemble: singular Jacobian in patch "
                               << disc.patch_ids[k] << ", element (" << eu << "," << ev
                               << ")";
                            throw std::runtime_error(os.str());
                        }
                        const double wq =
                            pc.au.gw[eu * pc.au.ngp + a] * pc.av.gw[ev * pc.av.ngp + b];
                        const double scale = wq * det;
                        rational_basis(sp, bu, bv, val, pdu, pdv);
                        for (int l = 0; l < nloc; ++l) {
                            gx[l] = (pdu[l] * ge.J[1][1] - pdv[l] * ge.J[1][0]) / det;
                            gy[l] = (-pdu[l] * ge.J[0][1] + pdv[l] * ge.J[0][0]) / det;
                        }
                        if (parts.stiffness)
                            for (int l1 = 0; l1 < nloc; ++l1)
                                for (int l2 = 0; l2 < nloc; ++l2)
                                    ke[l1 * nloc + l2] +=
                                        mat.nu * (gx[l1] * gx[l2] + gy[l1] * gy[l2]) * scale;
                        if (parts.mass)
                            for (int l1 = 0; l1 < nloc; ++l1)
                                for (int l2 = 0; l2 < nloc; ++l2)
                                    me[l1 * nloc + l2] += val[l1] * val[l2] * scale;
                        if (parts.sources)
                            for (int l = 0; l < nloc; ++l) {
                                js[l] += mat.j_src * val[l] * scale;
                                jp[l] += (mat.h_pm.x * (-gy[l]) + mat.h_pm.y * gx[l]) * scale;
                            }
                        if (parts.load) {
                            const double f = (*parts.load)(ge.x.x, ge.x.y);
                            for (int l = 0; l < nloc; ++l) fl[l] += f * val[l] * scale;
                        }
                    }
                }

                // scatter with constraint signs
                for (int i1 = 0; i1 < pu1; ++i1) {
                    for (int j1 = 0; j1 < pv1; ++j1) {
                        const int l1 = i1 * pv1 + j1;
                        const DofRef r1 = dm.local[k][(fv + j1) * nu + (fu + i1)];
                        if (r1.kind != DofKind::Free) continue;
                        if (parts.sources) {
                            out.j_src[r1.index] += r1.sign * js[l1];
                            out.j_pm[r1.index] += r1.sign * jp[l1];
                        }
                        if (parts.load) out.load[r1.index] += r1.sign * fl[l1];
                        if (!parts.stiffness && !parts.mass) continue;
                        for (int i2 = 0; i2 < pu1; ++i2) {
                            for (int j2 = 0; j2 < pv1; ++j2) {
                                const int l2 = i2 * pv1 + j2;
                                const DofRef r2 = dm.local[k][(fv + j2) * nu + (fu + i2)];
                                const double s = r1.sign * r2.sign;
                                if (parts.stiffness) {
                                    const double v = s * ke[l1 * nloc + l2];
                                    if (r2.kind == DofKind::Free)
                                        out.k_ff.push_back({r1.index, r2.index, v});
                                    else
                                        out.k_fc.push_back({r1.index, r2.index, v});
                                }
                                if (parts.mass && r2.kind == DofKind::Free)
                                    out.m_ff.push_back({r1.index, r2.index,
                                                        s * me[l1 * nloc + l2]});
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace

AssembledSystem assemble_system(const Discretization& disc, const DofMap& dm,
                                const QuadratureRule& quad) {
    SystemParts parts;
    parts.stiffness = true;
    parts.sources = true;
    SystemOut so = element_loops(disc, dm, quad, parts);
    AssembledSystem sys;
    sys.K = linalg::SparseMatrix::from_triplets(dm.free_count, dm.free_count,
                                                std::move(so.k_ff));
    sys.K_fc = linalg::SparseMatrix::from_triplets(dm.free_count, dm.slot_count(),
                                                   std::move(so.k_fc));
    sys.j_src = std::move(so.j_src);
    sys.j_pm = std::move(so.j_pm);
    return sys;
}

linalg::SparseMatrix assemble_stiffness(const Discretization& disc, const DofMap& dm,
                                        const QuadratureRule& quad) {
    SystemParts parts;
    parts.stiffness = true;
    SystemOut so = element_loops(disc, dm, quad, parts);
    return linalg::SparseMatrix::from_triplets(dm.free_count, dm.free_count,
                                               std::move(so.k_ff));
}

std::pair<std::vector<double>, std::vector<double>>
assemble_sources(const Discretization& disc, const DofMap& dm, const QuadratureRule& quad) {
    SystemParts parts;
    parts.sources = true;
    SystemOut so = element_loops(disc, dm, quad, parts);
    return {std::move(so.j_src), std::move(so.j_pm)};
}

linalg::SparseMatrix assemble_mass(const Discretization& disc, const DofMap& dm,
                                   const QuadratureRule& quad) {
    SystemParts parts;
    parts.mass = true;
    SystemOut so = element_loops(disc, dm, quad, parts);
    return linalg::SparseMatrix::from_triplets(dm.free_count, dm.free_count,
                                               std::move(so.m_ff));
}

std::vector<double> assemble_load(const Discretization& disc, const DofMap& dm,
                                  const QuadratureRule& quad,
                                  const std::function<double(double, double)>& f) {
    SystemParts parts;
    parts.load = &f;
    SystemOut so = element_loops(disc, dm, quad, parts);
    return std::move(so.load);
}

std::vector<double> constrained_rhs(const AssembledSystem& sys, const DofMap& dm,
                                    const std::vector<double>* extra) {
    std::vector<double> rhs(dm.free_count);
    const std::vector<double> lift = sys.K_fc.spmv(dm.slot_value);
    for (int i = 0; i < dm.free_count; ++i) {
        rhs[i] = sys.j_src[i] + sys.j_pm[i] - lift[i];
        if (extra) rhs[i] += (*extra)[i];
    }
    return rhs;
}

InterfaceChain build_interface_chain(const Discretization& disc, const DofMap& dm,
                                     geom::EdgeTag tag) {
    const geom::MultiPatchModel& model = *disc.model;
    struct Raw {
        int k;
        Side side;
        double mid_angle;
        std::vector<int> locals;
    };
    std::vector<Raw> raws;
    for (int k = 0; k < disc.num_patches(); ++k) {
        for (Side s : {Side::U0, Side::U1, Side::V0, Side::V1}) {
            if (model.tag(disc.patch_ids[k], s) != tag) continue;
            double u = 0, v = 0;
            geom::edge_param(s, 0.5, u, v);
            const auto me = geom::eval_map(disc.patch(k), u, v);
            double u0 = 0, v0 = 0, u1 = 0, v1 = 0;
            geom::edge_param(s, 0.0, u0, v0);
            geom::edge_param(s, 1.0, u1, v1);
            const auto a0 = geom::eval_map(disc.patch(k), u0, v0);
            const auto a1 = geom::eval_map(disc.patch(k), u1, v1);
            const double phi0 = std::atan2(a0.x.y, a0.x.x);
            double phi1 = std::atan2(a1.x.y, a1.x.x);
            while (phi1 < phi0) phi1 += 2 * std::numbers::pi;
            if (!(phi1 > phi0))
                throw std::runtime_error("interface chain: degenerate edge");
            raws.push_back({k, s, std::atan2(me.x.y, me.x.x),
                            edge_locals(disc.spaces[k], s)});
        }
    }
    if (raws.empty()) throw std::runtime_error("interface chain: no tagged edges");
    // order along the circle; the chain spans at most one pole pitch (< pi),
    // so if the raw atan2 angles straddle the branch cut, shift the negatives
    auto angles_minmax = [&]() {
        double mn = raws.front().mid_angle, mx = raws.front().mid_angle;
        for (const auto& r : raws) {
            mn = std::min(mn, r.mid_angle);
            mx = std::max(mx, r.mid_angle);
        }
        return std::pair{mn, mx};
    };
    if (auto [mn, mx] = angles_minmax(); mx - mn > std::numbers::pi)
        for (auto& r : raws)
            if (r.mid_angle < 0) r.mid_angle += 2 * std::numbers::pi;
    std::sort(raws.begin(), raws.end(),
              [](const Raw& a, const Raw& b) { return a.mid_angle < b.mid_angle; });

    InterfaceChain chain;
    for (size_t s = 0; s < raws.size(); ++s) {
        const Raw& r = raws[s];
        ChainSeg seg;
        seg.disc_patch = r.k;
        seg.side = r.side;
        seg.count = static_cast<int>(r.locals.size());
        size_t begin = 0;
        if (s == 0) {
            seg.offset = 0;
        } else {
            seg.offset = chain.size() - 1;
            // the shared corner function must be the same global entity
            const DofRef prev = chain.funcs.back();
            const DofRef cur = dm.local[r.k][r.locals[0]];
            if (prev.kind != cur.kind || prev.index != cur.index)
                throw std::runtime_error("interface chain: edges do not join");
            begin = 1;
        }
        for (size_t i = begin; i < r.locals.size(); ++i)
            chain.funcs.push_back(dm.local[r.k][r.locals[i]]);
        chain.segs.push_back(seg);
    }
    return chain;
}

std::vector<double> apply_dirichlet_trace(DofMap& dm, const AssembledSystem& sys,
                                          const InterfaceChain& chain,
                                          const std::vector<double>& coeffs) {
    if (static_cast<int>(coeffs.size()) != chain.size())
        throw std::invalid_argument("apply_dirichlet_trace: coefficient count mismatch");
    for (int i = 0; i < chain.size(); ++i) {
        const DofRef& r = chain.funcs[i];
        if (r.kind != DofKind::Fixed)
            throw std::invalid_argument(
                "apply_dirichlet_trace: interface is not Dirichlet-constrained");
        dm.slot_value[r.index] = r.sign * coeffs[i];
    }
    std::vector<double> lift = sys.K_fc.spmv(dm.slot_value);
    for (double& v : lift) v = -v;
    return lift;
}

}  // namespace igamag::assembly
