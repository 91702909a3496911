#include "igamag/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <stdexcept>

namespace igamag::postproc {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Field expand_field(assembly::DiscPtr disc, const assembly::DofMap& dm,
                   const std::vector<double>& x_free) {
    if (static_cast<int>(x_free.size()) != dm.free_count)
        throw std::invalid_argument("expand_field: solution dimension mismatch");
    Field f;
    f.disc = std::move(disc);
    f.coeff.resize(f.disc->num_patches());
    for (int k = 0; k < f.disc->num_patches(); ++k) {
        const auto& local = dm.local[k];
        f.coeff[k].resize(local.size());
        for (size_t l = 0; l < local.size(); ++l) {
            const assembly::DofRef& r = local[l];
            const double v = r.kind == assembly::DofKind::Free ? x_free[r.index]
                                                               : dm.slot_value[r.index];
            f.coeff[k][l] = r.sign * v;
        }
    }
    return f;
}

Field zero_field(assembly::DiscPtr disc) {
    Field f;
    f.disc = std::move(disc);
    f.coeff.resize(f.disc->num_patches());
    for (int k = 0; k < f.disc->num_patches(); ++k)
        f.coeff[k].assign(
            static_cast<size_t>(f.disc->spaces[k].nu()) * f.disc->spaces[k].nv(), 0.0);
    return f;
}

FieldSample eval_field_at(const Field& f, int disc_patch, double u, double v) {
    if (disc_patch < 0 || disc_patch >= f.disc->num_patches())
        throw std::invalid_argument("eval_field_at: patch index out of range");
    const assembly::PatchSpace& sp = f.disc->spaces[disc_patch];
    const auto bu = splines::eval_bspline(sp.ku, u);
    const auto bv = splines::eval_bspline(sp.kv, v);
    const int nu = sp.nu();
    const int pu1 = sp.ku.degree() + 1, pv1 = sp.kv.degree() + 1;
    std::vector<double> val, pdu, pdv;
    assembly::rational_basis(sp, bu, bv, val, pdu, pdv);
    double a = 0, du = 0, dv = 0;
    for (int i = 0; i < pu1; ++i)
        for (int j = 0; j < pv1; ++j) {
            const double c = f.coeff[disc_patch][(bv.first + j) * nu + (bu.first + i)];
            const int l = i * pv1 + j;
            a += c * val[l];
            du += c * pdu[l];
            dv += c * pdv[l];
        }
    const geom::MapEval ge = geom::eval_map(f.disc->patch(disc_patch), u, v);
    const double det = ge.det();
    const double ax = (du * ge.J[1][1] - dv * ge.J[1][0]) / det;
    const double ay = (-du * ge.J[0][1] + dv * ge.J[0][0]) / det;
    return {ge.x, a, {ay, -ax}};
}

std::vector<FieldSample> eval_field(const Field& f,
                                    const std::vector<std::tuple<int, double, double>>& pts) {
    std::vector<FieldSample> out;
    out.reserve(pts.size());
    for (const auto& [k, u, v] : pts) out.push_back(eval_field_at(f, k, u, v));
    return out;
}

namespace {

// integrate value^2 of a linear combination over all patches of the rule
template <typename CoeffAt>
double l2_sq(const assembly::DiscPtr& disc, const assembly::QuadratureRule& quad,
             const CoeffAt& coeff_at,
             const std::function<double(double, double)>* shift = nullptr) {
    double acc = 0;
    std::vector<double> bval, bdu, bdv;
    for (int k = 0; k < disc->num_patches(); ++k) {
        const assembly::PatchCache& pc = quad.patches[k];
        const assembly::PatchSpace& sp = disc->spaces[k];
        const int nu = sp.nu();
        const int pu1 = sp.ku.degree() + 1, pv1 = sp.kv.degree() + 1;
        const int nev = pc.av.num_elems();
        for (int eu = 0; eu < pc.au.num_elems(); ++eu) {
            for (int ev = 0; ev < nev; ++ev) {
                for (int a = 0; a < pc.au.ngp; ++a) {
                    const auto& bu = pc.au.basis[eu * pc.au.ngp + a];
                    for (int b = 0; b < pc.av.ngp; ++b) {
                        const auto& bv = pc.av.basis[ev * pc.av.ngp + b];
                        const geom::MapEval& ge =
                            pc.geo[((eu * nev + ev) * pc.au.ngp + a) * pc.av.ngp + b];
                        assembly::rational_basis(sp, bu, bv, bval, bdu, bdv);
                        double val = 0;
                        for (int i = 0; i < pu1; ++i)
                            for (int j = 0; j < pv1; ++j)
                                val += coeff_at(k, (bv.first + j) * nu + (bu.first + i)) *
                                       bval[i * pv1 + j];
                        if (shift) val -= (*shift)(ge.x.x, ge.x.y);
                        acc += val * val * pc.au.gw[eu * pc.au.ngp + a] *
                               pc.av.gw[ev * pc.av.ngp + b] * ge.det();
                    }
                }
            }
        }
    }
    return acc;
}

}  // namespace

double l2_norm(const Field& f, const assembly::QuadratureRule& quad) {
    return std::sqrt(l2_sq(f.disc, quad,
                           [&](int k, int l) { return f.coeff[k][l]; }));
}

double l2_diff(const Field& a, const Field& b, const assembly::QuadratureRule& quad) {
    if (a.disc->num_patches() != b.disc->num_patches())
        throw std::invalid_argument("l2_diff: discretisations differ");
    return std::sqrt(l2_sq(a.disc, quad, [&](int k, int l) {
        return a.coeff[k][l] - b.coeff[k][l];
    }));
}

double l2_diff_sampled(const Field& a, const Field& b,
                       const assembly::QuadratureRule& quad_b) {
    if (a.disc->patch_ids != b.disc->patch_ids)
        throw std::invalid_argument("l2_diff_sampled: patch sets differ");
    double acc = 0;
    for (int k = 0; k < b.disc->num_patches(); ++k) {
        const assembly::PatchCache& pc = quad_b.patches[k];
        const int nev = pc.av.num_elems();
        for (int eu = 0; eu < pc.au.num_elems(); ++eu)
            for (int ev = 0; ev < nev; ++ev)
                for (int qa = 0; qa < pc.au.ngp; ++qa)
                    for (int qb = 0; qb < pc.av.ngp; ++qb) {
                        const double u = pc.au.gp[eu * pc.au.ngp + qa];
                        const double v = pc.av.gp[ev * pc.av.ngp + qb];
                        const geom::MapEval& ge =
                            pc.geo[((eu * nev + ev) * pc.au.ngp + qa) * pc.av.ngp + qb];
                        const double d =
                            eval_field_at(a, k, u, v).a_z - eval_field_at(b, k, u, v).a_z;
                        acc += d * d * pc.au.gw[eu * pc.au.ngp + qa] *
                               pc.av.gw[ev * pc.av.ngp + qb] * ge.det();
                    }
    }
    return std::sqrt(acc);
}

double l2_error(const Field& f, const assembly::QuadratureRule& quad,
                const std::function<double(double, double)>& exact) {
    return std::sqrt(l2_sq(f.disc, quad,
                           [&](int k, int l) { return f.coeff[k][l]; }, &exact));
}

std::map<std::string, double> flux_linkage(const Field& f,
                                           const assembly::QuadratureRule& quad,
                                           const std::vector<geom::Winding>& windings,
                                           int pole_count, double axial_length) {
    const assembly::DiscPtr& disc = f.disc;
    // integral of A_z per region
    std::map<std::string, double> region_integral;
    for (int k = 0; k < disc->num_patches(); ++k) {
        const std::string& region = disc->patch(k).region;
        bool wanted = false;
        for (const auto& w : windings) wanted = wanted || w.region == region;
        if (!wanted) continue;
        const assembly::PatchCache& pc = quad.patches[k];
        const assembly::PatchSpace& sp = disc->spaces[k];
        const int nu = sp.nu();
        const int pu1 = sp.ku.degree() + 1, pv1 = sp.kv.degree() + 1;
        const int nev = pc.av.num_elems();
        std::vector<double> bval, bdu, bdv;
        double acc = 0;
        for (int eu = 0; eu < pc.au.num_elems(); ++eu)
            for (int ev = 0; ev < nev; ++ev)
                for (int a = 0; a < pc.au.ngp; ++a) {
                    const auto& bu = pc.au.basis[eu * pc.au.ngp + a];
                    for (int b = 0; b < pc.av.ngp; ++b) {
                        const auto& bv = pc.av.basis[ev * pc.av.ngp + b];
                        const geom::MapEval& ge =
                            pc.geo[((eu * nev + ev) * pc.au.ngp + a) * pc.av.ngp + b];
                        assembly::rational_basis(sp, bu, bv, bval, bdu, bdv);
                        double val = 0;
                        for (int i = 0; i < pu1; ++i)
                            for (int j = 0; j < pv1; ++j)
                                val += f.coeff[k][(bv.first + j) * nu + (bu.first + i)] *
                                       bval[i * pv1 + j];
                        acc += val * pc.au.gw[eu * pc.au.ngp + a] *
                               pc.av.gw[ev * pc.av.ngp + b] * ge.det();
                    }
                }
        region_integral[region] += acc;
    }

    std::map<std::string, double> psi;
    for (const auto& w : windings) {
        if (!region_integral.count(w.region))
            throw std::invalid_argument("flux_linkage: unknown coil region '" + w.region +
                                        "'");
        psi[w.phase] += pole_count * axial_length * w.turns * w.polarity *
                        region_integral[w.region] / w.area;
    }
    return psi;
}

std::vector<double> one_sided_amplitudes(const std::vector<double>& samples, int hmax) {
    const int n = static_cast<int>(samples.size());
    if (n < 2) throw std::invalid_argument("one_sided_amplitudes: need at least 2 samples");
    if (2 * hmax > n)
        throw std::invalid_argument("one_sided_amplitudes: order above Nyquist");
    std::vector<double> amp(hmax + 1, 0.0);
    for (int h = 0; h <= hmax; ++h) {
        double re = 0, im = 0;
        for (int i = 0; i < n; ++i) {
            const double arg = 2.0 * std::numbers::pi * h * i / n;
            re += samples[i] * std::cos(arg);
            im -= samples[i] * std::sin(arg);
        }
        const double scale = (h == 0 || 2 * h == n) ? 1.0 / n : 2.0 / n;
        amp[h] = scale * std::hypot(re, im);
    }
    return amp;
}

EmfSpectrum emf_from_samples(const std::vector<double>& psi, double omega_el,
                             int harmonics) {
    const auto amp = one_sided_amplitudes(psi, harmonics);
    EmfSpectrum s;
    s.omega_el = omega_el;
    s.psi_samples = psi;
    s.magnitude.resize(harmonics);
    for (int h = 1; h <= harmonics; ++h) s.magnitude[h - 1] = h * omega_el * amp[h];
    return s;
}

EmfSpectrum emf_spectrum(const geom::MultiPatchModel& model, int n_pos, int harmonics,
                         double speed_mech,
                         const std::function<double(const geom::MultiPatchModel&)>& psi_of_model,
                         int threads) {
    if (n_pos < 2 * harmonics + 2)
        throw std::invalid_argument("emf_spectrum: need n_pos >= 2*harmonics + 2");
    if (n_pos % 2 != 0) throw std::invalid_argument("emf_spectrum: n_pos must be even");
    const int half = n_pos / 2;
    const double step = 2.0 * model.pole_pitch() / n_pos;  // electrical period = 2 pitches

    std::vector<double> psi(n_pos, 0.0);
    auto at = [&](int i) {
        return psi_of_model(geom::rotate_subdomain(model, geom::Subdomain::Rotor, i * step));
    };
    if (threads <= 1) {
        for (int i = 0; i < half; ++i) psi[i] = at(i);
    } else {
        std::vector<std::future<double>> futs;
        for (int i = 0; i < half; ++i)
            futs.push_back(std::async(std::launch::async | std::launch::deferred,
                                      [&, i] { return at(i); }));
        for (int i = 0; i < half; ++i) psi[i] = futs[i].get();
    }
    for (int i = 0; i < half; ++i) psi[half + i] = -psi[i];

    const double omega_el = 0.5 * model.pole_count * speed_mech;
    return emf_from_samples(psi, omega_el, harmonics);
}

double thd(const EmfSpectrum& s) {
    if (s.magnitude.empty() || !(s.magnitude.front() > 0.0))
        throw std::invalid_argument("thd: undefined for vanishing fundamental");
    double acc = 0;
    for (size_t h = 1; h < s.magnitude.size(); ++h) acc += s.magnitude[h] * s.magnitude[h];
    return std::sqrt(acc) / s.magnitude.front();
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: LF line endings everywhere
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

}  // namespace

void write_history_csv(const std::string& path,
                       const std::vector<std::pair<double, double>>& history) {
    auto out = open_out(path);
    out << "iteration,eps_rotor,eps_stator\n";
    for (size_t k = 0; k < history.size(); ++k)
        out << (k + 1) << "," << fmt(history[k].first) << "," << fmt(history[k].second)
            << "\n";
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_spectrum_csv(const std::string& path, const EmfSpectrum& s) {
    auto out = open_out(path);
    out << "order,emf_volts\n";
    for (size_t h = 0; h < s.magnitude.size(); ++h)
        out << (h + 1) << "," << fmt(s.magnitude[h]) << "\n";
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
    auto out = open_out(path);
    for (size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "");
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << fmt(row[i]) << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_field_grids(const std::string& dir, const Field& f, int samples_per_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory '" + dir + "'");
    const int m = std::max(2, samples_per_dir);
    for (int k = 0; k < f.disc->num_patches(); ++k) {
        const std::string path =
            (fs::path(dir) / ("field_patch_" + std::to_string(f.disc->patch_ids[k]) + ".csv"))
                .string();
        auto out = open_out(path);
        out << "x,y,A_z,Bx,By\n";
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) {
                const FieldSample s = eval_field_at(f, k, static_cast<double>(i) / (m - 1),
                                                    static_cast<double>(j) / (m - 1));
                out << fmt(s.pos.x) << "," << fmt(s.pos.y) << "," << fmt(s.a_z) << ","
                    << fmt(s.b.x) << "," << fmt(s.b.y) << "\n";
            }
        if (!out) throw std::runtime_error("write failed for '" + path + "'");
    }
}

}  // namespace igamag::postproc
