#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "igamag/assembly.hpp"
#include "igamag/geometry.hpp"

namespace igamag::postproc {

/// Solution reconstructed per patch: full local coefficient grids with
/// Dirichlet values and anti-periodic signs folded in.
struct Field {
    assembly::DiscPtr disc;
    std::vector<std::vector<double>> coeff;  // [patch][j*nu+i]
};

Field expand_field(assembly::DiscPtr disc, const assembly::DofMap& dm,
                   const std::vector<double>& x_free);
Field zero_field(assembly::DiscPtr disc);

struct FieldSample {
    geom::Point2 pos;
    double a_z = 0;      // [Wb/m]
    geom::Point2 b;      // flux density (dA/dy, -dA/dx) [T]
};

FieldSample eval_field_at(const Field& f, int disc_patch, double u, double v);
std::vector<FieldSample> eval_field(const Field& f,
                                    const std::vector<std::tuple<int, double, double>>& pts);

/// L2 norm over the discretised domain by patchwise quadrature.
double l2_norm(const Field& f, const assembly::QuadratureRule& quad);
/// L2 norm of (a - b); the fields must live on the same discretisation.
double l2_diff(const Field& a, const Field& b, const assembly::QuadratureRule& quad);
/// L2 norm of (a - b) for fields on different refinements of the same
/// patches; quadrature points of b's rule are used.
double l2_diff_sampled(const Field& a, const Field& b,
                       const assembly::QuadratureRule& quad_b);
/// L2 norm of (f - exact) with exact given in physical coordinates.
double l2_error(const Field& f, const assembly::QuadratureRule& quad,
                const std::function<double(double, double)>& exact);

/// Flux linkage per phase: axial_length * turns * polarity * mean(A_z) over
/// each coil region, summed per phase, times the pole count for the
/// anti-periodic images.
std::map<std::string, double> flux_linkage(const Field& f,
                                           const assembly::QuadratureRule& quad,
                                           const std::vector<geom::Winding>& windings,
                                           int pole_count, double axial_length);

/// One-sided DFT amplitudes |c_h| of a real sample sequence, h = 0..hmax.
std::vector<double> one_sided_amplitudes(const std::vector<double>& samples, int hmax);

struct EmfSpectrum {
    std::vector<double> magnitude;  // |E_h| in volts, index h-1, h = 1..H
    double omega_el = 0;            // electrical angular frequency [rad/s]
    std::vector<double> psi_samples;

    double fundamental() const { return magnitude.empty() ? 0.0 : magnitude.front(); }
};

/// Spectral differentiation of the flux-linkage samples: E_h = h * w_el * |psi_h|.
EmfSpectrum emf_from_samples(const std::vector<double>& psi, double omega_el,
                             int harmonics);

/// Solve-per-position EMF spectrum. psi_of_model is called with the rotor
/// rotated to each of the first n_pos/2 positions of one electrical period;
/// the second half follows from anti-periodicity with flipped sign.
EmfSpectrum emf_spectrum(const geom::MultiPatchModel& model, int n_pos, int harmonics,
                         double speed_mech,
                         const std::function<double(const geom::MultiPatchModel&)>& psi_of_model,
                         int threads = 1);

/// Total harmonic distortion per the spectrum truncation (dimensionless).
double thd(const EmfSpectrum& spectrum);

// CSV and grid exports: comma separated, dot decimal, LF endings, header row.
void write_history_csv(const std::string& path,
                       const std::vector<std::pair<double, double>>& history);
void write_spectrum_csv(const std::string& path, const EmfSpectrum& s);
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);
/// One file per patch: x, y, A_z, Bx, By on an m x m parametric grid.
void write_field_grids(const std::string& dir, const Field& f, int samples_per_dir);

}  // namespace igamag::postproc
