#pragma once

#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "igamag/assembly.hpp"
#include "igamag/postproc.hpp"

namespace igamag::coupling {

/// Raised when an inner linear solve or a position sweep cannot reach its
/// tolerance; the outer fixed point itself reports non-convergence in its
/// state instead of throwing.
struct NonConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Trace space on the air-gap circle: the run of edge basis functions of one
/// subdomain along the interface, as functions of the physical angle, with
/// the anti-periodic extension rule f(phi + pitch) = -f(phi).
struct TraceSpace {
    assembly::DiscPtr disc;
    assembly::InterfaceChain chain;
    double radius = 0;
    double phi_start = 0;
    double pitch = 0;
    bool ends_tied = false;   // first and last chain functions are one entity
    double ends_rel = -1.0;   // c_last = ends_rel * c_first when tied

    struct Seg {
        double phi0 = 0, phi1 = 0;
        int disc_patch = 0;
        geom::Side side = geom::Side::V0;
        int offset = 0;
        std::vector<double> brk_phi;  // angles of the solution knot breakpoints
        std::vector<double> wts;      // edge weights of the rational trace basis
    };
    std::vector<Seg> segs;

    int size() const { return chain.size(); }
    const splines::KnotVector& seg_space(const Seg& s) const;
    /// Rational edge basis of one segment at edge parameter t.
    splines::WeightedBasisEvaluation seg_basis(const Seg& s, double t) const;
    /// Monotone angle -> edge parameter inversion within one segment.
    double param_from_angle(const Seg& s, double phi) const;
};

using TraceSpacePtr = std::shared_ptr<const TraceSpace>;

TraceSpacePtr build_trace_space(assembly::DiscPtr disc, const assembly::DofMap& dm,
                                geom::EdgeTag tag);

struct TraceFunction {
    TraceSpacePtr space;
    std::vector<double> c;

    /// Evaluate at a physical angle, using the anti-periodic extension
    /// outside the pitch window.
    double eval(double phi) const;
};

TraceFunction zero_trace(TraceSpacePtr space);

/// Read the trace of a solution off its interface chain.
TraceFunction extract_trace(const std::vector<double>& x_free,
                            const assembly::DofMap& dm, TraceSpacePtr space);

/// L2 projection on the gap circle onto the target space, integrating on the
/// union of both knot meshes; the source is evaluated at (phi -
/// rotation_offset) with anti-periodic wrapping.
TraceFunction project_trace(const TraceFunction& f, TraceSpacePtr target,
                            double rotation_offset);

/// Coefficient-wise alpha * stator_trace + (1 - alpha) * lambda.
TraceFunction relax_update(const TraceFunction& lambda_k,
                           const TraceFunction& stator_trace, double alpha);

/// Weak Neumann datum for the stator: g_i = normal_sign * int nu dA/dn N_i ds
/// over the gap circle, rotor flux evaluated through the rotor map at matched
/// physical angles. The normal points from rotor into stator.
std::vector<double> neumann_load(const postproc::Field& rotor_field,
                                 const TraceSpace& rotor_side,
                                 const TraceSpace& stator_side,
                                 const assembly::DofMap& stator_dm,
                                 double normal_sign = 1.0);

/// Relative L2 mismatch of the two solutions across the gap circle.
double interface_jump(const postproc::Field& rotor_field, const TraceSpace& rotor_side,
                      const postproc::Field& stator_field,
                      const TraceSpace& stator_side);

/// A_z of a field on the gap circle at a physical angle, using the
/// anti-periodic extension outside the subdomain's window.
double gap_value(const postproc::Field& field, const TraceSpace& side, double phi);
/// nu * dA/dn on the gap circle, normal radially outward.
double gap_flux(const postproc::Field& field, const TraceSpace& side, double phi);

struct DtnOptions {
    int degree = 2;
    int refine = 2;
    double alpha = 0.5;
    double tol = 1e-7;
    int max_iter = 200;
    double inner_rtol = 1e-12;
};

struct CouplingState {
    double alpha = 0.5;
    double tol = 1e-7;
    int max_iter = 200;
    int iterations = 0;
    bool converged = false;
    std::vector<std::pair<double, double>> history;  // (eps_rt, eps_st)
};

struct DtnResult {
    assembly::DiscPtr disc_rotor, disc_stator;
    std::shared_ptr<assembly::DofMap> dm_rotor, dm_stator;
    postproc::Field rotor, stator;
    TraceSpacePtr trace_rotor, trace_stator;
    TraceFunction lambda;
    CouplingState state;
    int ndof_rotor = 0, ndof_stator = 0;
};

/// Alternating rotor-Dirichlet / stator-Neumann iteration with relaxed trace
/// updates; stops when the relative L2 change of both subdomain solutions
/// falls below tol. Non-convergence is reported in the state, not thrown.
DtnResult dtn_iterate(std::shared_ptr<const geom::MultiPatchModel> model,
                      const DtnOptions& opts);

}  // namespace igamag::coupling
