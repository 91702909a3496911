#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "igamag/geometry.hpp"
#include "igamag/linalg.hpp"
#include "igamag/quadrature.hpp"
#include "igamag/splines.hpp"

namespace igamag::assembly {

/// Solution space of one patch: open knot vectors of the run degree over the
/// geometry breakpoints (parametric C0 joints of the map are kept C0),
/// uniformly refined. The basis is rational: the weight grid represents the
/// geometry's weight function in this space whenever that function is
/// representable (degree match per direction, or a direction the weights do
/// not depend on); otherwise the weights are all one and the space is plain
/// tensor B-splines on the exactly mapped patch.
struct PatchSpace {
    splines::KnotVector ku, kv;
    std::vector<double> weights;  // [j*nu+i], all positive

    int nu() const { return ku.num_funcs(); }
    int nv() const { return kv.num_funcs(); }
    double weight(int i, int j) const { return weights[j * nu() + i]; }
};

PatchSpace make_solution_space(const geom::Patch& patch, int degree, int refine);

/// Weights of the basis functions along one edge of the space.
std::vector<double> edge_weights(const PatchSpace& sp, geom::Side side);

/// Rational tensor basis at a point given the two univariate B-spline
/// evaluations: values and parametric derivatives of the (pu+1)*(pv+1)
/// non-vanishing functions, index l = i*(pv+1)+j.
void rational_basis(const PatchSpace& sp, const splines::BasisEvaluation& bu,
                    const splines::BasisEvaluation& bv, std::vector<double>& val,
                    std::vector<double>& du, std::vector<double>& dv);

/// A set of patches (whole model or one subdomain) with their solution
/// spaces.
struct Discretization {
    std::shared_ptr<const geom::MultiPatchModel> model;
    int degree = 1;
    int refine = 0;
    std::vector<int> patch_ids;       // indices into model->patches
    std::vector<PatchSpace> spaces;   // aligned with patch_ids

    const geom::Patch& patch(int k) const { return model->patches[patch_ids[k]]; }
    int num_patches() const { return static_cast<int>(patch_ids.size()); }
};

using DiscPtr = std::shared_ptr<const Discretization>;

DiscPtr discretize(std::shared_ptr<const geom::MultiPatchModel> model,
                   std::optional<geom::Subdomain> which, int degree, int refine);

enum class DofKind : std::uint8_t { Free, Fixed };

/// Where one local basis function lands: a free unknown or a Dirichlet slot,
/// with the orientation sign of the constraint chain (anti-periodic pairs
/// carry -1).
struct DofRef {
    DofKind kind = DofKind::Free;
    int index = 0;
    double sign = 1.0;
};

struct DofMap {
    int free_count = 0;
    std::vector<std::vector<DofRef>> local;  // [patch][j*nu+i]
    std::vector<double> slot_value;          // current Dirichlet values
    std::vector<geom::EdgeTag> slot_tag;

    int slot_count() const { return static_cast<int>(slot_value.size()); }
};

struct DofMapOptions {
    bool dirichlet_gamma_d = true;  // eliminate Dirichlet-tagged edges
    bool dirichlet_airgap = false;  // treat the air-gap edge as Dirichlet
    bool glue_airgap = false;       // conforming monolithic solve across the gap
};

/// Global numbering with C0 gluing on conforming interfaces, anti-periodic
/// master/slave pairs (sign -1) between right and left edges, and Dirichlet
/// elimination.
DofMap build_dof_map(const Discretization& disc, const DofMapOptions& opts = {});

/// Per-patch tensor Gauss rules on the non-empty solution knot spans, with
/// the 1D basis and the geometry map cached at every point.
struct AxisCache {
    std::vector<double> bks;                       // breakpoints
    std::vector<splines::BasisEvaluation> basis;   // [elem*ngp + a]
    std::vector<double> gp;                        // parameter per cached point
    std::vector<double> gw;                        // weight incl. span length
    int ngp = 0;
    int num_elems() const { return static_cast<int>(bks.size()) - 1; }
};

struct PatchCache {
    AxisCache au, av;
    std::vector<geom::MapEval> geo;  // [(eu*nev+ev)*ngp_u*ngp_v + a*ngp_v + b]
};

struct QuadratureRule {
    int points_per_dir = 0;
    std::vector<PatchCache> patches;
};

/// points_per_dir = 0 picks the default degree+1 Gauss points per direction.
QuadratureRule make_quadrature(const Discretization& disc, int points_per_dir = 0);

struct AssembledSystem {
    linalg::SparseMatrix K;     // free x free, symmetric
    linalg::SparseMatrix K_fc;  // free x Dirichlet slots
    std::vector<double> j_src;
    std::vector<double> j_pm;
};

AssembledSystem assemble_system(const Discretization& disc, const DofMap& dm,
                                const QuadratureRule& quad);

linalg::SparseMatrix assemble_stiffness(const Discretization& disc, const DofMap& dm,
                                        const QuadratureRule& quad);
std::pair<std::vector<double>, std::vector<double>>
assemble_sources(const Discretization& disc, const DofMap& dm, const QuadratureRule& quad);

/// Mass matrix over the free unknowns.
linalg::SparseMatrix assemble_mass(const Discretization& disc, const DofMap& dm,
                                   const QuadratureRule& quad);

/// Load vector for a general scalar source f(x, y) over the free unknowns.
std::vector<double> assemble_load(const Discretization& disc, const DofMap& dm,
                                  const QuadratureRule& quad,
                                  const std::function<double(double, double)>& f);

/// Right-hand side with the Dirichlet lift folded in:
/// j_src + j_pm + extra - K_fc * slot_values.
std::vector<double> constrained_rhs(const AssembledSystem& sys, const DofMap& dm,
                                    const std::vector<double>* extra = nullptr);

/// Ordered run of edge basis functions along a tagged interface (sorted by
/// angle about the origin). Adjacent edges share their corner function.
struct ChainSeg {
    int disc_patch = 0;
    geom::Side side = geom::Side::V0;
    int offset = 0;  // index of this segment's first function in the chain
    int count = 0;
};

struct InterfaceChain {
    std::vector<ChainSeg> segs;
    std::vector<DofRef> funcs;
    int size() const { return static_cast<int>(funcs.size()); }
};

InterfaceChain build_interface_chain(const Discretization& disc, const DofMap& dm,
                                     geom::EdgeTag tag);

/// Set the Dirichlet values of the tagged interface from coefficients given
/// in the edge's own trace space; returns the lift vector -K_fc * g over the
/// free unknowns.
std::vector<double> apply_dirichlet_trace(DofMap& dm, const AssembledSystem& sys,
                                          const InterfaceChain& chain,
                                          const std::vector<double>& coeffs);

}  // namespace igamag::assembly
