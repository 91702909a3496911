#pragma once

#include <memory>
#include <string>
#include <vector>

#include "igamag/coupling.hpp"
#include "igamag/postproc.hpp"

namespace igamag::driver {

/// One monolithic Ritz-Galerkin solve over both subdomains; requires a
/// conforming air-gap interface.
struct MonolithicResult {
    assembly::DiscPtr disc;
    std::shared_ptr<assembly::DofMap> dm;
    postproc::Field field;
    int ndof = 0;
};

MonolithicResult solve_monolithic(std::shared_ptr<const geom::MultiPatchModel> model,
                                  int degree, int refine, double rtol = 1e-12);

struct EmfOptions {
    coupling::DtnOptions dtn;
    int n_pos = 64;
    int harmonics = 32;
    double speed_mech = 104.71975511965977;  // 1000 rpm: 50 Hz electrical at 6 poles
    std::string phase = "U";
    int threads = 1;
};

postproc::EmfSpectrum run_emf(std::shared_ptr<const geom::MultiPatchModel> model,
                              const EmfOptions& opts);

/// Self-convergence study on the rotor subdomain: homogeneous Dirichlet on
/// the outer boundary and the gap circle, anti-periodic sides, magnet
/// sources only. Errors are L2 differences to the finest level of the same
/// degree.
struct StudyRow {
    int degree = 0;
    int level = 0;
    int ndof = 0;
    double l2_diff = 0;
};

std::vector<StudyRow> run_study(std::shared_ptr<const geom::MultiPatchModel> model,
                                const std::vector<int>& degrees, int max_level,
                                double rtol = 1e-12);

/// Rotor-only solve used by the study.
struct RotorSolve {
    assembly::DiscPtr disc;
    std::shared_ptr<assembly::DofMap> dm;
    postproc::Field field;
    int ndof = 0;
};

RotorSolve solve_rotor_test_problem(std::shared_ptr<const geom::MultiPatchModel> model,
                                    int degree, int refine, double rtol = 1e-12);

}  // namespace igamag::driver
