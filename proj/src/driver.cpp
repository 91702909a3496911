#include "igamag/driver.hpp"

#include <stdexcept>

namespace igamag::driver {

MonolithicResult solve_monolithic(std::shared_ptr<const geom::MultiPatchModel> model,
                                  int degree, int refine, double rtol) {
    MonolithicResult res;
    res.disc = assembly::discretize(model, std::nullopt, degree, refine);
    assembly::DofMapOptions opts;
    opts.glue_airgap = true;
    res.dm = std::make_shared<assembly::DofMap>(assembly::build_dof_map(*res.disc, opts));
    res.ndof = res.dm->free_count;
    const assembly::QuadratureRule quad = assembly::make_quadrature(*res.disc);
    const assembly::AssembledSystem sys = assembly::assemble_system(*res.disc, *res.dm, quad);
    const std::vector<double> rhs = assembly::constrained_rhs(sys, *res.dm);
    std::vector<double> x(res.ndof, 0.0);
    if (!solve_spd(sys.K, rhs, x, rtol, 40 * res.ndof + 200).converged)
        throw coupling::NonConvergenceError("solve_monolithic: linear solve did not converge");
    res.field = postproc::expand_field(res.disc, *res.dm, x);
    return res;
}

postproc::EmfSpectrum run_emf(std::shared_ptr<const geom::MultiPatchModel> model,
                              const EmfOptions& opts) {
    bool phase_known = false;
    for (const auto& w : model->windings) phase_known = phase_known || w.phase == opts.phase;
    if (!phase_known)
        throw std::invalid_argument("run_emf: machine has no phase '" + opts.phase + "'");

    int position = 0;
    auto psi_of_model = [&](const geom::MultiPatchModel& rotated) {
        const auto shared = std::make_shared<const geom::MultiPatchModel>(rotated);
        const coupling::DtnResult sol = coupling::dtn_iterate(shared, opts.dtn);
        if (!sol.state.converged)
            throw coupling::NonConvergenceError("run_emf: coupling did not converge at position " +
                                     std::to_string(position));
        ++position;
        const assembly::QuadratureRule quad = assembly::make_quadrature(*sol.disc_stator);
        const auto psi = postproc::flux_linkage(sol.stator, quad, shared->windings,
                                                shared->pole_count, shared->axial_length);
        return psi.at(opts.phase);
    };
    return postproc::emf_spectrum(*model, opts.n_pos, opts.harmonics, opts.speed_mech,
                                  psi_of_model, opts.threads);
}

RotorSolve solve_rotor_test_problem(std::shared_ptr<const geom::MultiPatchModel> model,
                                    int degree, int refine, double rtol) {
    RotorSolve res;
    res.disc = assembly::discretize(model, geom::Subdomain::Rotor, degree, refine);
    assembly::DofMapOptions opts;
    opts.dirichlet_airgap = true;  // homogeneous Dirichlet on the gap circle
    res.dm = std::make_shared<assembly::DofMap>(assembly::build_dof_map(*res.disc, opts));
    res.ndof = res.dm->free_count;
    const assembly::QuadratureRule quad = assembly::make_quadrature(*res.disc);
    const assembly::AssembledSystem sys = assembly::assemble_system(*res.disc, *res.dm, quad);
    const std::vector<double> rhs = assembly::constrained_rhs(sys, *res.dm);
    std::vector<double> x(res.ndof, 0.0);
    if (!solve_spd(sys.K, rhs, x, rtol, 40 * res.ndof + 200).converged)
        throw coupling::NonConvergenceError("solve_rotor_test_problem: linear solve did not converge");
    res.field = postproc::expand_field(res.disc, *res.dm, x);
    return res;
}

std::vector<StudyRow> run_study(std::shared_ptr<const geom::MultiPatchModel> model,
                                const std::vector<int>& degrees, int max_level,
                                double rtol) {
    if (max_level < 1) throw std::invalid_argument("run_study: max_level must be >= 1");
    std::vector<StudyRow> rows;
    for (int degree : degrees) {
        std::vector<RotorSolve> solves;
        for (int level = 0; level <= max_level; ++level)
            solves.push_back(solve_rotor_test_problem(model, degree, level, rtol));
        const RotorSolve& fine = solves.back();
        const assembly::QuadratureRule quad_fine = assembly::make_quadrature(*fine.disc);
        for (int level = 0; level <= max_level; ++level) {
            StudyRow row;
            row.degree = degree;
            row.level = level;
            row.ndof = solves[level].ndof;
            row.l2_diff = level == max_level
                              ? 0.0
                              : postproc::l2_diff_sampled(solves[level].field, fine.field,
                                                          quad_fine);
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace igamag::driver
