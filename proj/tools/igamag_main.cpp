// Command line front end: model validation, single coupled solve, EMF
// spectrum study, and a self-convergence refinement study.

#include <cstdio>
#include <limits>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "igamag/coupling.hpp"
#include "igamag/driver.hpp"
#include "igamag/machine_io.hpp"
#include "igamag/postproc.hpp"

namespace {

namespace fs = std::filesystem;
using namespace igamag;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitIo = 3;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CommonOpts {
    std::string machine;
    int degree = 2;
    int refine = 2;
    double alpha = 0.5;
    double tol = 1e-7;
    int max_iter = 200;
    double inner_rtol = 1e-12;
    std::string out_dir = "out";
    int threads = 1;
    int grid = 16;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool solver_flags) {
    cmd->add_option("machine", o.machine, "machine file")->required();
    if (solver_flags) {
        cmd->add_option("--degree", o.degree, "discretisation degree")
            ->check(CLI::Range(1, 6));
        cmd->add_option("--refine", o.refine, "uniform knot-insertion passes")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--alpha", o.alpha, "relaxation parameter")
            ->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--tol", o.tol, "coupling tolerance")->check(CLI::PositiveNumber);
        cmd->add_option("--max-iter", o.max_iter, "coupling iteration limit")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--inner-rtol", o.inner_rtol, "inner solver tolerance")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--out-dir", o.out_dir, "output directory");
        cmd->add_option("--threads", o.threads, "worker threads for position sweeps")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--grid", o.grid, "field dump samples per direction")
            ->check(CLI::Range(2, 512));
    }
}

std::shared_ptr<const geom::MultiPatchModel> load(const std::string& path) {
    return std::make_shared<const geom::MultiPatchModel>(io::read_machine(path));
}

int cmd_validate(const CommonOpts& o) {
    const auto model = load(o.machine);
    const auto bad = geom::validate_model(*model);
    for (const auto& line : bad) std::cout << line << "\n";
    std::cout << "status=" << (bad.empty() ? "valid" : "invalid")
              << " violations=" << bad.size() << " patches=" << model->patches.size()
              << "\n";
    return bad.empty() ? kExitOk : kExitInvalid;
}

int validate_or_fail(const geom::MultiPatchModel& model) {
    const auto bad = geom::validate_model(model);
    for (const auto& line : bad) std::cerr << line << "\n";
    return static_cast<int>(bad.size());
}

int cmd_solve(const CommonOpts& o) {
    const auto model = load(o.machine);
    if (validate_or_fail(*model) > 0) {
        std::cout << "status=invalid\n";
        return kExitInvalid;
    }
    coupling::DtnOptions opts{o.degree, o.refine, o.alpha, o.tol, o.max_iter, o.inner_rtol};
    const coupling::DtnResult res = coupling::dtn_iterate(model, opts);

    fs::create_directories(o.out_dir);
    postproc::write_history_csv((fs::path(o.out_dir) / "history.csv").string(),
                                res.state.history);
    postproc::write_field_grids((fs::path(o.out_dir) / "fields").string(), res.rotor,
                                o.grid);
    postproc::write_field_grids((fs::path(o.out_dir) / "fields").string(), res.stator,
                                o.grid);

    const auto& h = res.state.history.back();
    std::cout << "status=" << (res.state.converged ? "converged" : "not_converged")
              << " ndof_rotor=" << res.ndof_rotor << " ndof_stator=" << res.ndof_stator
              << " iterations=" << res.state.iterations << " eps_rotor=" << fmt(h.first)
              << " eps_stator=" << fmt(h.second) << "\n";
    return res.state.converged ? kExitOk : kExitNoConvergence;
}

int cmd_emf(const CommonOpts& o, int n_pos, int harmonics, double speed,
            const std::string& phase) {
    const auto model = load(o.machine);
    if (validate_or_fail(*model) > 0) {
        std::cout << "status=invalid\n";
        return kExitInvalid;
    }
    driver::EmfOptions opts;
    opts.dtn = {o.degree, o.refine, o.alpha, o.tol, o.max_iter, o.inner_rtol};
    opts.n_pos = n_pos;
    opts.harmonics = harmonics;
    opts.speed_mech = speed;
    opts.phase = phase;
    opts.threads = o.threads;
    const postproc::EmfSpectrum s = driver::run_emf(model, opts);

    fs::create_directories(o.out_dir);
    postproc::write_spectrum_csv((fs::path(o.out_dir) / "spectrum.csv").string(), s);

    // THD is undefined for a vanishing fundamental (e.g. magnets disabled)
    const double distortion =
        s.fundamental() > 0.0 ? postproc::thd(s) : std::numeric_limits<double>::quiet_NaN();
    std::cout << "status=ok e1_volts=" << fmt(s.fundamental())
              << " thd=" << fmt(distortion)
              << " f_el_hz=" << fmt(s.omega_el / (2 * 3.14159265358979323846))
              << " positions=" << n_pos << " harmonics=" << harmonics << "\n";
    return kExitOk;
}

int cmd_study(const CommonOpts& o, std::vector<int> degrees, int levels) {
    const auto model = load(o.machine);
    if (validate_or_fail(*model) > 0) {
        std::cout << "status=invalid\n";
        return kExitInvalid;
    }
    if (degrees.empty()) degrees = {1, 2};
    const auto rows = driver::run_study(model, degrees, levels, o.inner_rtol);

    fs::create_directories(o.out_dir);
    std::vector<std::vector<double>> table;
    for (const auto& r : rows)
        table.push_back({static_cast<double>(r.degree), static_cast<double>(r.level),
                         static_cast<double>(r.ndof), r.l2_diff});
    postproc::write_table_csv((fs::path(o.out_dir) / "study.csv").string(),
                              {"degree", "level", "ndof", "l2_diff"}, table);
    std::cout << "status=ok rows=" << rows.size() << " levels=" << levels << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"isogeometric 2D magnetostatics for rotating machines"};
    app.require_subcommand(1);
    app.set_config("--config");

    CommonOpts val_o, solve_o, emf_o, study_o;
    int n_pos = 64, harmonics = 32, levels = 3;
    double speed = 104.71975511965977;
    std::string phase = "U";
    std::vector<int> degrees;

    add_common(app.add_subcommand("validate", "check a machine file"), val_o, false);
    add_common(app.add_subcommand("solve", "one coupled solve at the current rotor angle"),
               solve_o, true);
    CLI::App* emf = app.add_subcommand("emf", "EMF spectrum over one electrical period");
    add_common(emf, emf_o, true);
    emf->add_option("--positions", n_pos, "rotor positions per electrical period")
        ->check(CLI::PositiveNumber);
    emf->add_option("--harmonics", harmonics, "spectrum orders reported")
        ->check(CLI::PositiveNumber);
    emf->add_option("--speed", speed, "mechanical speed [rad/s]")
        ->check(CLI::PositiveNumber);
    emf->add_option("--phase", phase, "winding phase");
    CLI::App* study = app.add_subcommand("study", "refinement self-convergence table");
    add_common(study, study_o, true);
    study->add_option("--degrees", degrees, "degrees to sweep");
    study->add_option("--levels", levels, "finest refinement level")
        ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("validate")) return cmd_validate(val_o);
        if (app.got_subcommand("solve")) return cmd_solve(solve_o);
        if (app.got_subcommand("emf")) return cmd_emf(emf_o, n_pos, harmonics, speed, phase);
        if (app.got_subcommand("study")) return cmd_study(study_o, degrees, levels);
    } catch (const io::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cout << "status=parse_error\n";
        return kExitInvalid;
    } catch (const coupling::NonConvergenceError& e) {
        std::cerr << e.what() << "\n";
        std::cout << "status=not_converged\n";
        return kExitNoConvergence;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << e.what() << "\n";
        std::cout << "status=io_error\n";
        return kExitIo;
    } catch (const std::exception& e) {
        const std::string what = e.what();
        std::cerr << what << "\n";
        if (what.find("cannot open") != std::string::npos ||
            what.find("cannot write") != std::string::npos ||
            what.find("write failed") != std::string::npos ||
            what.find("cannot create") != std::string::npos) {
            std::cout << "status=io_error\n";
            return kExitIo;
        }
        std::cout << "status=error\n";
        return kExitInvalid;
    }
    return kExitOk;
}
