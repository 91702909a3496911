#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "igamag/coupling.hpp"
#include "igamag/demo_machine.hpp"
#include "igamag/driver.hpp"
#include "igamag/machine_io.hpp"
#include "igamag/postproc.hpp"

namespace py = pybind11;
using namespace igamag;

namespace {

using ModelPtr = std::shared_ptr<geom::MultiPatchModel>;

py::dict solve(const ModelPtr& model, int degree, int refine, double alpha, double tol,
               int max_iter) {
    coupling::DtnOptions opts;
    opts.degree = degree;
    opts.refine = refine;
    opts.alpha = alpha;
    opts.tol = tol;
    opts.max_iter = max_iter;
    const coupling::DtnResult res = coupling::dtn_iterate(model, opts);
    py::dict out;
    out["converged"] = res.state.converged;
    out["iterations"] = res.state.iterations;
    out["ndof_rotor"] = res.ndof_rotor;
    out["ndof_stator"] = res.ndof_stator;
    out["history"] = res.state.history;
    return out;
}

py::dict emf(const ModelPtr& model, int degree, int refine, double alpha, double tol,
             int max_iter, int positions, int harmonics, double speed,
             const std::string& phase, int threads) {
    driver::EmfOptions opts;
    opts.dtn = {degree, refine, alpha, tol, max_iter, 1e-12};
    opts.n_pos = positions;
    opts.harmonics = harmonics;
    opts.speed_mech = speed;
    opts.phase = phase;
    opts.threads = threads;
    const postproc::EmfSpectrum s = driver::run_emf(model, opts);
    py::dict out;
    out["emf"] = s.magnitude;
    out["e1"] = s.fundamental();
    out["thd"] = postproc::thd(s);
    out["omega_el"] = s.omega_el;
    out["psi"] = s.psi_samples;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Isogeometric 2D magnetostatics for rotating electric machines";

    py::class_<geom::MultiPatchModel, ModelPtr>(m, "Machine")
        .def_property_readonly("pole_count",
                               [](const geom::MultiPatchModel& mm) { return mm.pole_count; })
        .def_property_readonly("rotor_angle",
                               [](const geom::MultiPatchModel& mm) { return mm.rotor_angle; })
        .def_property_readonly(
            "patch_count",
            [](const geom::MultiPatchModel& mm) { return mm.patches.size(); });

    py::class_<splines::KnotVector>(m, "KnotVector")
        .def(py::init<int, std::vector<double>>(), py::arg("degree"), py::arg("knots"))
        .def_property_readonly("degree", &splines::KnotVector::degree)
        .def_property_readonly("num_funcs", &splines::KnotVector::num_funcs)
        .def("find_span", &splines::KnotVector::find_span);

    m.def("eval_bspline", [](const splines::KnotVector& kv, double u) {
        const auto b = splines::eval_bspline(kv, u);
        return py::make_tuple(b.first, b.values, b.derivatives);
    });
    m.def("eval_nurbs",
          [](const splines::KnotVector& kv, const std::vector<double>& w, double u) {
              const auto b = splines::eval_nurbs(kv, w, u);
              return py::make_tuple(b.first, b.values, b.derivatives);
          });

    m.def("load_machine", [](const std::string& path) -> ModelPtr {
        return std::make_shared<geom::MultiPatchModel>(io::read_machine(path));
    });
    m.def("write_machine", [](const ModelPtr& model, const std::string& path) {
        io::write_machine(*model, path);
    });
    m.def("demo_machine", []() -> ModelPtr {
        return std::make_shared<geom::MultiPatchModel>(geom::make_demo_machine());
    });
    m.def("validate", [](const ModelPtr& model) { return geom::validate_model(*model); });
    m.def("rotate", [](const ModelPtr& model, double dtheta) -> ModelPtr {
        return std::make_shared<geom::MultiPatchModel>(
            geom::rotate_subdomain(*model, geom::Subdomain::Rotor, dtheta));
    });

    m.def("solve", &solve, py::arg("machine"), py::arg("degree") = 2, py::arg("refine") = 1,
          py::arg("alpha") = 0.5, py::arg("tol") = 1e-7, py::arg("max_iter") = 200);
    m.def("emf", &emf, py::arg("machine"), py::arg("degree") = 2, py::arg("refine") = 1,
          py::arg("alpha") = 0.5, py::arg("tol") = 1e-7, py::arg("max_iter") = 200,
          py::arg("positions") = 64, py::arg("harmonics") = 32,
          py::arg("speed") = 104.71975511965977, py::arg("phase") = "U",
          py::arg("threads") = 1);

    m.def("thd", [](const std::vector<double>& magnitudes) {
        postproc::EmfSpectrum s;
        s.magnitude = magnitudes;
        return postproc::thd(s);
    });
    m.def("emf_from_samples", [](const std::vector<double>& psi, double omega_el,
                                 int harmonics) {
        const auto s = postproc::emf_from_samples(psi, omega_el, harmonics);
        return py::make_tuple(s.magnitude, s.omega_el);
    });

    m.attr("__version__") = "0.1.0";
}
