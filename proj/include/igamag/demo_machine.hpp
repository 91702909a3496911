#pragma once

#include "igamag/geometry.hpp"

namespace igamag::geom {

/// Dimensions of the bundled example machine: one pole of a 6-pole
/// surface-magnet synchronous machine. All lengths in meters, angles in
/// radians.
struct DemoMachineDims {
    int pole_count = 6;
    double r_bore = 0.010;        // shaft inner bore (Dirichlet)
    double r_shaft = 0.026;       // shaft / rotor iron
    double r_iron = 0.040;        // rotor iron / magnet ring
    double r_magnet = 0.045;      // magnet surface
    double r_gap = 0.0465;        // rotor-stator interface circle
    double r_stator_bore = 0.048; // stator bore (slot ring bottom)
    double r_slot_top = 0.070;    // slot ring / yoke
    double r_outer = 0.085;       // yoke outside (Dirichlet)
    double axial_length = 0.08;
    double magnet_remanence = 1.1;   // [T]
    double magnet_mu_r = 1.05;
    double iron_mu_r = 1000.0;
    double coil_turns = 100.0;
    /// Angular breakpoints over one pole pitch, degrees.
    std::vector<double> rotor_angles_deg{0, 5, 55, 60};
    std::vector<double> stator_angles_deg{0, 5, 15, 20, 25, 35, 40, 45, 55, 60};
};

/// The bundled machine model (also shipped as data/pm6.machine).
MultiPatchModel make_demo_machine();
DemoMachineDims demo_machine_dims();

}  // namespace igamag::geom
