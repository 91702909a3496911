#include "igamag/demo_machine.hpp"

#include <cmath>
#include <numbers>

namespace igamag::geom {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
}

DemoMachineDims demo_machine_dims() { return {}; }

// One pole of a 6-pole surface-magnet machine with 3 stator slots per pole
// (18 slots total, one slot per pole and phase). The rotor carries a
// parallel-magnetised magnet over 5..55 degrees; phase belts are +U, -W, +V.
MultiPatchModel make_demo_machine() {
    const DemoMachineDims d;
    MultiPatchModel m;
    m.pole_count = d.pole_count;
    m.axial_length = d.axial_length;
    m.rotor_angle = 0.0;

    const double mu0 = 4e-7 * kPi;
    const double nu_air = kNu0;
    const double nu_iron = kNu0 / d.iron_mu_r;
    const double nu_magnet = kNu0 / d.magnet_mu_r;
    // linear magnet model: the remanence enters as an equivalent
    // magnetisation H_pm = nu * B_r along the pole axis (30 degrees)
    const double h_pm_mag = d.magnet_remanence / (mu0 * d.magnet_mu_r);
    const double pole_axis = 30.0 * kDeg;
    const Point2 h_pm{h_pm_mag * std::cos(pole_axis), h_pm_mag * std::sin(pole_axis)};

    m.materials["shaft"] = {nu_air, {0, 0}, 0.0};
    m.materials["rotor_iron"] = {nu_iron, {0, 0}, 0.0};
    m.materials["magnet"] = {nu_magnet, h_pm, 0.0};
    m.materials["rotor_air"] = {nu_air, {0, 0}, 0.0};
    m.materials["gap_air"] = {nu_air, {0, 0}, 0.0};
    m.materials["stator_iron"] = {nu_iron, {0, 0}, 0.0};
    m.materials["coil_u"] = {nu_air, {0, 0}, 0.0};
    m.materials["coil_v"] = {nu_air, {0, 0}, 0.0};
    m.materials["coil_w"] = {nu_air, {0, 0}, 0.0};

    auto add_ring = [&](Subdomain sd, double r0, double r1,
                        const std::vector<double>& angles_deg,
                        const std::vector<std::string>& regions, bool inner_d,
                        bool outer_d) {
        const size_t nseg = angles_deg.size() - 1;
        for (size_t s = 0; s < nseg; ++s) {
            Patch p = make_annular_patch(r0, r1, angles_deg[s] * kDeg,
                                         angles_deg[s + 1] * kDeg, regions[s]);
            m.patches.push_back(std::move(p));
            m.subdomain.push_back(sd);
            std::array<EdgeTag, 4> tags{EdgeTag::None, EdgeTag::None, EdgeTag::None,
                                        EdgeTag::None};
            if (s == 0) tags[static_cast<int>(Side::V0)] = EdgeTag::Right;
            if (s + 1 == nseg) tags[static_cast<int>(Side::V1)] = EdgeTag::Left;
            if (inner_d) tags[static_cast<int>(Side::U0)] = EdgeTag::Dirichlet;
            if (outer_d) tags[static_cast<int>(Side::U1)] = EdgeTag::Dirichlet;
            m.edge_tags.push_back(tags);
        }
    };

    const auto& ra = d.rotor_angles_deg;
    add_ring(Subdomain::Rotor, d.r_bore, d.r_shaft, ra,
             {"shaft", "shaft", "shaft"}, true, false);
    add_ring(Subdomain::Rotor, d.r_shaft, d.r_iron, ra,
             {"rotor_iron", "rotor_iron", "rotor_iron"}, false, false);
    add_ring(Subdomain::Rotor, d.r_iron, d.r_magnet, ra,
             {"rotor_air", "magnet", "rotor_air"}, false, false);
    add_ring(Subdomain::Rotor, d.r_magnet, d.r_gap, ra,
             {"rotor_air", "rotor_air", "rotor_air"}, false, false);
    // rotor side of the interface circle
    for (size_t k = m.patches.size() - 3; k < m.patches.size(); ++k)
        m.edge_tags[k][static_cast<int>(Side::U1)] = EdgeTag::AirGap;

    const auto& sa = d.stator_angles_deg;
    add_ring(Subdomain::Stator, d.r_gap, d.r_stator_bore, sa,
             {"gap_air", "gap_air", "gap_air", "gap_air", "gap_air", "gap_air",
              "gap_air", "gap_air", "gap_air"},
             false, false);
    const size_t gap_first = m.patches.size() - 9;
    for (size_t k = gap_first; k < m.patches.size(); ++k)
        m.edge_tags[k][static_cast<int>(Side::U0)] = EdgeTag::AirGap;
    add_ring(Subdomain::Stator, d.r_stator_bore, d.r_slot_top, sa,
             {"stator_iron", "coil_u", "stator_iron", "stator_iron", "coil_w",
              "stator_iron", "stator_iron", "coil_v", "stator_iron"},
             false, false);
    add_ring(Subdomain::Stator, d.r_slot_top, d.r_outer, sa,
             {"stator_iron", "stator_iron", "stator_iron", "stator_iron",
              "stator_iron", "stator_iron", "stator_iron", "stator_iron",
              "stator_iron"},
             false, true);

    const double coil_area = (10.0 * kDeg) *
                             (d.r_slot_top * d.r_slot_top -
                              d.r_stator_bore * d.r_stator_bore) / 2.0;
    m.windings.push_back({"U", "coil_u", d.coil_turns, +1, coil_area});
    m.windings.push_back({"V", "coil_v", d.coil_turns, +1, coil_area});
    m.windings.push_back({"W", "coil_w", d.coil_turns, -1, coil_area});
    return m;
}

}  // namespace igamag::geom
