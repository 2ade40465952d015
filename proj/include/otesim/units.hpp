// units.hpp — Natural-unit conventions and SI reporting helpers
//
// All kernels work in natural units: hbar = k_B = 1, frequencies in units of
// the slab resonance omega_S, temperatures as t = k_B T / (hbar omega_S).
// Conversion to SI is a reporting concern only.

#pragma once

namespace otesim::units {

inline constexpr double hbar_si = 1.054571817e-34;  // J s
inline constexpr double kb_si = 1.380649e-23;       // J / K

// First resonance of the reference slab material, rad/s.
inline constexpr double omega_s_si = 0.81e14;

// One natural temperature unit expressed in kelvin.
inline constexpr double kelvin_per_unit = hbar_si * omega_s_si / kb_si;

inline constexpr double to_kelvin(double t_natural) {
    return t_natural * kelvin_per_unit;
}

inline constexpr double from_kelvin(double t_kelvin) {
    return t_kelvin / kelvin_per_unit;
}

}  // namespace otesim::units
