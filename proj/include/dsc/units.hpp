// units.hpp - physical constants and unit conversions used across the toolkit
//
// Frequencies are GHz (f = omega/2pi), currents nA, inductances pH,
// capacitances fF, temperatures mK unless a name says otherwise.

#pragma once

#include <cmath>
#include <numbers>

namespace dsc::units {

inline constexpr double planck = 6.62607015e-34;          // J s
inline constexpr double hbar = planck / (2.0 * std::numbers::pi);
inline constexpr double flux_quantum = 2.067834e-15;      // Wb
inline constexpr double boltzmann_ghz_per_kelvin = 20.836619;

inline constexpr double nano = 1e-9;
inline constexpr double pico = 1e-12;
inline constexpr double femto = 1e-15;
inline constexpr double giga = 1e9;

// k_B T / h in GHz.
inline double thermal_frequency_ghz(double temperature_mk) {
    return temperature_mk * 1e-3 * boltzmann_ghz_per_kelvin;
}

} // namespace dsc::units
