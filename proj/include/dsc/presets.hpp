// presets.hpp - fitted parameter sets for the five measured datasets

#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dsc/rabi.hpp"

namespace dsc {

struct CircuitPreset {
    std::string_view id;
    std::string_view circuit; // "I", "II", "III"
    double n_phi_q;
    RabiParams params;        // epsilon = 0
    double alpha_listed;
    double superradiance_listed; // 2g / sqrt(omega_o delta) as tabulated
};

inline constexpr std::array<CircuitPreset, 5> presets{{
    {"I_m0p5", "I", -0.5, {0.505, 6.336, 4.57, 0.0}, 0.72, 5.1},
    {"I_m1p5", "I", -1.5, {0.430, 6.306, 4.92, 0.0}, 0.78, 6.0},
    {"I_2p5", "I", 2.5, {0.299, 6.233, 5.79, 0.0}, 0.93, 8.5},
    {"II_m0p5", "II", -0.5, {0.441, 5.711, 7.63, 0.0}, 1.34, 9.6},
    {"III_0p5", "III", 0.5, {3.84, 5.588, 5.63, 0.0}, 1.01, 2.4},
}};

inline std::optional<CircuitPreset> find_preset(std::string_view id) {
    for (const auto& p : presets)
        if (p.id == id) return p;
    return std::nullopt;
}

inline const CircuitPreset& preset(std::string_view id) {
    for (const auto& p : presets)
        if (p.id == id) return p;
    throw std::out_of_range("unknown preset: " + std::string(id));
}

} // namespace dsc
