// rabi.hpp - Rabi-model Hamiltonians, the A^2 term and its Bogoliubov frame,
// coupler nonlinearity coefficients, and the superradiance criterion.
//
// Hamiltonians are stored as H/h in GHz.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "dsc/diagnostics.hpp"
#include "dsc/fock.hpp"
#include "dsc/units.hpp"

namespace dsc {

struct RabiParams {
    double delta = 0.0;    // tunnel splitting, GHz
    double omega_o = 0.0;  // oscillator frequency, GHz
    double g = 0.0;        // coupling, GHz
    double epsilon = 0.0;  // flux-bias energy, GHz

    double alpha() const { return g / omega_o; }

    RabiParams with_epsilon(double eps) const {
        RabiParams p = *this;
        p.epsilon = eps;
        return p;
    }
    RabiParams with_g(double coupling) const {
        RabiParams p = *this;
        p.g = coupling;
        return p;
    }

    void validate() const {
        if (!(delta > 0.0)) throw std::invalid_argument("RabiParams: delta must be > 0");
        if (!(omega_o > 0.0)) throw std::invalid_argument("RabiParams: omega_o must be > 0");
        if (!(g >= 0.0)) throw std::invalid_argument("RabiParams: g must be >= 0");
    }
};

struct NonlinearCoupling {
    double c_a2 = 0.0;
    double c_a3 = 0.0;
};

struct BogoliubovFrame {
    double omega_o_prime = 0.0;
    double g_prime = 0.0;
};

inline Matrix build_hamiltonian(const RabiParams& p, const FockSpace& space) {
    const Matrix sx = pauli(Axis::x);
    const Matrix sz = pauli(Axis::z);
    const Matrix id_q = Matrix::Identity(2, 2);
    const Matrix id_o = Matrix::Identity(space.n_max(), space.n_max());
    const Matrix osc = number_operator(space) + 0.5 * id_o;

    Matrix h = tensor(-0.5 * (p.delta * sx + p.epsilon * sz), id_o);
    h += p.omega_o * tensor(id_q, osc);
    h += p.g * tensor(sz, field_quadrature(space));
    return h;
}

// Stability of the oscillator with the A^2 term: omega_o^2 + 4 c_a2 g omega_o > 0.
inline void check_a2_stability(const RabiParams& p, const NonlinearCoupling& c) {
    const double w2 = p.omega_o * p.omega_o + 4.0 * c.c_a2 * p.g * p.omega_o;
    if (!(w2 > 0.0)) {
        throw NumericalError("A^2 term makes the oscillator unstable: omega_o'^2 = " + std::to_string(w2));
    }
}

inline Matrix build_hamiltonian_a2(const RabiParams& p, const NonlinearCoupling& c, const FockSpace& space) {
    check_a2_stability(p, c);
    Matrix h = build_hamiltonian(p, space);
    if (c.c_a2 != 0.0) {
        const Matrix x = field_quadrature(space);
        h += c.c_a2 * p.g * tensor(Matrix::Identity(2, 2), x * x);
    }
    return h;
}

inline BogoliubovFrame bogoliubov_frame(const RabiParams& p, const NonlinearCoupling& c) {
    check_a2_stability(p, c);
    const double w = std::sqrt(p.omega_o * p.omega_o + 4.0 * c.c_a2 * p.g * p.omega_o);
    return {w, p.g * std::sqrt(p.omega_o / w)};
}

// The linear-coupling parameters that reproduce the A^2 spectrum.
inline RabiParams renormalized_params(const RabiParams& p, const NonlinearCoupling& c) {
    const BogoliubovFrame f = bogoliubov_frame(p, c);
    RabiParams out = p;
    out.omega_o = f.omega_o_prime;
    out.g = f.g_prime;
    return out;
}

// Currents in nA. C_A3 is reported for magnitude comparison only and never
// enters a Hamiltonian.
inline NonlinearCoupling nonlinear_coefficients(double i_p, double i_zpf, double i_cm) {
    if (!(i_p > 0.0) || !(i_zpf >= 0.0)) {
        throw std::invalid_argument("nonlinear_coefficients: need i_p > 0 and i_zpf >= 0");
    }
    if (!(i_cm > i_p)) {
        throw std::domain_error("nonlinear_coefficients: coupler junction beyond critical current (i_cm <= i_p)");
    }
    const double d = i_cm * i_cm - i_p * i_p;
    return {i_p * i_zpf / d, (i_cm * i_cm + 2.0 * i_p * i_p) * i_zpf * i_zpf / (2.0 * d * d)};
}

// g/2pi in GHz from M (pH), I_p (nA), I_zpf (nA).
inline double coupling_energy(double m_ph, double i_p_na, double i_zpf_na) {
    if (m_ph < 0.0 || i_p_na < 0.0 || i_zpf_na < 0.0) {
        throw std::invalid_argument("coupling_energy: inputs must be non-negative");
    }
    const double joules = m_ph * units::pico * i_p_na * units::nano * i_zpf_na * units::nano;
    return joules / units::planck / units::giga;
}

struct SuperradianceReport {
    double ratio = 0.0;                 // 2g / sqrt(delta omega_o)
    bool bare_condition_met = false;    // 4g^2 >= delta omega_o
    bool renormalized_condition_met = false;
    bool no_go_condition_holds = false; // c_a2 > g / delta
};

inline SuperradianceReport superradiance_report(const RabiParams& p, const NonlinearCoupling& c) {
    SuperradianceReport r;
    r.ratio = 2.0 * p.g / std::sqrt(p.delta * p.omega_o);
    const double lhs = 4.0 * p.g * p.g;
    r.bare_condition_met = p.g > 0.0 && lhs >= p.delta * p.omega_o;
    r.renormalized_condition_met = p.g > 0.0 && lhs >= p.delta * (p.omega_o + 4.0 * c.c_a2 * p.g);
    r.no_go_condition_holds = c.c_a2 > p.g / p.delta;
    return r;
}

// Pi = sigma_x (x) (-1)^{a^dagger a}; commutes with H at epsilon = 0.
inline Matrix parity_operator(const FockSpace& space) {
    return tensor(pauli(Axis::x), oscillator_parity(space));
}

} // namespace dsc
