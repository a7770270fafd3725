// circuit.hpp - Josephson coupler circuit: critical-current ratios, phase
// minimization of the total Josephson energy, and the derived inductances.
//
// Units: currents nA, inductances pH, capacitances fF, frequencies GHz.
// Energies returned by total_josephson_energy are in units of
// E_J = Phi0 I_c / 2pi.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dsc/detail/parallel.hpp"
#include "dsc/diagnostics.hpp"
#include "dsc/units.hpp"

namespace dsc::circuit {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class CouplerKind { four_junction, squid };

struct CouplerCircuit {
    double i_c = 460.0;       // nA
    double a3 = 0.705;
    CouplerKind kind = CouplerKind::four_junction;
    double area_ratio = 24.0; // n_phi_q : n_phi_c
    double l0 = 0.0;          // pH
    double cap = 0.0;         // fF

    void validate() const {
        if (!(i_c > 0.0)) throw std::invalid_argument("CouplerCircuit: i_c must be > 0");
        if (!(a3 > 0.0 && a3 < 1.0)) throw std::invalid_argument("CouplerCircuit: a3 must be in (0, 1)");
        if (!(area_ratio > 0.0)) throw std::invalid_argument("CouplerCircuit: area_ratio must be > 0");
    }
};

enum class Branch { L, R };

struct PhaseConfig {
    std::array<double, 3> phi{};
    Branch branch = Branch::L;
    double energy = 0.0; // E_J units
    double n_phi_q = 0.0;
    double delta_i = 0.0; // nA

    double upper_phase() const { return phi[0] + phi[1] + phi[2]; }
    double coupler_phase() const { return two_pi * n_phi_q - upper_phase(); }
};

// Coupler critical current in units of I_c.
inline double coupler_ratio(CouplerKind kind, double n_phi_c) {
    if (kind == CouplerKind::four_junction) {
        return 4.0 * std::cos(two_pi * n_phi_c) * std::cos(std::numbers::pi * n_phi_c);
    }
    return 2.0 * std::cos(std::numbers::pi * n_phi_c);
}

inline double coupler_ratio(const CouplerCircuit& c, double n_phi_q) {
    return coupler_ratio(c.kind, n_phi_q / c.area_ratio);
}

// Phi0 / (2 pi sqrt(i_cm^2 - i_b^2)) in pH.
inline double coupler_inductance(double i_cm, double i_b) {
    if (!(std::abs(i_b) < i_cm)) {
        throw std::domain_error("coupler_inductance: |i_b| must be below i_cm (" + std::to_string(i_b) + " vs " +
                                std::to_string(i_cm) + " nA)");
    }
    const double amps = std::sqrt(i_cm * i_cm - i_b * i_b) * units::nano;
    return units::flux_quantum / (two_pi * amps) / units::pico;
}

inline double total_josephson_energy(const CouplerCircuit& c, const std::array<double, 3>& phi, double n_phi_q,
                                     double delta_i) {
    const double ac = coupler_ratio(c, n_phi_q);
    const double phi_u = phi[0] + phi[1] + phi[2];
    const double phi_x = phi_u + std::numbers::pi * n_phi_q;
    return -(std::cos(phi[0]) + std::cos(phi[1]) + c.a3 * std::cos(phi[2]) + ac * std::cos(-phi_u + two_pi * n_phi_q)) -
           (delta_i / c.i_c) * phi_x;
}

namespace detail {

inline Eigen::Vector3d weights(const CouplerCircuit& c) { return {1.0, 1.0, c.a3}; }

inline Eigen::Vector3d energy_gradient(const CouplerCircuit& c, const Eigen::Vector3d& phi, double n_phi_q,
                                       double delta_i) {
    const double ac = coupler_ratio(c, n_phi_q);
    const double coupler = ac * std::sin(two_pi * n_phi_q - phi.sum());
    const Eigen::Vector3d w = weights(c);
    Eigen::Vector3d g;
    for (int i = 0; i < 3; ++i) g(i) = w(i) * std::sin(phi(i)) - coupler - delta_i / c.i_c;
    return g;
}

inline Eigen::Matrix3d energy_hessian(const CouplerCircuit& c, const Eigen::Vector3d& phi, double n_phi_q) {
    const double ac = coupler_ratio(c, n_phi_q);
    const double coupler = ac * std::cos(two_pi * n_phi_q - phi.sum());
    const Eigen::Vector3d w = weights(c);
    Eigen::Matrix3d h = Eigen::Matrix3d::Constant(coupler);
    for (int i = 0; i < 3; ++i) h(i, i) += w(i) * std::cos(phi(i));
    return h;
}

inline double wrap_phase(double x) {
    x = std::remainder(x, two_pi);
    return x <= -std::numbers::pi ? x + two_pi : x;
}

} // namespace detail

struct MinimizerOptions {
    double grad_tol = 1e-12;
    int max_iterations = 200;
    double window = 0.05; // |n_phi_q - n_phi_q0| bound for the two-well picture
};

// Nearest half-integer flux bias.
inline double degeneracy_point(double n_phi_q) { return std::floor(n_phi_q) + 0.5; }

// Damped Newton descent from a seed. The Hessian's eigenvalues are replaced
// by their magnitudes (floored at 1e-3) so every step is a descent direction,
// then Armijo backtracking sets the step length.
inline PhaseConfig minimize_phases(const CouplerCircuit& c, std::array<double, 3> seed, double n_phi_q,
                                   double delta_i, const MinimizerOptions& opt = {}) {
    Eigen::Vector3d phi(seed[0], seed[1], seed[2]);
    auto energy = [&](const Eigen::Vector3d& p) {
        return total_josephson_energy(c, {p(0), p(1), p(2)}, n_phi_q, delta_i);
    };
    double e = energy(phi);
    bool done = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
        const Eigen::Vector3d g = detail::energy_gradient(c, phi, n_phi_q, delta_i);
        if (g.norm() < opt.grad_tol) {
            done = true;
            break;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(detail::energy_hessian(c, phi, n_phi_q));
        const Eigen::Vector3d lam = es.eigenvalues().cwiseAbs().cwiseMax(1e-3);
        const Eigen::Vector3d step = -es.eigenvectors() * ((es.eigenvectors().transpose() * g).cwiseQuotient(lam));
        const double slope = g.dot(step);
        double t = 1.0;
        Eigen::Vector3d trial = phi + step;
        double e_trial = energy(trial);
        while (e_trial > e + 1e-4 * t * slope && t > 1e-10) {
            t *= 0.5;
            trial = phi + t * step;
            e_trial = energy(trial);
        }
        if (trial == phi) {
            done = g.norm() < 1e-9;
            break;
        }
        phi = trial;
        e = e_trial;
    }
    if (!done && detail::energy_gradient(c, phi, n_phi_q, delta_i).norm() >= 1e-9) {
        throw NumericalError("minimize_phases: no stationary point reached at n_phi_q = " + std::to_string(n_phi_q));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> check(detail::energy_hessian(c, phi, n_phi_q));
    if (check.eigenvalues().minCoeff() <= 0.0) {
        throw NumericalError("minimize_phases: stationary point is not a minimum at n_phi_q = " +
                             std::to_string(n_phi_q));
    }
    PhaseConfig out;
    for (int i = 0; i < 3; ++i) out.phi[i] = detail::wrap_phase(phi(i));
    out.energy = energy(phi);
    out.n_phi_q = n_phi_q;
    out.delta_i = delta_i;
    // |L> carries the circulating current I_c sin(phi1) < 0 and is the lower
    // well for n_phi_q above the degeneracy point.
    out.branch = std::sin(out.phi[0]) < 0.0 ? Branch::L : Branch::R;
    return out;
}

struct PersistentStates {
    PhaseConfig left;
    PhaseConfig right;
};

inline PersistentStates find_persistent_states(const CouplerCircuit& c, double n_phi_q, double delta_i = 0.0,
                                               const MinimizerOptions& opt = {}) {
    c.validate();
    const double n0 = degeneracy_point(n_phi_q);
    if (std::abs(n_phi_q - n0) >= opt.window) {
        throw std::domain_error("find_persistent_states: n_phi_q = " + std::to_string(n_phi_q) +
                                " is outside the two-well window around " + std::to_string(n0));
    }
    const PhaseConfig a = minimize_phases(c, {0.75, 0.75, 1.45}, n_phi_q, delta_i, opt);
    const PhaseConfig b = minimize_phases(c, {-0.75, -0.75, -1.45}, n_phi_q, delta_i, opt);
    double dist = 0.0;
    for (int i = 0; i < 3; ++i) dist = std::max(dist, std::abs(detail::wrap_phase(a.phi[i] - b.phi[i])));
    if (dist < 1e-4 || a.branch == b.branch) {
        throw NumericalError("find_persistent_states: wells merged at n_phi_q = " + std::to_string(n_phi_q) +
                             ", delta_i = " + std::to_string(delta_i) + " nA");
    }
    return a.branch == Branch::L ? PersistentStates{a, b} : PersistentStates{b, a};
}

struct JunctionInductances {
    std::array<double, 4> l{}; // L_J1..L_J4, pH; L_J4 is the coupler junction
};

inline JunctionInductances junction_inductances(const CouplerCircuit& c, const PhaseConfig& cfg) {
    const double ac = coupler_ratio(c, cfg.n_phi_q);
    const std::array<double, 4> ic{c.i_c, c.i_c, c.a3 * c.i_c, ac * c.i_c};
    const std::array<double, 4> ph{cfg.phi[0], cfg.phi[1], cfg.phi[2], cfg.coupler_phase()};
    JunctionInductances out;
    for (int i = 0; i < 4; ++i)
        out.l[i] = units::flux_quantum / (two_pi * ic[i] * units::nano * std::cos(ph[i])) / units::pico;
    return out;
}

// L_c = L_J4 at the configuration.
inline double coupler_junction_inductance(const CouplerCircuit& c, const PhaseConfig& cfg) {
    const double l4 = junction_inductances(c, cfg).l[3];
    if (!(l4 > 0.0) || !std::isfinite(l4)) {
        throw std::domain_error("coupler_junction_inductance: coupler phase beyond +-pi/2");
    }
    return l4;
}

// L_J4 in parallel with L_J1 + L_J2 + L_J3, evaluated in inverse-inductance
// form so a series junction passing through cos(phi) = 0 stays continuous.
inline double qubit_coupler_inductance(const CouplerCircuit& c, const PhaseConfig& cfg) {
    const double ac = coupler_ratio(c, cfg.n_phi_q);
    const std::array<double, 4> ic{c.i_c, c.i_c, c.a3 * c.i_c, ac * c.i_c};
    const std::array<double, 4> ph{cfg.phi[0], cfg.phi[1], cfg.phi[2], cfg.coupler_phase()};
    std::array<double, 4> y{}; // 1/L_Ji in 1/pH
    for (int i = 0; i < 4; ++i)
        y[i] = two_pi * ic[i] * units::nano * std::cos(ph[i]) / units::flux_quantum * units::pico;
    if (!(y[3] > 0.0)) {
        throw std::domain_error("qubit_coupler_inductance: coupler junction has non-positive inductance");
    }
    double series_inv = 0.0; // 1 / (L_J1 + L_J2 + L_J3)
    bool open = false;
    double series = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (y[i] == 0.0) {
            open = true;
            break;
        }
        series += 1.0 / y[i];
    }
    if (!open) series_inv = 1.0 / series;
    const double total = y[3] + series_inv;
    if (!(total > 0.0)) throw std::domain_error("qubit_coupler_inductance: non-positive inductance");
    return 1.0 / total;
}

// (L_g, L_e) from (L_L, L_R) at qubit mixing angle theta.
inline std::pair<double, double> eigenbasis_inductances(double l_left, double l_right, double theta) {
    const double c2 = std::cos(theta / 2) * std::cos(theta / 2);
    const double s2 = std::sin(theta / 2) * std::sin(theta / 2);
    return {c2 * l_left + s2 * l_right, s2 * l_left + c2 * l_right};
}

struct MutualInductance {
    double left = 0.0;  // pH
    double right = 0.0; // pH

    double mean() const { return 0.5 * (left + right); }
    double relative_branch_difference() const { return std::abs(left - right) / mean(); }
};

namespace detail {

// M = Phi0 |dn/dI|: the flux shift equivalent to a bias current step, from
// a central difference of phi_u at +-delta_i and d phi_u / d n_phi_q.
inline double branch_mutual(const CouplerCircuit& c, const PhaseConfig& base, double delta_i,
                            const MinimizerOptions& opt) {
    const double n = base.n_phi_q;
    const double dn = 1e-4;
    auto upper = [&](double nq, double di) { return minimize_phases(c, base.phi, nq, di, opt).upper_phase(); };
    const double dphi_dn = (upper(n + dn, 0.0) - upper(n - dn, 0.0)) / (2.0 * dn);
    const double dphi_di = (upper(n, delta_i) - upper(n, -delta_i)) / 2.0;
    const double dn_equiv = dphi_di / dphi_dn;
    return units::flux_quantum * std::abs(dn_equiv / (delta_i * units::nano)) / units::pico;
}

} // namespace detail

inline MutualInductance mutual_inductance(const CouplerCircuit& c, double n_phi_q, double delta_i = 10.0,
                                          const MinimizerOptions& opt = {}) {
    if (!(delta_i > 0.0)) throw std::invalid_argument("mutual_inductance: delta_i must be > 0");
    const PersistentStates ps = find_persistent_states(c, n_phi_q, 0.0, opt);
    // both bias points must still have two wells
    find_persistent_states(c, n_phi_q, delta_i, opt);
    find_persistent_states(c, n_phi_q, -delta_i, opt);
    return {detail::branch_mutual(c, ps.left, delta_i, opt), detail::branch_mutual(c, ps.right, delta_i, opt)};
}

// f = 1 / (2 pi sqrt((l0 + l_qc) C)) in GHz.
inline double oscillator_frequency(double l0, double l_qc, double cap) {
    if (l0 < 0.0 || !(l0 + l_qc > 0.0) || !(cap > 0.0)) {
        throw std::invalid_argument("oscillator_frequency: inductance and capacitance must be positive");
    }
    const double lc = (l0 + l_qc) * units::pico * cap * units::femto;
    return 1.0 / (two_pi * std::sqrt(lc)) / units::giga;
}

// sqrt(hbar omega / 2L) in nA, with omega = 2 pi f.
inline double zero_point_current(double l0, double l_qc, double omega_o_ghz) {
    if (l0 < 0.0 || !(l0 + l_qc > 0.0) || !(omega_o_ghz > 0.0)) {
        throw std::invalid_argument("zero_point_current: inputs must be positive");
    }
    const double energy = units::hbar * two_pi * omega_o_ghz * units::giga;
    return std::sqrt(energy / (2.0 * (l0 + l_qc) * units::pico)) / units::nano;
}

// epsilon/2pi in GHz for a flux bias, hbar epsilon = 2 I_p Phi0 (n - n0).
inline double epsilon_from_flux(double n_phi_q, double i_p_na) {
    const double joules = 2.0 * i_p_na * units::nano * units::flux_quantum * (n_phi_q - degeneracy_point(n_phi_q));
    return joules / units::planck / units::giga;
}

struct InductanceSet {
    double n_phi_q = 0.0;
    double delta_i = 0.0;
    double l_c_left = 0.0, l_c_right = 0.0;
    double l_qc_left = 0.0, l_qc_right = 0.0;
    double l_qc_g = 0.0, l_qc_e = 0.0;
    MutualInductance m;

    double l_c() const { return 0.5 * (l_c_left + l_c_right); }
};

struct SweepPoint {
    PersistentStates states;
    InductanceSet inductances;
};

// Full per-bias evaluation; theta sets the qubit eigenbasis mixing.
inline SweepPoint evaluate_bias(const CouplerCircuit& c, double n_phi_q, double theta, double delta_i = 10.0,
                                const MinimizerOptions& opt = {}) {
    SweepPoint pt;
    pt.states = find_persistent_states(c, n_phi_q, 0.0, opt);
    InductanceSet& s = pt.inductances;
    s.n_phi_q = n_phi_q;
    s.delta_i = delta_i;
    s.l_c_left = coupler_junction_inductance(c, pt.states.left);
    s.l_c_right = coupler_junction_inductance(c, pt.states.right);
    s.l_qc_left = qubit_coupler_inductance(c, pt.states.left);
    s.l_qc_right = qubit_coupler_inductance(c, pt.states.right);
    std::tie(s.l_qc_g, s.l_qc_e) = eigenbasis_inductances(s.l_qc_left, s.l_qc_right, theta);
    s.m = mutual_inductance(c, n_phi_q, delta_i, opt);
    return pt;
}

inline std::vector<SweepPoint> coupler_sweep(const CouplerCircuit& c, const std::vector<double>& n_values,
                                             double delta_i = 10.0, std::size_t workers = 0) {
    std::vector<SweepPoint> out(n_values.size());
    dsc::detail::parallel_for(n_values.size(), [&](std::size_t i) {
        out[i] = evaluate_bias(c, n_values[i], std::numbers::pi / 2, delta_i);
    }, workers);
    return out;
}

} // namespace dsc::circuit
