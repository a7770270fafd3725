// entanglement.hpp - reduced density matrices, von Neumann entanglement,
// thermal states, negativity, and closed-form estimates.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dsc/diagnostics.hpp"
#include "dsc/fock.hpp"
#include "dsc/rabi.hpp"
#include "dsc/spectrum.hpp"
#include "dsc/units.hpp"

namespace dsc {

enum class Subsystem { joint, qubit, oscillator };

struct DensityMatrix {
    Matrix matrix;
    Subsystem basis = Subsystem::joint;
    int n_max = 0; // oscillator truncation (joint and oscillator bases)

    double trace() const { return matrix.trace().real(); }
    double purity() const { return (matrix * matrix).trace().real(); }
    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (matrix + matrix.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }
};

inline DensityMatrix pure_density(const JointState& s) {
    return {s.amplitudes * s.amplitudes.adjoint(), Subsystem::joint, s.n_max};
}

inline void require_joint(const DensityMatrix& rho, const char* who) {
    if (rho.basis != Subsystem::joint || rho.matrix.rows() != 2 * rho.n_max || rho.matrix.cols() != 2 * rho.n_max) {
        throw std::invalid_argument(std::string(who) + ": expected a joint density matrix of dimension 2*n_max");
    }
}

inline DensityMatrix reduce_to_qubit(const JointState& s) {
    const Matrix psi = s.as_matrix(); // rows: qubit, cols: Fock
    return {psi * psi.adjoint(), Subsystem::qubit, 0};
}

inline DensityMatrix reduce_to_qubit(const DensityMatrix& rho) {
    require_joint(rho, "reduce_to_qubit");
    const int n = rho.n_max;
    Matrix out(2, 2);
    for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t) out(s, t) = rho.matrix.block(s * n, t * n, n, n).trace();
    return {out, Subsystem::qubit, 0};
}

inline DensityMatrix reduce_to_oscillator(const JointState& s) {
    const Matrix psi = s.as_matrix();
    // rho_o[n, n'] = sum_s psi[s, n] psi*[s, n']
    return {psi.transpose() * psi.conjugate(), Subsystem::oscillator, s.n_max};
}

inline DensityMatrix reduce_to_oscillator(const DensityMatrix& rho) {
    require_joint(rho, "reduce_to_oscillator");
    const int n = rho.n_max;
    return {rho.matrix.block(0, 0, n, n) + rho.matrix.block(n, n, n, n), Subsystem::oscillator, n};
}

// Base-2 entropy; eigenvalues below 1e-300 contribute nothing.
inline double von_neumann_entropy(const DensityMatrix& rho) {
    const Eigen::VectorXd lam = rho.eigenvalues();
    double s = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam(i) > 1e-300) s -= lam(i) * std::log2(lam(i));
    return s;
}

inline double vn_entanglement(const JointState& ground) { return von_neumann_entropy(reduce_to_qubit(ground)); }

enum class EntropyApprox { exact_formula, second_order };

struct Estimate {
    double value = 0.0;
    bool valid = true;
};

// Entropy of the qubit in the cat approximation of the ground state, either
// in closed form or expanded to second order in exp(-2 alpha^2). The
// expansion assumes a small branch overlap and is flagged invalid for
// alpha < 0.5.
inline Estimate vn_entanglement_approx(double alpha, EntropyApprox order) {
    if (alpha < 0.0) throw std::invalid_argument("vn_entanglement_approx: alpha must be >= 0");
    const double x = std::exp(-2.0 * alpha * alpha);
    if (order == EntropyApprox::second_order) {
        return {1.0 - x * x / (2.0 * std::numbers::ln2), alpha >= 0.5};
    }
    auto term = [](double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; };
    return {term(0.5 * (1.0 + x)) + term(0.5 * (1.0 - x)), true};
}

struct ThermalSpec {
    double temperature_mk = 0.0;

    double kt_ghz() const { return units::thermal_frequency_ghz(temperature_mk); }
};

inline constexpr double thermal_weight_cutoff = 1e-12;

// Boltzmann mixture over the computed levels. The highest level must carry
// a relative weight below the cutoff, otherwise the level set is too small.
inline DensityMatrix thermal_state(const EigenSystem& es, const ThermalSpec& t) {
    if (!(t.temperature_mk > 0.0)) throw std::invalid_argument("thermal_state: temperature must be > 0");
    const double kt = t.kt_ghz();
    const int k = es.levels();
    Eigen::VectorXd w(k);
    for (int i = 0; i < k; ++i) w(i) = std::exp(-(es.energies(i) - es.energies(0)) / kt);
    if (w(k - 1) >= thermal_weight_cutoff) {
        throw std::domain_error("thermal_state: insufficient levels; weight of level " + std::to_string(k - 1) +
                                " is " + std::to_string(w(k - 1)) + " >= cutoff");
    }
    int used = k;
    while (used > 1 && w(used - 1) < thermal_weight_cutoff) --used;
    const double z = w.head(used).sum();
    const int dim = 2 * es.n_max_used;
    Matrix rho = Matrix::Zero(dim, dim);
    for (int i = 0; i < used; ++i) {
        const Vector& v = es.states[i].amplitudes;
        rho.noalias() += (w(i) / z) * (v * v.adjoint());
    }
    return {rho, Subsystem::joint, es.n_max_used};
}

// Solves enough levels of the Rabi Hamiltonian for thermal_state at t.
inline DensityMatrix thermal_state(const RabiParams& p, const ThermalSpec& t, const FockSpace& space) {
    int k = std::min(16, space.joint_dim());
    for (;;) {
        const EigenSystem es = solve(p, space, k);
        const double top = std::exp(-(es.energies(k - 1) - es.energies(0)) / t.kt_ghz());
        if (top < thermal_weight_cutoff) return thermal_state(es, t);
        if (k == space.joint_dim()) {
            throw std::domain_error("thermal_state: truncation too small for the weight cutoff at " +
                                    std::to_string(t.temperature_mk) + " mK");
        }
        k = std::min(2 * k, space.joint_dim());
    }
}

// Partial transpose over the qubit: block (s, s') <- block (s', s).
inline DensityMatrix partial_transpose_qubit(const DensityMatrix& rho) {
    require_joint(rho, "partial_transpose_qubit");
    const int n = rho.n_max;
    DensityMatrix out = rho;
    out.matrix.block(0, n, n, n) = rho.matrix.block(n, 0, n, n);
    out.matrix.block(n, 0, n, n) = rho.matrix.block(0, n, n, n);
    return out;
}

// 2N = 2 * sum of |negative eigenvalues| of the partial transpose, in [0, 1].
inline double negativity_entanglement(const DensityMatrix& rho) {
    const Eigen::VectorXd lam = partial_transpose_qubit(rho).eigenvalues();
    double neg = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam(i) < 0.0) neg -= lam(i);
    return 2.0 * neg;
}

// E_gs(second order) * tanh(delta exp(-2 alpha^2) / 2kT), valid for alpha >= 0.5.
inline Estimate thermal_entanglement_estimate(const RabiParams& p, const ThermalSpec& t) {
    const double alpha = p.alpha();
    const Estimate egs = vn_entanglement_approx(alpha, EntropyApprox::second_order);
    const double w01 = p.delta * std::exp(-2.0 * alpha * alpha);
    return {egs.value * std::tanh(w01 / (2.0 * t.kt_ghz())), alpha >= 0.5};
}

// Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2 between density matrices.
inline double state_fidelity(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.matrix.rows() != b.matrix.rows()) throw std::invalid_argument("state_fidelity: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> ea(0.5 * (a.matrix + a.matrix.adjoint()));
    const Eigen::VectorXd la = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix sqrt_a = ea.eigenvectors() * la.asDiagonal() * ea.eigenvectors().adjoint();
    const Matrix inner = sqrt_a * b.matrix * sqrt_a;
    Eigen::SelfAdjointEigenSolver<Matrix> ei(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
    const double tr = ei.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return tr * tr;
}

} // namespace dsc
