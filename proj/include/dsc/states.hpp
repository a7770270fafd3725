// states.hpp - cat-state approximations of the low-lying eigenstates,
// qubit energy eigenstates, fidelities, and coherent-state overlaps.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "dsc/fock.hpp"
#include "dsc/rabi.hpp"

namespace dsc {

// One row of the cat-state table: (|L> D(-alpha)|n> + sign |R> D(alpha)|n>).
struct CatStateSpec {
    int level = 0;
    double alpha = 0.0;
    int fock_n = 0;
    int sign = +1;
};

// Rows for levels 0..3. Above g = omega_o/2 the antisymmetric n = 1 branch
// drops below the symmetric one, so levels 2 and 3 swap.
inline CatStateSpec cat_spec_for_level(int level, double alpha, bool above_half_crossing) {
    if (level < 0 || level > 3) throw std::out_of_range("cat_spec_for_level: level must be 0..3");
    CatStateSpec s;
    s.level = level;
    s.alpha = alpha;
    s.fock_n = level < 2 ? 0 : 1;
    const bool symmetric = (level == 0) || (level == 2 && !above_half_crossing) || (level == 3 && above_half_crossing);
    s.sign = symmetric ? +1 : -1;
    return s;
}

// Normalized exactly: the branch overlap <-alpha|alpha> is not dropped.
inline JointState cat_state(const CatStateSpec& spec, const FockSpace& space) {
    if (spec.fock_n < 0 || spec.fock_n >= space.n_max()) throw std::out_of_range("cat_state: fock_n outside truncation");
    if (spec.sign != 1 && spec.sign != -1) throw std::invalid_argument("cat_state: sign must be +1 or -1");
    const int n = space.n_max();
    const Vector left = displacement(space, -spec.alpha).col(spec.fock_n);
    const Vector right = displacement(space, spec.alpha).col(spec.fock_n);
    Vector amps(2 * n);
    amps.head(n) = left;
    amps.tail(n) = static_cast<double>(spec.sign) * right;
    return JointState(std::move(amps), n).normalized();
}

inline double displacement_estimate(const RabiParams& p) { return p.g / p.omega_o; }

// Cat-state approximations mapped onto energy levels 0..3 for the given parameters.
inline std::array<JointState, 4> cat_approximations(const RabiParams& p, const FockSpace& space) {
    const double alpha = displacement_estimate(p);
    const bool above = p.g > 0.5 * p.omega_o;
    std::array<JointState, 4> out;
    for (int level = 0; level < 4; ++level) out[level] = cat_state(cat_spec_for_level(level, alpha, above), space);
    return out;
}

inline double fidelity(const JointState& a, const JointState& b) {
    if (a.amplitudes.size() != b.amplitudes.size()) throw std::invalid_argument("fidelity: dimension mismatch");
    return std::norm(a.amplitudes.dot(b.amplitudes));
}

// <beta|alpha> for coherent states.
inline cplx coherent_overlap(cplx beta, cplx alpha) {
    return std::exp(-0.5 * std::norm(alpha) - 0.5 * std::norm(beta) + std::conj(beta) * alpha);
}

// cos(theta) = epsilon / sqrt(delta^2 + epsilon^2), theta in [0, pi].
inline double qubit_mixing_angle(double delta, double epsilon) {
    const double r = std::hypot(delta, epsilon);
    if (r == 0.0) throw std::domain_error("qubit_mixing_angle: delta and epsilon both zero");
    return std::acos(std::clamp(epsilon / r, -1.0, 1.0));
}

// |g> and |e> in the (|L>, |R>) basis.
inline std::pair<Vector, Vector> qubit_eigenstates(double delta, double epsilon) {
    const double th = qubit_mixing_angle(delta, epsilon);
    Vector g(2), e(2);
    g << std::cos(th / 2), std::sin(th / 2);
    e << std::sin(th / 2), -std::cos(th / 2);
    return {g, e};
}

// Product state |q> (x) |k>.
inline JointState product_state(const Vector& qubit, const Vector& osc) {
    if (qubit.size() != 2) throw std::invalid_argument("product_state: qubit vector must have length 2");
    const Eigen::Index n = osc.size();
    Vector amps(2 * n);
    amps.head(n) = qubit(0) * osc;
    amps.tail(n) = qubit(1) * osc;
    return JointState(std::move(amps), static_cast<int>(n));
}

} // namespace dsc
