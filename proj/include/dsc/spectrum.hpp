// spectrum.hpp - eigensystems, transition tables, bias sweeps, level crossing
//
// Levels are labelled by energy order (0 = ground). At epsilon = 0 exact
// degeneracies are broken by parity, +1 before -1, and every eigenvector is
// phase-fixed so its largest component is real and positive.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dsc/detail/parallel.hpp"
#include "dsc/diagnostics.hpp"
#include "dsc/fock.hpp"
#include "dsc/rabi.hpp"

namespace dsc {

struct EigenSystem {
    Eigen::VectorXd energies;       // ascending, GHz
    std::vector<JointState> states; // states[i] <-> energies(i)
    int n_max_used = 0;
    bool converged = true;
    double convergence_residual = 0.0;

    int levels() const { return static_cast<int>(energies.size()); }
    double gap(int i, int j) const { return energies(j) - energies(i); }
};

using LevelPair = std::pair<int, int>;

struct Transition {
    int i = 0;
    int j = 0;
    double omega = 0.0; // E_j - E_i, GHz
    cplx t{};           // <i|(a + a^dagger)|j>
    bool allowed = false;
};

struct TransitionTable {
    double epsilon = 0.0;
    std::vector<Transition> entries;

    const Transition& find(int i, int j) const {
        for (const auto& e : entries)
            if (e.i == i && e.j == j) return e;
        throw std::out_of_range("TransitionTable: pair (" + std::to_string(i) + "," + std::to_string(j) + ") not present");
    }
};

struct BiasSweep {
    std::vector<double> epsilons;
    std::vector<TransitionTable> tables;
    RabiParams params;
    int n_max_used = 0;
    bool converged = true;
};

inline constexpr double default_forbidden_threshold = 1e-8;
inline constexpr double degeneracy_tolerance = 1e-12;

// Transitions plotted alongside the spectroscopy data.
inline std::vector<LevelPair> default_transition_pairs() { return {{0, 1}, {0, 2}, {1, 3}, {2, 4}}; }

namespace detail {

inline void fix_phase(Eigen::Ref<Vector> v) {
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const cplx c = v(imax);
    if (std::abs(c) > 0.0) v *= std::conj(c) / std::abs(c);
}

// (I (x) (a + a^dagger)) psi without forming the matrix.
inline Vector apply_field_quadrature(const Vector& psi, int n_max) {
    Vector out = Vector::Zero(psi.size());
    for (int s = 0; s < 2; ++s) {
        const Eigen::Index off = static_cast<Eigen::Index>(s) * n_max;
        for (int n = 0; n < n_max; ++n) {
            cplx acc = 0.0;
            if (n + 1 < n_max) acc += std::sqrt(static_cast<double>(n + 1)) * psi(off + n + 1);
            if (n > 0) acc += std::sqrt(static_cast<double>(n)) * psi(off + n - 1);
            out(off + n) = acc;
        }
    }
    return out;
}

// (sigma_x (x) (-1)^n) psi
inline Vector apply_parity(const Vector& psi, int n_max) {
    Vector out(psi.size());
    for (int n = 0; n < n_max; ++n) {
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        out(n) = sign * psi(n_max + n);
        out(n_max + n) = sign * psi(n);
    }
    return out;
}

} // namespace detail

inline double parity_expectation(const JointState& s) {
    return s.amplitudes.dot(detail::apply_parity(s.amplitudes, s.n_max)).real();
}

// +1 / -1 when the state is a parity eigenstate to within 0.5, else 0.
inline std::vector<int> parity_labels(const EigenSystem& es) {
    std::vector<int> out;
    out.reserve(es.states.size());
    for (const auto& s : es.states) {
        const double p = parity_expectation(s);
        out.push_back(p > 0.5 ? 1 : (p < -0.5 ? -1 : 0));
    }
    return out;
}

// Lowest k_levels eigenpairs of a Hermitian joint-space matrix. When a
// symmetry operator is supplied, degenerate clusters are rotated into its
// eigenbasis and ordered by descending symmetry eigenvalue.
inline EigenSystem diagonalize(const Matrix& h, int k_levels, const Matrix* symmetry = nullptr) {
    if (h.rows() != h.cols() || h.rows() % 2 != 0) {
        throw std::invalid_argument("diagonalize: expected a square joint-space matrix of even dimension");
    }
    if (!is_hermitian(h)) throw std::invalid_argument("diagonalize: matrix is not Hermitian");
    const Eigen::Index dim = h.rows();
    if (k_levels < 1 || k_levels > dim) {
        throw std::invalid_argument("diagonalize: k_levels must be in [1, " + std::to_string(dim) + "]");
    }

    Eigen::VectorXd evals;
    Matrix evecs;
    if (h.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.real());
        if (es.info() != Eigen::Success) throw NumericalError("diagonalize: eigensolver failed");
        evals = es.eigenvalues();
        evecs = es.eigenvectors().cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        if (es.info() != Eigen::Success) throw NumericalError("diagonalize: eigensolver failed");
        evals = es.eigenvalues();
        evecs = es.eigenvectors();
    }

    if (symmetry != nullptr) {
        const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
        Eigen::Index start = 0;
        while (start < dim) {
            Eigen::Index stop = start + 1;
            while (stop < dim && evals(stop) - evals(stop - 1) <= degeneracy_tolerance * scale) ++stop;
            const Eigen::Index size = stop - start;
            if (size > 1) {
                const Matrix block = evecs.middleCols(start, size);
                const Matrix sub = block.adjoint() * (*symmetry) * block;
                Eigen::SelfAdjointEigenSolver<Matrix> ss(0.5 * (sub + sub.adjoint()));
                // ascending symmetry eigenvalues; reverse to put +1 first
                const Matrix rotated = block * ss.eigenvectors().rowwise().reverse();
                evecs.middleCols(start, size) = rotated;
            }
            start = stop;
        }
    }

    const int n_max = static_cast<int>(dim / 2);
    EigenSystem out;
    out.energies = evals.head(k_levels);
    out.n_max_used = n_max;
    out.states.reserve(k_levels);
    for (int i = 0; i < k_levels; ++i) {
        Vector v = evecs.col(i);
        detail::fix_phase(v);
        out.states.emplace_back(std::move(v), n_max);
    }
    return out;
}

// Builds and diagonalizes the Rabi Hamiltonian, using parity for tie-breaking
// at epsilon = 0.
inline EigenSystem solve(const RabiParams& p, const FockSpace& space, int k_levels) {
    const Matrix h = build_hamiltonian(p, space);
    if (p.epsilon == 0.0) {
        const Matrix parity = parity_operator(space);
        return diagonalize(h, k_levels, &parity);
    }
    return diagonalize(h, k_levels);
}

namespace detail {

// Number of eigenvalues of the Rabi Hamiltonian below lambda. Ordered by
// photon number the matrix is block tridiagonal with 2x2 blocks
//   A_n = [[-eps/2 + w(n+1/2), -delta/2], [-delta/2, eps/2 + w(n+1/2)]],
//   B_n = g sqrt(n+1) sigma_z,
// and the inertia of its block LDL^T factors counts the eigenvalues.
inline int count_below(const RabiParams& p, int n_max, double lambda) {
    int count = 0;
    double da = 0.0, db = 0.0, dc = 0.0; // previous pivot block [[da, db], [db, dc]]
    for (int n = 0; n < n_max; ++n) {
        double a = -0.5 * p.epsilon + p.omega_o * (n + 0.5) - lambda;
        double c = 0.5 * p.epsilon + p.omega_o * (n + 0.5) - lambda;
        double b = -0.5 * p.delta;
        if (n > 0) {
            // subtract B D^-1 B with B = g sqrt(n) sigma_z
            double det = da * dc - db * db;
            if (det == 0.0) det = std::numeric_limits<double>::min();
            const double g2 = p.g * p.g * n;
            a -= g2 * dc / det;
            c -= g2 * da / det;
            b -= g2 * db / det; // sigma_z flips the sign of the off-diagonal twice
        }
        const double det = a * c - b * b;
        if (det < 0.0) count += 1;
        else if (a + c < 0.0) count += 2;
        da = a;
        db = b;
        dc = c;
    }
    return count;
}

} // namespace detail

// Lowest k_levels energies only, by bisection on the eigenvalue count; far
// cheaper than a dense solve when eigenvectors are not needed.
inline Eigen::VectorXd lowest_energies(const RabiParams& p, int n_max, int k_levels) {
    if (n_max < 2) throw std::invalid_argument("lowest_energies: n_max must be >= 2");
    if (k_levels < 1 || k_levels > 2 * n_max) throw std::invalid_argument("lowest_energies: bad k_levels");
    // Gershgorin bounds
    const double coupling = 2.0 * p.g * std::sqrt(static_cast<double>(n_max)) + 0.5 * std::abs(p.delta);
    const double lo = -0.5 * std::abs(p.epsilon) + 0.5 * p.omega_o - coupling;
    const double hi = 0.5 * std::abs(p.epsilon) + p.omega_o * (n_max - 0.5) + coupling;
    Eigen::VectorXd out(k_levels);
    double floor = lo;
    for (int i = 0; i < k_levels; ++i) {
        double a = floor, b = hi;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            if (detail::count_below(p, n_max, mid) > i) b = mid;
            else a = mid;
        }
        out(i) = 0.5 * (a + b);
        floor = a;
    }
    return out;
}

struct TruncationOptions {
    double rel_tol = 1e-9;
    int n_start = 30;
    int n_limit = 2000;
};

// Doubles n_max until the k_levels lowest energies change by less than
// rel_tol relative to their magnitude scale. The result carries the larger
// of the two compared truncations.
inline EigenSystem adaptive_truncation(const RabiParams& p, int k_levels, const TruncationOptions& opt = {}) {
    if (!(opt.rel_tol > 0.0)) throw std::invalid_argument("adaptive_truncation: rel_tol must be > 0");
    if (opt.n_start < 2) throw std::invalid_argument("adaptive_truncation: n_start must be >= 2");
    int n = std::max(opt.n_start, (k_levels + 1) / 2 + 1);
    EigenSystem prev = solve(p, FockSpace(n), k_levels);
    for (;;) {
        const int next = 2 * n;
        if (next > opt.n_limit) {
            prev.converged = false;
            warn("adaptive_truncation: budget exceeded at n_max = " + std::to_string(n) +
                 ", residual " + std::to_string(prev.convergence_residual));
            return prev;
        }
        EigenSystem cur = solve(p, FockSpace(next), k_levels);
        const double scale = std::max(cur.energies.cwiseAbs().maxCoeff(), 1e-300);
        const double change = (cur.energies - prev.energies).cwiseAbs().maxCoeff() / scale;
        cur.convergence_residual = change;
        if (change < opt.rel_tol) {
            cur.converged = true;
            return cur;
        }
        cur.converged = false;
        prev = std::move(cur);
        n = next;
    }
}

inline TransitionTable transition_table(const EigenSystem& es, const std::vector<LevelPair>& pairs,
                                        double forbidden_threshold = default_forbidden_threshold) {
    TransitionTable table;
    table.entries.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        if (i < 0 || j < 0 || i >= es.levels() || j >= es.levels()) {
            throw std::out_of_range("transition_table: level index (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") outside the " + std::to_string(es.levels()) +
                                    " computed levels");
        }
        Transition tr;
        tr.i = i;
        tr.j = j;
        tr.omega = es.energies(j) - es.energies(i);
        const Vector xj = detail::apply_field_quadrature(es.states[j].amplitudes, es.n_max_used);
        tr.t = es.states[i].amplitudes.dot(xj);
        tr.allowed = std::abs(tr.t) > forbidden_threshold;
        table.entries.push_back(tr);
    }
    return table;
}

inline int levels_needed(const std::vector<LevelPair>& pairs) {
    int k = 1;
    for (const auto& [i, j] : pairs) k = std::max({k, i + 1, j + 1});
    return k;
}

struct SweepOptions {
    TruncationOptions truncation{};
    int fixed_n_max = 0; // > 0 skips the adaptive choice
    double forbidden_threshold = default_forbidden_threshold;
    std::size_t workers = 0;
};

// Per-epsilon transition tables, all at one truncation: the largest that
// adaptive truncation picks anywhere on the sweep.
inline BiasSweep bias_sweep(const RabiParams& tmpl, const std::vector<double>& epsilons,
                            const std::vector<LevelPair>& pairs, const SweepOptions& opt = {}) {
    tmpl.validate();
    BiasSweep sweep;
    sweep.epsilons = epsilons;
    sweep.params = tmpl;
    const int k = levels_needed(pairs) + 1;
    const std::size_t count = epsilons.size();

    int n_max = opt.fixed_n_max;
    if (n_max <= 0) {
        std::vector<int> chosen(count, 0);
        std::vector<char> ok(count, 1);
        detail::parallel_for(count, [&](std::size_t idx) {
            const EigenSystem es = adaptive_truncation(tmpl.with_epsilon(epsilons[idx]), k, opt.truncation);
            chosen[idx] = es.n_max_used;
            ok[idx] = es.converged ? 1 : 0;
        }, opt.workers);
        n_max = count == 0 ? opt.truncation.n_start : *std::max_element(chosen.begin(), chosen.end());
        sweep.converged = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
    }
    sweep.n_max_used = n_max;

    sweep.tables.resize(count);
    const FockSpace space(n_max);
    detail::parallel_for(count, [&](std::size_t idx) {
        const EigenSystem es = solve(tmpl.with_epsilon(epsilons[idx]), space, k);
        TransitionTable t = transition_table(es, pairs, opt.forbidden_threshold);
        t.epsilon = epsilons[idx];
        sweep.tables[idx] = std::move(t);
    }, opt.workers);
    return sweep;
}

inline std::vector<double> linspace(double lo, double hi, int steps) {
    if (steps < 1) throw std::invalid_argument("linspace: steps must be >= 1");
    std::vector<double> out(steps);
    if (steps == 1) {
        out[0] = lo;
        return out;
    }
    for (int i = 0; i < steps; ++i) out[i] = lo + (hi - lo) * i / (steps - 1);
    return out;
}

struct CrossingOptions {
    int level = 2;         // the lower of the two crossing levels
    double g_tol = 1e-6;   // GHz
    int n_max = 0;         // 0 = adaptive at the upper end of the range
};

// Coupling at which level `level` changes parity at epsilon = 0, found by
// bisection. At epsilon = 0 the crossing between levels 2 and 3 is exact,
// so the parity label flips discontinuously there.
inline double find_level_crossing(const RabiParams& p, double g_lo, double g_hi, const CrossingOptions& opt = {}) {
    if (p.epsilon != 0.0) throw std::invalid_argument("find_level_crossing: requires epsilon = 0");
    if (!(g_hi > g_lo) || g_lo < 0.0) throw std::invalid_argument("find_level_crossing: need 0 <= g_lo < g_hi");
    const int k = opt.level + 2;
    int n_max = opt.n_max;
    if (n_max <= 0) n_max = adaptive_truncation(p.with_g(g_hi), k).n_max_used;
    const FockSpace space(n_max);
    auto label = [&](double g) {
        const EigenSystem es = solve(p.with_g(g), space, k);
        return parity_expectation(es.states[opt.level]) > 0.0 ? 1 : -1;
    };
    int lo_label = label(g_lo);
    const int hi_label = label(g_hi);
    if (lo_label == hi_label) {
        throw std::domain_error("find_level_crossing: no parity exchange of level " + std::to_string(opt.level) +
                                " in g range [" + std::to_string(g_lo) + ", " + std::to_string(g_hi) + "]");
    }
    while (g_hi - g_lo > opt.g_tol) {
        const double mid = 0.5 * (g_lo + g_hi);
        if (label(mid) == lo_label) {
            g_lo = mid;
        } else {
            g_hi = mid;
        }
    }
    return 0.5 * (g_lo + g_hi);
}

} // namespace dsc
