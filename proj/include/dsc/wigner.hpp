// wigner.hpp - Wigner function of an oscillator density matrix on a grid
//
// W(beta) = (2/pi) tr[rho D(beta) P D(beta)^dagger], P = (-1)^{a^dagger a}.
// D(x + iy) equals D(x) D(iy) up to a phase that cancels, so with
// A_x = D(x)^dagger rho D(x) and B_y = D(iy) P D(iy)^dagger every grid point
// is the O(n^2) contraction tr[A_x B_y].

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsc/detail/parallel.hpp"
#include "dsc/entanglement.hpp"
#include "dsc/fock.hpp"

namespace dsc {

struct WignerGridSpec {
    double re_min = -4.0, re_max = 4.0;
    double im_min = -4.0, im_max = 4.0;
    int re_points = 101, im_points = 101;
    bool require_containment = true; // reject grids that miss > 1% of the mass
};

struct WignerGrid {
    std::vector<double> re_alpha;
    std::vector<double> im_alpha;
    Eigen::MatrixXd values; // values(i_re, i_im)
    double cell_area = 0.0;

    double integral() const { return values.sum() * cell_area; }
};

namespace detail {

// Smallest Fock cutoff holding all but 1e-14 of the population.
inline int effective_support(const Matrix& rho) {
    const Eigen::Index n = rho.rows();
    double tail = 0.0;
    for (Eigen::Index k = n - 1; k >= 0; --k) {
        tail += std::abs(rho(k, k).real());
        if (tail > 1e-14) return static_cast<int>(std::min<Eigen::Index>(n, k + 2));
    }
    return 1;
}

class DisplacedParity {
public:
    DisplacedParity(const Matrix& rho, double radius) {
        support_ = std::max(2, effective_support(rho));
        const double pad = radius + std::sqrt(static_cast<double>(support_)) + 4.0;
        work_ = std::max(support_ + 2, static_cast<int>(std::ceil(pad * pad)));
        rho_ = rho.topLeftCorner(support_, support_);
        const FockSpace space(work_);
        const Matrix a = annihilation(space);
        shift_re_.compute(cplx(0.0, 1.0) * (a.adjoint() - a));
        shift_im_.compute(a + a.adjoint());
        parity_ = oscillator_parity(space).diagonal().real();
    }

    // D(x)^dagger rho D(x) on the working space.
    Matrix shifted_state(double x) const {
        const Matrix d = exp_from(shift_re_, x); // D(x) = exp(-i x K), K = i(a^dagger - a)
        const Matrix top = d.topRows(support_);   // <m|D(x)|k>, m < support
        return top.adjoint() * rho_ * top;
    }

    // D(iy) P D(iy)^dagger on the working space.
    Matrix shifted_parity(double y) const {
        const Matrix d = exp_from(shift_im_, -y); // D(iy) = exp(i y (a + a^dagger))
        return d * parity_.asDiagonal() * d.adjoint();
    }

    static double contract(const Matrix& shifted_state, const Matrix& shifted_parity) {
        // tr[A B] = sum_ij A_ij B_ji
        return (shifted_state.cwiseProduct(shifted_parity.transpose())).sum().real() * 2.0 / std::numbers::pi;
    }

    int working_dimension() const { return work_; }

private:
    static Matrix exp_from(const Eigen::SelfAdjointEigenSolver<Matrix>& es, double t) {
        const Eigen::VectorXd& lam = es.eigenvalues();
        Vector phase(lam.size());
        for (Eigen::Index i = 0; i < lam.size(); ++i) phase(i) = std::exp(cplx(0.0, -t * lam(i)));
        return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
    }

    int support_ = 0;
    int work_ = 0;
    Matrix rho_;
    Eigen::SelfAdjointEigenSolver<Matrix> shift_re_;
    Eigen::SelfAdjointEigenSolver<Matrix> shift_im_;
    Eigen::VectorXd parity_;
};

inline void check_oscillator_state(const DensityMatrix& rho, const char* who) {
    if (rho.basis != Subsystem::oscillator || rho.matrix.rows() != rho.matrix.cols()) {
        throw std::invalid_argument(std::string(who) + ": expected an oscillator density matrix");
    }
    if (std::abs(rho.trace() - 1.0) > 1e-8) {
        throw std::invalid_argument(std::string(who) + ": density matrix trace is " + std::to_string(rho.trace()));
    }
}

} // namespace detail

inline WignerGrid wigner(const DensityMatrix& rho, const WignerGridSpec& spec = {}, std::size_t workers = 0) {
    detail::check_oscillator_state(rho, "wigner");
    if (spec.re_points < 2 || spec.im_points < 2 || !(spec.re_max > spec.re_min) || !(spec.im_max > spec.im_min)) {
        throw std::invalid_argument("wigner: grid needs >= 2 points per axis and a positive extent");
    }
    WignerGrid grid;
    grid.re_alpha = linspace(spec.re_min, spec.re_max, spec.re_points);
    grid.im_alpha = linspace(spec.im_min, spec.im_max, spec.im_points);
    const double dx = (spec.re_max - spec.re_min) / (spec.re_points - 1);
    const double dy = (spec.im_max - spec.im_min) / (spec.im_points - 1);
    grid.cell_area = dx * dy;

    const double radius = std::hypot(std::max(std::abs(spec.re_min), std::abs(spec.re_max)),
                                     std::max(std::abs(spec.im_min), std::abs(spec.im_max)));
    const detail::DisplacedParity dp(rho.matrix, radius);

    std::vector<Matrix> parities(grid.im_alpha.size());
    detail::parallel_for(parities.size(), [&](std::size_t j) { parities[j] = dp.shifted_parity(grid.im_alpha[j]); },
                         workers);

    grid.values.resize(spec.re_points, spec.im_points);
    detail::parallel_for(grid.re_alpha.size(), [&](std::size_t i) {
        const Matrix shifted = dp.shifted_state(grid.re_alpha[i]);
        for (std::size_t j = 0; j < parities.size(); ++j)
            grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                detail::DisplacedParity::contract(shifted, parities[j]);
    }, workers);

    if (spec.require_containment) {
        const double outside = 1.0 - grid.integral();
        if (std::abs(outside) > 0.01) {
            throw std::domain_error("wigner: grid too small, boundary mass " + std::to_string(outside) + " > 1%");
        }
    }
    return grid;
}

// Single-point evaluation.
inline double wigner_at(const DensityMatrix& rho, cplx beta) {
    detail::check_oscillator_state(rho, "wigner_at");
    const detail::DisplacedParity dp(rho.matrix, std::abs(beta));
    return detail::DisplacedParity::contract(dp.shifted_state(beta.real()), dp.shifted_parity(beta.imag()));
}

} // namespace dsc
