// levenberg_marquardt.hpp - dense Levenberg-Marquardt with a finite-difference Jacobian

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsc::detail {

struct LmOptions {
    int max_iterations = 100;
    double gradient_tol = 1e-12;
    double step_tol = 1e-10;   // relative parameter change
    double cost_tol = 1e-14;   // relative cost decrease
    double initial_lambda = 1e-3;
    double fd_relative_step = 1e-6;
};

struct LmResult {
    Eigen::VectorXd x;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd jacobian;
    double cost = 0.0; // 0.5 * |r|^2
    int iterations = 0;
    bool converged = false;
};

template <class ResidualFn>
Eigen::MatrixXd numeric_jacobian(ResidualFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& r0,
                                 double rel_step) {
    Eigen::MatrixXd jac(r0.size(), x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        Eigen::VectorXd xp = x;
        const double h = rel_step * std::max(std::abs(x(k)), 1.0);
        xp(k) += h;
        jac.col(k) = (f(xp) - r0) / h;
    }
    return jac;
}

// Minimizes 0.5 |f(x)|^2. f maps Eigen::VectorXd -> Eigen::VectorXd of fixed length.
template <class ResidualFn>
LmResult levenberg_marquardt(ResidualFn f, Eigen::VectorXd x, const LmOptions& opt = {}) {
    LmResult out;
    Eigen::VectorXd r = f(x);
    double cost = 0.5 * r.squaredNorm();
    double lambda = opt.initial_lambda;
    Eigen::MatrixXd jac = numeric_jacobian(f, x, r, opt.fd_relative_step);

    for (int it = 0; it < opt.max_iterations; ++it) {
        out.iterations = it + 1;
        const Eigen::VectorXd grad = jac.transpose() * r;
        if (grad.cwiseAbs().maxCoeff() < opt.gradient_tol || cost == 0.0) {
            out.converged = true;
            break;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd damping = jtj.diagonal().cwiseMax(1e-9 * std::max(jtj.diagonal().maxCoeff(), 1e-300));
        bool improved = false;
        for (int attempt = 0; attempt < 30; ++attempt) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * damping;
            const Eigen::VectorXd step = a.ldlt().solve(-grad);
            const Eigen::VectorXd trial = x + step;
            const Eigen::VectorXd r_trial = f(trial);
            const double cost_trial = 0.5 * r_trial.squaredNorm();
            if (std::isfinite(cost_trial) && cost_trial < cost) {
                const double rel_drop = (cost - cost_trial) / std::max(cost, std::numeric_limits<double>::min());
                const double rel_step = step.norm() / std::max(x.norm(), 1e-300);
                x = trial;
                r = r_trial;
                cost = cost_trial;
                lambda = std::max(lambda / 3.0, 1e-12);
                improved = true;
                if (rel_step < opt.step_tol || rel_drop < opt.cost_tol) out.converged = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!improved) {
            // no downhill step at any damping: x is a local minimum to working precision
            out.converged = true;
            break;
        }
        jac = numeric_jacobian(f, x, r, opt.fd_relative_step);
        if (out.converged) break;
    }
    out.x = x;
    out.residuals = r;
    out.jacobian = jac;
    out.cost = cost;
    return out;
}

} // namespace dsc::detail
