#include <gtest/gtest.h>

#include <array>

#include "dsc/circuit.hpp"
#include "dsc/spectrum.hpp"
#include "dsc/states.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace dsc;
using namespace dsc::circuit;

namespace {

const CouplerCircuit circuit_one{};

Eigen::Vector3d as_vec(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

double single_junction_inductance(double i_c_na, double phi) {
    return 2.067834e-15 / (2.0 * std::numbers::pi * i_c_na * 1e-9 * std::cos(phi)) * 1e12;
}

} // namespace

TEST(CouplerRatio, Values) {
    EXPECT_NEAR(coupler_ratio(CouplerKind::four_junction, 0.0), 4.0, 1e-15);
    EXPECT_NEAR(coupler_ratio(CouplerKind::four_junction, 0.25), 0.0, 1e-15);
    EXPECT_NEAR(coupler_ratio(CouplerKind::squid, 1.0 / 3.0), 1.0, 1e-15);
    EXPECT_NEAR(coupler_ratio(circuit_one, 0.5), coupler_ratio(CouplerKind::four_junction, 0.5 / 24.0), 1e-15);
}

TEST(CouplerRatio, FluxoidChainCurrent) {
    // four junctions with phi_b = phi_a + 2 pi n, phi_c = phi_a + 4 pi n, phi_d = phi_a + 6 pi n
    prop::for_all(50, 61, [](prop::Gen& gen, int) {
        const double phi_a = gen.uniform(-std::numbers::pi, std::numbers::pi), n = gen.uniform(-0.5, 0.5);
        double sum = 0.0;
        for (int k = 0; k < 4; ++k) sum += std::sin(phi_a + 2.0 * std::numbers::pi * k * n);
        const double closed = coupler_ratio(CouplerKind::four_junction, n) * std::sin(phi_a + 3.0 * std::numbers::pi * n);
        EXPECT_NEAR(sum, closed, 1e-12);
    });
}

TEST(CouplerInductance, Values) {
    EXPECT_NEAR(coupler_inductance(460.0, 0.0), 2.067834e-15 / (2.0 * std::numbers::pi * 460e-9) * 1e12, 1e-9);
    EXPECT_NEAR(coupler_inductance(460.0, 0.0), 715.0, 1.0);
    EXPECT_EQ(coupler_inductance(460.0, 123.0), coupler_inductance(460.0, -123.0));
    EXPECT_GT(coupler_inductance(460.0, 459.9), 10.0 * coupler_inductance(460.0, 0.0));
    EXPECT_THROW(coupler_inductance(460.0, 460.0), std::domain_error);
}

TEST(JosephsonEnergy, ZeroPhases) {
    const double e = total_josephson_energy(circuit_one, {0.0, 0.0, 0.0}, 0.0, 0.0);
    EXPECT_NEAR(e, -(2.0 + circuit_one.a3 + coupler_ratio(circuit_one, 0.0)), 1e-14);
}

TEST(JosephsonEnergy, PeriodicInPhases) {
    prop::for_all(20, 62, [](prop::Gen& gen, int) {
        const std::array<double, 3> phi{gen.uniform(-3, 3), gen.uniform(-3, 3), gen.uniform(-3, 3)};
        const double n = gen.uniform(0.45, 0.55);
        const double e = total_josephson_energy(circuit_one, phi, n, 0.0);
        for (int k = 0; k < 3; ++k) {
            std::array<double, 3> shifted = phi;
            shifted[k] += 2.0 * std::numbers::pi;
            EXPECT_NEAR(total_josephson_energy(circuit_one, shifted, n, 0.0), e, 1e-12);
        }
    });
}

TEST(PersistentStates, StationaryAndStable) {
    prop::for_all(10, 63, [](prop::Gen& gen, int) {
        const double n = gen.uniform(0.46, 0.54);
        const PersistentStates ps = find_persistent_states(circuit_one, n);
        for (const PhaseConfig& cfg : {ps.left, ps.right}) {
            auto f = [&](const Eigen::Vector3d& x) { return total_josephson_energy(circuit_one, {x(0), x(1), x(2)}, n, 0.0); };
            EXPECT_LT(oracle::numeric_gradient(f, as_vec(cfg.phi)).norm(), 1e-8);
            // positive-definite Hessian from second differences
            const double h = 1e-4;
            Eigen::Matrix3d hess;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    Eigen::Vector3d pp = as_vec(cfg.phi), pm = pp, mp = pp, mm = pp;
                    pp(i) += h; pp(j) += h;
                    pm(i) += h; pm(j) -= h;
                    mp(i) -= h; mp(j) += h;
                    mm(i) -= h; mm(j) -= h;
                    hess(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
                }
            EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(hess).eigenvalues().minCoeff(), 0.0);
        }
        EXPECT_EQ(ps.left.branch, Branch::L);
        EXPECT_EQ(ps.right.branch, Branch::R);
    });
}

TEST(PersistentStates, SymmetricAtDegeneracy) {
    const PersistentStates ps = find_persistent_states(circuit_one, 0.5);
    EXPECT_NEAR(ps.left.energy, ps.right.energy, 1e-12);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(ps.left.phi[i], -ps.right.phi[i], 1e-9);
}

TEST(PersistentStates, EnergiesCrossLinearly) {
    std::vector<double> n_values, diff;
    for (double n = 0.48; n <= 0.52 + 1e-12; n += 0.005) {
        const PersistentStates ps = find_persistent_states(circuit_one, n);
        n_values.push_back(n);
        diff.push_back(ps.left.energy - ps.right.energy);
    }
    // sign change at the degeneracy point, nearly constant slope
    EXPECT_LT(diff.front() * diff.back(), 0.0);
    const double s_lo = (diff[1] - diff[0]) / (n_values[1] - n_values[0]);
    const double s_hi = (diff.back() - diff[diff.size() - 2]) / (n_values.back() - n_values[n_values.size() - 2]);
    EXPECT_NEAR(s_lo / s_hi, 1.0, 0.05);
}

TEST(PersistentStates, PhasesVarySmoothly) {
    std::array<double, 3> prev{};
    bool first = true;
    for (double n = 0.46; n <= 0.54 + 1e-12; n += 0.0025) {
        const PersistentStates ps = find_persistent_states(circuit_one, n);
        if (!first)
            for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs(ps.left.phi[i] - prev[i]), 0.05) << n;
        prev = ps.left.phi;
        first = false;
    }
}

TEST(PersistentStates, OutsideWindow) {
    EXPECT_THROW(find_persistent_states(circuit_one, 0.6), std::domain_error);
}

TEST(Inductances, ZeroPhaseClosedForm) {
    PhaseConfig cfg;
    cfg.n_phi_q = 0.0;
    const double l1 = single_junction_inductance(460.0, 0.0);
    const double l3 = single_junction_inductance(0.705 * 460.0, 0.0);
    const double l4 = single_junction_inductance(4.0 * 460.0, 0.0);
    const double series = 2.0 * l1 + l3;
    EXPECT_NEAR(qubit_coupler_inductance(circuit_one, cfg), l4 * series / (series + l4), 1e-9);
    EXPECT_NEAR(coupler_junction_inductance(circuit_one, cfg), l4, 1e-9);
}

TEST(Inductances, ParallelCombinationBelowCouplerJunction) {
    // holds while every series junction keeps cos(phi) > 0
    for (double n = 0.48; n <= 0.52 + 1e-12; n += 0.005) {
        const PersistentStates ps = find_persistent_states(circuit_one, n);
        for (const PhaseConfig& cfg : {ps.left, ps.right})
            EXPECT_LT(qubit_coupler_inductance(circuit_one, cfg), coupler_junction_inductance(circuit_one, cfg));
    }
}

TEST(Inductances, EqualBranchesAtDegeneracy) {
    const PersistentStates ps = find_persistent_states(circuit_one, 0.5);
    EXPECT_NEAR(qubit_coupler_inductance(circuit_one, ps.left), qubit_coupler_inductance(circuit_one, ps.right), 1e-6);
}

TEST(Inductances, ApproximatelyLinearWithMirroredSlopes) {
    std::array<double, 2> slopes{};
    for (Branch b : {Branch::L, Branch::R}) {
        std::vector<double> l;
        const std::vector<double> n_values = linspace(0.48, 0.52, 5);
        for (double n : n_values) {
            const PersistentStates ps = find_persistent_states(circuit_one, n);
            l.push_back(qubit_coupler_inductance(circuit_one, b == Branch::L ? ps.left : ps.right));
        }
        const double slope = (l.back() - l.front()) / (n_values.back() - n_values.front());
        slopes[b == Branch::L ? 0 : 1] = slope;
        // the midpoint sits near the chord
        EXPECT_NEAR(l[2], 0.5 * (l.front() + l.back()), 0.15 * std::abs(l.back() - l.front()));
    }
    EXPECT_LT(slopes[0], 0.0);
    EXPECT_GT(slopes[1], 0.0);
    EXPECT_NEAR(slopes[0], -slopes[1], 0.25 * std::abs(slopes[0]));
}

TEST(EigenbasisInductances, Limits) {
    const auto [g, e] = eigenbasis_inductances(100.0, 200.0, std::numbers::pi / 2);
    EXPECT_NEAR(g, 150.0, 1e-12);
    EXPECT_NEAR(e, 150.0, 1e-12);
    const auto [g0, e0] = eigenbasis_inductances(100.0, 200.0, 0.0);
    EXPECT_EQ(g0, 100.0);
    EXPECT_EQ(e0, 200.0);
}

TEST(EigenbasisInductances, TracePreserving) {
    prop::for_all(100, 64, [](prop::Gen& gen, int) {
        const double l = gen.uniform(10, 600), r = gen.uniform(10, 600), th = gen.uniform(0, std::numbers::pi);
        const auto [g, e] = eigenbasis_inductances(l, r, th);
        EXPECT_NEAR(g + e, l + r, 1e-12 * (l + r));
    });
}

TEST(EigenbasisInductances, LambdaAndVShapes) {
    // L_L > L_R for eps > 0 on this sweep; the ground-state mix peaks at eps = 0
    const double delta = 0.5;
    std::vector<double> lg, le;
    for (double eps : linspace(-2.0, 2.0, 9)) {
        const double l_l = 300.0 - 20.0 * eps, l_r = 300.0 + 20.0 * eps;
        const auto [g, e] = eigenbasis_inductances(l_l, l_r, dsc::qubit_mixing_angle(delta, eps));
        lg.push_back(g);
        le.push_back(e);
    }
    for (int k = 0; k < 4; ++k) {
        EXPECT_LT(lg[k], lg[k + 1]);
        EXPECT_LT(lg[k + 5], lg[k + 4]);
        EXPECT_GT(le[k + 5], le[k + 4]);
        EXPECT_GT(le[k], le[k + 1]);
    }
    EXPECT_GT(lg[4], lg[0]);
    EXPECT_GT(lg[4], lg[8]);
    EXPECT_LT(le[4], le[0]);
    EXPECT_LT(le[4], le[8]);
}

TEST(MutualInductance, CloseToCouplerInductanceAndBalanced) {
    for (double n : {0.47, 0.5, 0.53}) {
        const MutualInductance m = mutual_inductance(circuit_one, n);
        const PersistentStates ps = find_persistent_states(circuit_one, n);
        const double l_c = 0.5 * (coupler_junction_inductance(circuit_one, ps.left) +
                                  coupler_junction_inductance(circuit_one, ps.right));
        EXPECT_NEAR(m.mean() / l_c, 1.0, 0.05) << n;
        EXPECT_LT(m.relative_branch_difference(), 0.01) << n;
    }
}

TEST(MutualInductance, ConvergedInStepSize) {
    const MutualInductance a = mutual_inductance(circuit_one, 0.49, 10.0);
    const MutualInductance b = mutual_inductance(circuit_one, 0.49, 5.0);
    EXPECT_LT(std::abs(a.mean() - b.mean()) / a.mean(), 0.005);
    EXPECT_THROW(mutual_inductance(circuit_one, 0.49, 0.0), std::invalid_argument);
}

TEST(MutualInductance, ContinuousAcrossWindow) {
    double prev_m = 0.0, prev_l = 0.0;
    for (double n = 0.46; n <= 0.54 + 1e-12; n += 0.005) {
        const double m = mutual_inductance(circuit_one, n).mean();
        const double l = qubit_coupler_inductance(circuit_one, find_persistent_states(circuit_one, n).left);
        if (prev_m > 0.0) {
            EXPECT_LT(std::abs(m - prev_m) / prev_m, 0.02) << n;
            EXPECT_LT(std::abs(l - prev_l) / prev_l, 0.02) << n;
        }
        prev_m = m;
        prev_l = l;
    }
}

TEST(OscillatorFrequency, Scaling) {
    const double f = oscillator_frequency(500.0, 100.0, 1000.0);
    EXPECT_NEAR(f, 1.0 / (2.0 * std::numbers::pi * std::sqrt(600e-12 * 1000e-15)) / 1e9, 1e-12);
    EXPECT_NEAR(oscillator_frequency(500.0, 100.0, 2000.0), f / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(oscillator_frequency(0.0, 600.0, 1000.0), f, 1e-12);
    EXPECT_THROW(oscillator_frequency(500.0, 100.0, 0.0), std::invalid_argument);
}

TEST(OscillatorFrequency, VShapedInGroundState) {
    // the ground-state inductance is Lambda-shaped in eps, so the frequency is V-shaped
    std::vector<double> f;
    for (double eps : linspace(-2.0, 2.0, 9)) {
        const auto [g, e] = eigenbasis_inductances(300.0 - 20.0 * eps, 300.0 + 20.0 * eps, dsc::qubit_mixing_angle(0.5, eps));
        f.push_back(oscillator_frequency(400.0, g, 800.0));
    }
    EXPECT_LT(f[4], f[0]);
    EXPECT_LT(f[4], f[8]);
    for (int k = 0; k < 4; ++k) EXPECT_GT(f[k], f[k + 1]);
}

TEST(ZeroPointCurrent, Scaling) {
    const double i = zero_point_current(500.0, 100.0, 6.0);
    EXPECT_NEAR(zero_point_current(1100.0, 100.0, 6.0), i / std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(zero_point_current(500.0, 100.0, 12.0), i * std::sqrt(2.0), 1e-9);
    EXPECT_GT(i, 10.0);
    EXPECT_LT(i, 100.0);
    EXPECT_THROW(zero_point_current(500.0, 100.0, 0.0), std::invalid_argument);
}

TEST(EpsilonFromFlux, LinearAboutDegeneracy) {
    EXPECT_EQ(epsilon_from_flux(0.5, 300.0), 0.0);
    EXPECT_NEAR(epsilon_from_flux(0.51, 300.0), -epsilon_from_flux(0.49, 300.0), 1e-9);
    EXPECT_NEAR(epsilon_from_flux(0.51, 300.0), 2.0 * 300e-9 * 2.067834e-15 * 0.01 / 6.62607015e-34 / 1e9, 1e-9);
}

TEST(CouplerSweep, DeterministicAcrossWorkers) {
    const std::vector<double> n = linspace(0.47, 0.53, 4);
    const auto a = coupler_sweep(circuit_one, n, 10.0, 1);
    const auto b = coupler_sweep(circuit_one, n, 10.0, 3);
    for (std::size_t k = 0; k < n.size(); ++k) {
        EXPECT_EQ(a[k].inductances.m.left, b[k].inductances.m.left);
        EXPECT_EQ(a[k].inductances.l_qc_g, b[k].inductances.l_qc_g);
    }
}
