#include <gtest/gtest.h>

#include "dsc/presets.hpp"
#include "dsc/spectrum.hpp"
#include "dsc/states.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace dsc;

TEST(CatSpec, TableRows) {
    const CatStateSpec l0 = cat_spec_for_level(0, 1.0, false);
    const CatStateSpec l3 = cat_spec_for_level(3, 1.0, false);
    EXPECT_EQ(l0.fock_n, 0);
    EXPECT_EQ(l0.sign, 1);
    EXPECT_EQ(cat_spec_for_level(1, 1.0, false).sign, -1);
    EXPECT_EQ(cat_spec_for_level(2, 1.0, false).sign, 1);
    EXPECT_EQ(l3.fock_n, 1);
    EXPECT_EQ(l3.sign, -1);
    EXPECT_EQ(cat_spec_for_level(2, 1.0, true).sign, -1);
    EXPECT_EQ(cat_spec_for_level(3, 1.0, true).sign, 1);
    EXPECT_THROW(cat_spec_for_level(4, 1.0, false), std::out_of_range);
}

TEST(CatState, ZeroDisplacementIsQubitGroundTimesVacuum) {
    const FockSpace space(10);
    const JointState s = cat_state(cat_spec_for_level(0, 0.0, false), space);
    const JointState ref = product_state(qubit_eigenstates(1.0, 0.0).first, fock_vector(space, 0));
    EXPECT_NEAR(fidelity(s, ref), 1.0, 1e-14);
    EXPECT_NEAR(s.amplitude(0, 0).real(), 1.0 / std::sqrt(2.0), 1e-14);
}

TEST(CatState, MatchesCoherentAmplitudes) {
    const int n = 60;
    const double alpha = 1.2;
    const JointState s = cat_state(cat_spec_for_level(0, alpha, false), FockSpace(n));
    const Eigen::VectorXcd left = oracle::coherent(-alpha, n), right = oracle::coherent(alpha, n);
    const double norm = std::sqrt(2.0);
    for (int k = 0; k < 20; ++k) {
        EXPECT_LT(std::abs(s.amplitude(0, k) - left(k) / norm), 1e-10);
        EXPECT_LT(std::abs(s.amplitude(1, k) - right(k) / norm), 1e-10);
    }
}

TEST(CatState, LowestPairOrthogonal) {
    prop::for_all(10, 31, [](prop::Gen& gen, int) {
        const double alpha = gen.uniform(0.0, 2.5);
        const FockSpace space(80);
        const JointState a = cat_state(cat_spec_for_level(0, alpha, false), space);
        const JointState b = cat_state(cat_spec_for_level(1, alpha, false), space);
        EXPECT_LT(fidelity(a, b), 1e-20);
    });
}

TEST(CatState, UnitNorm) {
    prop::for_all(15, 32, [](prop::Gen& gen, int) {
        const int level = gen.integer(0, 3);
        const JointState s = cat_state(cat_spec_for_level(level, gen.uniform(0.0, 3.0), gen.integer(0, 1) == 1), FockSpace(100));
        EXPECT_NEAR(s.norm(), 1.0, 1e-10);
    });
}

TEST(CatState, ParityStructure) {
    prop::for_all(10, 33, [](prop::Gen& gen, int) {
        const CatStateSpec spec = cat_spec_for_level(gen.integer(0, 3), gen.uniform(1.5, 3.0), false);
        const FockSpace space(100);
        const JointState s = cat_state(spec, space);
        const Vector mapped = parity_operator(space) * s.amplitudes;
        const double expected = spec.sign * (spec.fock_n % 2 == 0 ? 1.0 : -1.0);
        EXPECT_LT((mapped - expected * s.amplitudes).norm(), 1e-10);
    });
}

TEST(CatState, BranchOverlapCircuitTwo) {
    const FockSpace space(60);
    const Vector l = displacement(space, -1.335).col(0), r = displacement(space, 1.335).col(0);
    EXPECT_NEAR(std::abs(l.dot(r)), 0.028, 5e-4);
    EXPECT_NEAR(std::abs(coherent_overlap(-1.335, 1.335)), 0.028, 5e-4);
}

TEST(CatState, Errors) {
    EXPECT_THROW(cat_state({0, 1.0, 5, 1}, FockSpace(4)), std::out_of_range);
    EXPECT_THROW(cat_state({0, 1.0, 0, 2}, FockSpace(4)), std::invalid_argument);
}

TEST(DisplacementEstimate, TableValues) {
    EXPECT_NEAR(displacement_estimate(preset("II_m0p5").params), 1.34, 0.005);
    EXPECT_NEAR(displacement_estimate(preset("I_m0p5").params), 0.72, 0.005);
    EXPECT_EQ(displacement_estimate({1.0, 5.0, 0.0, 0.0}), 0.0);
    for (const auto& pr : presets) EXPECT_NEAR(displacement_estimate(pr.params), pr.alpha_listed, 0.005) << pr.id;
}

TEST(Fidelity, BasicProperties) {
    prop::for_all(10, 34, [](prop::Gen& gen, int) {
        const int n = gen.integer(2, 20);
        const JointState a(gen.unit_vector(2 * n), n), b(gen.unit_vector(2 * n), n);
        EXPECT_NEAR(fidelity(a, a), 1.0, 1e-12);
        const double f = fidelity(a, b);
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0 + 1e-12);
        EXPECT_NEAR(f, fidelity(b, a), 1e-14);
    });
    EXPECT_THROW(fidelity(JointState(Vector::Ones(4), 2), JointState(Vector::Ones(6), 3)), std::invalid_argument);
}

TEST(Fidelity, CircuitThreeTableApproximations) {
    const RabiParams p = preset("III_0p5").params;
    const EigenSystem es = adaptive_truncation(p, 4);
    const auto cats = cat_approximations(p, FockSpace(es.n_max_used));
    const double expected[4] = {0.981, 0.985, 0.975, 0.967};
    for (int level = 0; level < 4; ++level) EXPECT_NEAR(fidelity(cats[level], es.states[level]), expected[level], 0.002) << level;
}

TEST(Fidelity, CircuitTwoGroundState) {
    const RabiParams p = preset("II_m0p5").params;
    const EigenSystem es = adaptive_truncation(p, 2);
    const auto cats = cat_approximations(p, FockSpace(es.n_max_used));
    EXPECT_NEAR(fidelity(cats[0], es.states[0]), 0.99994, 0.00002);
}

TEST(Fidelity, ImprovesWithOscillatorToSplittingRatio) {
    const double alpha = 1.0;
    double prev = 0.0;
    for (double w : {2.0, 4.0, 8.0, 16.0, 32.0}) {
        const RabiParams p{1.0, w, alpha * w, 0.0};
        const EigenSystem es = adaptive_truncation(p, 1);
        const double f = fidelity(cat_approximations(p, FockSpace(es.n_max_used))[0], es.states[0]);
        EXPECT_GE(f, prev) << "omega_o = " << w;
        prev = f;
    }
}

TEST(QubitMixingAngle, Values) {
    EXPECT_NEAR(qubit_mixing_angle(1.0, 0.0), std::numbers::pi / 2, 1e-15);
    EXPECT_NEAR(qubit_mixing_angle(0.0, 2.0), 0.0, 1e-15);
    EXPECT_NEAR(qubit_mixing_angle(0.7, 0.7), std::numbers::pi / 4, 1e-15);
    EXPECT_THROW(qubit_mixing_angle(0.0, 0.0), std::domain_error);
}

TEST(QubitEigenstates, DiagonalizeQubitHamiltonian) {
    prop::for_all(10, 35, [](prop::Gen& gen, int) {
        const double delta = gen.uniform(0.01, 5.0), eps = gen.uniform(-5.0, 5.0);
        const auto [g, e] = qubit_eigenstates(delta, eps);
        Matrix h = -0.5 * (delta * pauli(Axis::x) + eps * pauli(Axis::z));
        const double r = 0.5 * std::hypot(delta, eps);
        EXPECT_LT((h * g + r * g).norm(), 1e-12);
        EXPECT_LT((h * e - r * e).norm(), 1e-12);
        EXPECT_LT(std::abs(g.dot(e)), 1e-14);
    });
}

TEST(ProductState, Layout) {
    Vector q(2);
    q << 0.6, 0.8;
    const JointState s = product_state(q, fock_vector(FockSpace(3), 1));
    EXPECT_EQ(s.amplitude(0, 1), cplx(0.6));
    EXPECT_EQ(s.amplitude(1, 1), cplx(0.8));
    EXPECT_THROW(product_state(Vector::Ones(3), Vector::Ones(2)), std::invalid_argument);
}
