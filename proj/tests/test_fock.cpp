#include <gtest/gtest.h>

#include "dsc/fock.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace dsc;

TEST(FockSpace, RejectsTinyTruncation) {
    EXPECT_THROW(FockSpace(1), std::invalid_argument);
    EXPECT_NO_THROW(FockSpace(2));
    EXPECT_EQ(FockSpace(7).joint_dim(), 14);
}

TEST(FockOperators, CommutatorIsIdentityBelowTheEdge) {
    prop::for_all(20, 1, [](prop::Gen& gen, int) {
        const int n = gen.integer(2, 120);
        const Matrix a = annihilation(FockSpace(n));
        const Matrix c = a * a.adjoint() - a.adjoint() * a;
        EXPECT_LT((c.topLeftCorner(n - 1, n - 1) - Matrix::Identity(n - 1, n - 1)).cwiseAbs().maxCoeff(), 1e-12);
    });
}

TEST(FockOperators, NumberOperatorIsCreationTimesAnnihilation) {
    const FockSpace space(12);
    const Matrix a = annihilation(space);
    EXPECT_LT((a.adjoint() * a - number_operator(space)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(FockOperators, ParityDiagonal) {
    const Matrix p = oscillator_parity(FockSpace(5));
    for (int k = 0; k < 5; ++k) EXPECT_EQ(p(k, k).real(), k % 2 == 0 ? 1.0 : -1.0);
}

TEST(FockOperators, FockVectorBounds) {
    const FockSpace space(4);
    EXPECT_EQ(fock_vector(space, 3)(3), cplx(1.0));
    EXPECT_THROW(fock_vector(space, 4), std::out_of_range);
    EXPECT_THROW(fock_vector(space, -1), std::out_of_range);
}

TEST(Tensor, KroneckerLayout) {
    const FockSpace space(3);
    const Matrix t = tensor(pauli(Axis::z), number_operator(space));
    // index s * n_max + n
    EXPECT_EQ(t(2, 2).real(), 2.0);
    EXPECT_EQ(t(3 + 2, 3 + 2).real(), -2.0);
    EXPECT_THROW(tensor(Matrix::Identity(3, 3), number_operator(space)), std::invalid_argument);
}

TEST(Tensor, PreservesHermiticity) {
    prop::for_all(10, 2, [](prop::Gen& gen, int) {
        const int n = gen.integer(2, 15);
        const Matrix q = prop::Gen(gen.integer(0, 1 << 20)).density(2);
        const Matrix o = gen.density(n);
        EXPECT_TRUE(is_hermitian(tensor(q, o)));
    });
}

TEST(Displacement, ZeroIsIdentity) {
    const FockSpace space(20);
    EXPECT_LT((displacement(space, 0.0) - Matrix::Identity(20, 20)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Displacement, CoherentMeanPhotonNumber) {
    const FockSpace space(40);
    const Vector v = displacement(space, 1.0).col(0);
    EXPECT_NEAR((v.adjoint() * number_operator(space) * v)(0).real(), 1.0, 1e-8);
}

TEST(Displacement, BranchOverlap) {
    const FockSpace space(60);
    const double alpha = 1.335;
    const cplx ov = displacement(space, -alpha).col(0).dot(displacement(space, alpha).col(0));
    EXPECT_NEAR(ov.real(), std::exp(-2.0 * alpha * alpha), 1e-10);
    EXPECT_NEAR(ov.real(), 0.028, 5e-4);
}

TEST(Displacement, InverseProperty) {
    prop::for_all(10, 3, [](prop::Gen& gen, int) {
        const int n = gen.integer(20, 80);
        const cplx alpha = gen.complex_in_disk(std::sqrt(static_cast<double>(n)) / 3.0);
        const FockSpace space(n);
        const Matrix prod = displacement(space, alpha) * displacement(space, -alpha);
        EXPECT_LT((prod - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-8);
    });
}

TEST(Displacement, MatchesLaguerreClosedForm) {
    prop::for_all(8, 4, [](prop::Gen& gen, int) {
        const cplx alpha = gen.complex_in_disk(1.5);
        const FockSpace space(80);
        const Matrix d = displacement(space, alpha);
        for (int m = 0; m < 6; ++m)
            for (int n = 0; n < 6; ++n)
                EXPECT_LT(std::abs(d(m, n) - oracle::displacement_element(m, n, alpha)), 1e-10) << m << "," << n;
    });
}

TEST(Displacement, WarnsWhenTruncationIsTight) {
    int warnings = 0;
    auto old = set_warning_handler([&](const std::string&) { ++warnings; });
    displacement(FockSpace(8), 2.0);
    set_warning_handler(old);
    EXPECT_EQ(warnings, 1);
}

TEST(JointState, LayoutAndNormalization) {
    Vector v = Vector::Zero(6);
    v(4) = 3.0;
    const JointState s(v, 3);
    EXPECT_EQ(s.amplitude(1, 1), cplx(3.0));
    EXPECT_DOUBLE_EQ(s.normalized().norm(), 1.0);
    EXPECT_THROW(JointState(Vector::Zero(5), 3), std::invalid_argument);
    EXPECT_THROW(JointState(Vector::Zero(6), 3).normalized(), std::domain_error);
}
