// fock.hpp - truncated Fock-space operators for one qubit and one oscillator
//
// Joint index layout: (qubit s, Fock n) -> s * n_max + n, which is the
// Kronecker layout of tensor(qubit_op, osc_op). Qubit index 0 is |L>,
// index 1 is |R>, with sigma_z |L> = +|L>.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include "dsc/diagnostics.hpp"

namespace dsc {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

class FockSpace {
public:
    explicit FockSpace(int n_max) : n_max_(n_max) {
        if (n_max < 2) {
            throw std::invalid_argument("FockSpace: n_max must be >= 2, got " + std::to_string(n_max));
        }
    }

    int n_max() const noexcept { return n_max_; }
    int joint_dim() const noexcept { return 2 * n_max_; }

    friend bool operator==(const FockSpace&, const FockSpace&) = default;

private:
    int n_max_;
};

// Pure state of the joint system.
struct JointState {
    Vector amplitudes;
    int n_max = 0;

    JointState() = default;
    JointState(Vector amps, int n) : amplitudes(std::move(amps)), n_max(n) {
        if (amplitudes.size() != 2 * static_cast<Eigen::Index>(n)) {
            throw std::invalid_argument("JointState: amplitude length must be 2*n_max");
        }
    }

    cplx amplitude(int qubit, int fock) const { return amplitudes(qubit * n_max + fock); }
    double norm() const { return amplitudes.norm(); }

    JointState normalized() const {
        const double nrm = norm();
        if (nrm == 0.0) throw std::domain_error("JointState: cannot normalize the zero vector");
        return JointState(amplitudes / nrm, n_max);
    }

    // Row s holds the oscillator amplitudes conditioned on qubit state s.
    Eigen::MatrixXcd as_matrix() const {
        Eigen::MatrixXcd m(2, n_max);
        for (int s = 0; s < 2; ++s) m.row(s) = amplitudes.segment(s * n_max, n_max).transpose();
        return m;
    }
};

inline Matrix annihilation(const FockSpace& space) {
    const int n = space.n_max();
    Matrix a = Matrix::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

inline Matrix creation(const FockSpace& space) { return annihilation(space).adjoint(); }

inline Matrix number_operator(const FockSpace& space) {
    const int n = space.n_max();
    Matrix m = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) m(k, k) = static_cast<double>(k);
    return m;
}

// a + a^dagger
inline Matrix field_quadrature(const FockSpace& space) {
    const Matrix a = annihilation(space);
    return a + a.adjoint();
}

// (-1)^{a^dagger a}
inline Matrix oscillator_parity(const FockSpace& space) {
    const int n = space.n_max();
    Matrix p = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return p;
}

inline Vector fock_vector(const FockSpace& space, int k) {
    if (k < 0 || k >= space.n_max()) throw std::out_of_range("fock_vector: index outside truncation");
    Vector v = Vector::Zero(space.n_max());
    v(k) = 1.0;
    return v;
}

enum class Axis { x, z };

inline Matrix pauli(Axis axis) {
    Matrix s = Matrix::Zero(2, 2);
    if (axis == Axis::x) {
        s(0, 1) = 1.0;
        s(1, 0) = 1.0;
    } else {
        s(0, 0) = 1.0;
        s(1, 1) = -1.0;
    }
    return s;
}

inline Matrix tensor(const Matrix& qubit_op, const Matrix& osc_op) {
    if (qubit_op.rows() != 2 || qubit_op.cols() != 2) {
        throw std::invalid_argument("tensor: qubit operator must be 2x2");
    }
    if (osc_op.rows() != osc_op.cols()) {
        throw std::invalid_argument("tensor: oscillator operator must be square");
    }
    const Eigen::Index n = osc_op.rows();
    Matrix out(2 * n, 2 * n);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) out.block(r * n, c * n, n, n) = qubit_op(r, c) * osc_op;
    return out;
}

inline bool is_hermitian(const Matrix& m, double rel_tol = 1e-12) {
    if (m.rows() != m.cols()) return false;
    const double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() < rel_tol * scale;
}

// exp(-i t K) for Hermitian K, through its eigendecomposition.
inline Matrix exp_hermitian(const Matrix& k, double t) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(k);
    if (es.info() != Eigen::Success) throw NumericalError("exp_hermitian: eigendecomposition failed");
    const Eigen::VectorXd& lam = es.eigenvalues();
    Vector phase(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) phase(i) = std::exp(cplx(0.0, -t * lam(i)));
    return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

// D(alpha) = exp(alpha a^dagger - alpha^* a). The generator G is
// anti-Hermitian, so K = iG is Hermitian and D = exp(-iK).
inline Matrix displacement(const FockSpace& space, cplx alpha) {
    if (std::norm(alpha) > space.n_max() / 4.0) {
        warn("displacement: |alpha|^2 = " + std::to_string(std::norm(alpha)) +
             " exceeds n_max/4 = " + std::to_string(space.n_max() / 4.0) + "; truncation error likely");
    }
    const Matrix a = annihilation(space);
    const Matrix k = cplx(0.0, 1.0) * (alpha * a.adjoint() - std::conj(alpha) * a);
    return exp_hermitian(k, 1.0);
}

} // namespace dsc
