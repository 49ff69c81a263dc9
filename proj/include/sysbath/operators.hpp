// operators.hpp: Dense complex operator algebra: Kronecker structure, Hermitian
// eigendecomposition, unitary propagators, Schatten norms, partial trace, fidelity.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace sysbath {

template <class Real>
using DenseOperator = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using DenseVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <class Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using Operator = DenseOperator<double>;
using StateVector = DenseVector<double>;

/// Raised when an operator fails a structural precondition (shape, Hermiticity, positivity).
class InvalidOperator : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace tol {
inline constexpr double hermitian = 1e-10;
inline constexpr double psd_clamp = 1e-8;
}  // namespace tol

// --------------------------- predicates -------------------------------------

template <class Derived>
typename Derived::RealScalar max_abs(const Eigen::MatrixBase<Derived>& a) {
    return a.size() == 0 ? typename Derived::RealScalar(0) : a.cwiseAbs().maxCoeff();
}

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
    return a.allFinite();
}

// ||a - a†||_max <= tol * max(1, ||a||_max)
template <class Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& a, typename Derived::RealScalar tolerance = tol::hermitian) {
    if (a.rows() != a.cols()) return false;
    using Real = typename Derived::RealScalar;
    const Real scale = std::max(Real(1), max_abs(a));
    return max_abs(a - a.adjoint()) <= tolerance * scale;
}

template <class Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& u, typename Derived::RealScalar tolerance = 1e-9) {
    if (u.rows() != u.cols()) return false;
    using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    return max_abs(u.adjoint() * u - Mat::Identity(u.rows(), u.cols())) <= tolerance;
}

template <class Derived>
void require_square(const Eigen::MatrixBase<Derived>& a, const char* where) {
    if (a.rows() != a.cols() || a.rows() < 1)
        throw InvalidOperator(std::string(where) + ": operator must be square with dim >= 1");
}

// --------------------------- structure --------------------------------------

template <class DerivedA, class DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = Eigen::kroneckerProduct(a.eval(), b.eval());
    return out;
}

// Tr_E over a trailing qubit: joint index = s * 2 + e.
template <class Derived>
auto partial_trace_bath(const Eigen::MatrixBase<Derived>& joint, Eigen::Index sys_dim) {
    using Scalar = typename Derived::Scalar;
    if (sys_dim < 1 || joint.rows() != 2 * sys_dim || joint.cols() != 2 * sys_dim)
        throw InvalidOperator("partial_trace_bath: joint dim must equal 2 * sys_dim");
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(sys_dim, sys_dim);
    for (Eigen::Index i = 0; i < sys_dim; ++i)
        for (Eigen::Index j = 0; j < sys_dim; ++j)
            out(i, j) = joint(2 * i, 2 * j) + joint(2 * i + 1, 2 * j + 1);
    return out;
}

// --------------------------- spectral ---------------------------------------

template <class Real>
struct HermEigen {
    RealVector<Real> eigenvalues;        // ascending
    DenseOperator<Real> eigenvectors;    // columns

    DenseOperator<Real> reconstruct() const {
        return eigenvectors * eigenvalues.template cast<std::complex<Real>>().asDiagonal() * eigenvectors.adjoint();
    }

    // V f(Λ) V†
    template <class Fn>
    DenseOperator<Real> apply(Fn&& fn) const {
        DenseVector<Real> d(eigenvalues.size());
        for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) d(i) = fn(eigenvalues(i));
        return eigenvectors * d.asDiagonal() * eigenvectors.adjoint();
    }
};

template <class Derived>
auto herm_eig(const Eigen::MatrixBase<Derived>& h) {
    using Real = typename Derived::RealScalar;
    require_square(h, "herm_eig");
    if (!is_hermitian(h)) throw InvalidOperator("herm_eig: input is not Hermitian");
    DenseOperator<Real> sym = (h + h.adjoint()) / Real(2);
    Eigen::SelfAdjointEigenSolver<DenseOperator<Real>> solver(sym);
    if (solver.info() != Eigen::Success) throw std::runtime_error("herm_eig: eigensolver failed");
    return HermEigen<Real>{solver.eigenvalues(), solver.eigenvectors()};
}

// e^{-i h t}
template <class Derived>
auto expm_herm(const Eigen::MatrixBase<Derived>& h, typename Derived::RealScalar t) {
    using Real = typename Derived::RealScalar;
    const auto eig = herm_eig(h);
    return eig.apply([t](Real lambda) { return std::exp(std::complex<Real>(0, -lambda * t)); });
}

template <class Derived>
auto singular_values(const Eigen::MatrixBase<Derived>& a) {
    using Real = typename Derived::RealScalar;
    Eigen::JacobiSVD<DenseOperator<Real>> svd(a.eval());
    return RealVector<Real>(svd.singularValues());
}

template <class Derived>
typename Derived::RealScalar trace_norm(const Eigen::MatrixBase<Derived>& a) {
    return singular_values(a).sum();
}

template <class Derived>
typename Derived::RealScalar operator_norm(const Eigen::MatrixBase<Derived>& a) {
    if (a.size() == 0) return 0;
    return singular_values(a)(0);
}

// PSD square root with clamping of slightly negative eigenvalues.
template <class Derived>
auto sqrtm_psd(const Eigen::MatrixBase<Derived>& a, typename Derived::RealScalar clamp = tol::psd_clamp) {
    using Real = typename Derived::RealScalar;
    const auto eig = herm_eig(a);
    if (eig.eigenvalues.size() > 0 && eig.eigenvalues(0) < -clamp)
        throw InvalidOperator("sqrtm_psd: operator has eigenvalue " + std::to_string(eig.eigenvalues(0)) +
                              " below clamp threshold");
    return eig.apply([](Real lambda) { return std::complex<Real>(std::sqrt(std::max(lambda, Real(0))), 0); });
}

template <class Derived>
void require_density(const Eigen::MatrixBase<Derived>& rho, const char* where,
                     typename Derived::RealScalar tolerance = tol::psd_clamp) {
    require_square(rho, where);
    if (!all_finite(rho)) throw InvalidOperator(std::string(where) + ": non-finite entries");
    if (!is_hermitian(rho, tolerance)) throw InvalidOperator(std::string(where) + ": not Hermitian");
    if (std::abs(rho.trace() - typename Derived::Scalar(1)) > tolerance)
        throw InvalidOperator(std::string(where) + ": trace differs from 1");
    const auto eig = herm_eig(rho);
    if (eig.eigenvalues(0) < -tolerance) throw InvalidOperator(std::string(where) + ": not positive semidefinite");
}

// F(ρ, σ) = (Tr sqrt(sqrt(σ) ρ sqrt(σ)))^2
template <class DerivedA, class DerivedB>
typename DerivedA::RealScalar fidelity(const Eigen::MatrixBase<DerivedA>& rho, const Eigen::MatrixBase<DerivedB>& sigma) {
    using Real = typename DerivedA::RealScalar;
    require_density(rho, "fidelity");
    require_density(sigma, "fidelity");
    if (rho.rows() != sigma.rows()) throw InvalidOperator("fidelity: dimension mismatch");
    const DenseOperator<Real> root = sqrtm_psd(sigma);
    DenseOperator<Real> inner = root * rho * root;
    inner = (inner + inner.adjoint()).eval() / Real(2);
    const auto eig = herm_eig(inner);
    Real s = 0;
    for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) s += std::sqrt(std::max(eig.eigenvalues(i), Real(0)));
    return s * s;
}

// |<ψ|σ|ψ>| for a normalized pure state against a density matrix.
template <class DerivedV, class DerivedM>
typename DerivedV::RealScalar pure_fidelity(const Eigen::MatrixBase<DerivedV>& psi, const Eigen::MatrixBase<DerivedM>& sigma) {
    return std::real(psi.dot(sigma * psi));
}

// --------------------------- single-qubit constants -------------------------

template <class Real = double>
DenseOperator<Real> pauli_x() {
    DenseOperator<Real> m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

template <class Real = double>
DenseOperator<Real> pauli_y() {
    using C = std::complex<Real>;
    DenseOperator<Real> m(2, 2);
    m << C(0, 0), C(0, -1), C(0, 1), C(0, 0);
    return m;
}

template <class Real = double>
DenseOperator<Real> pauli_z() {
    DenseOperator<Real> m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

// |0><1|, annihilates the |1> (occupied) state
template <class Real = double>
DenseOperator<Real> lowering() {
    DenseOperator<Real> m = DenseOperator<Real>::Zero(2, 2);
    m(0, 1) = 1;
    return m;
}

// |i><j| in dimension n
template <class Real = double>
DenseOperator<Real> matrix_unit(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
    DenseOperator<Real> m = DenseOperator<Real>::Zero(n, n);
    m(i, j) = 1;
    return m;
}

template <class Real = double>
DenseOperator<Real> projector(const DenseVector<Real>& psi) {
    return psi * psi.adjoint();
}

// op acting on `site` (0 = most significant) of an n-qubit register.
template <class Derived>
auto embed_site(const Eigen::MatrixBase<Derived>& op, int site, int n_qubits) {
    using Real = typename Derived::RealScalar;
    const Eigen::Index left = Eigen::Index(1) << site;
    const Eigen::Index right = Eigen::Index(1) << (n_qubits - site - 1);
    return kron(kron(DenseOperator<Real>::Identity(left, left), op), DenseOperator<Real>::Identity(right, right));
}

}  // namespace sysbath
