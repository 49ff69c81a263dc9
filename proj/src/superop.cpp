// superop.cpp: Superoperator assembly and spectral analysis.

#include "sysbath/superop.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sysbath {

Eigen::Map<const StateVector> vec_view(const Operator& rho) {
    // Eigen is column-major, so the raw buffer already stacks columns.
    return Eigen::Map<const StateVector>(rho.data(), rho.size());
}

StateVector vec(const Operator& rho) { return vec_view(rho); }

Operator unvec(const StateVector& v, Eigen::Index d) {
    if (v.size() != d * d) throw InvalidOperator("unvec: length is not d^2");
    return Eigen::Map<const Operator>(v.data(), d, d);
}

SuperoperatorMatrix build_superoperator(const ExactChannel& channel) {
    const Eigen::Index d = channel.dim();
    if (d > 64) throw std::invalid_argument("build_superoperator: d > 64 exceeds the memory guard");
    SuperoperatorMatrix s{d, Operator::Zero(d * d, d * d), std::nullopt};
    // vec(K ρ K†) = (conj(K) ⊗ K) vec(ρ)
    for (const auto& [w, k] : channel.kraus()) {
        const Operator kc = k.conjugate();
        for (Eigen::Index a = 0; a < d; ++a)
            for (Eigen::Index b = 0; b < d; ++b) {
                const Complex c = w * kc(a, b);
                if (c == Complex(0)) continue;
                s.matrix.block(a * d, b * d, d, d).noalias() += c * k;
            }
    }
    return s;
}

SuperoperatorMatrix build_superoperator(const ChannelParams& params, const HamiltonianModel& model) {
    if (model.dim() > 64) throw std::invalid_argument("build_superoperator: d > 64 exceeds the memory guard");
    auto s = build_superoperator(ExactChannel(params, model));
    s.params = params;
    return s;
}

Operator apply_superoperator(const SuperoperatorMatrix& s, const Operator& rho) {
    if (rho.rows() != s.d || rho.cols() != s.d) throw InvalidOperator("apply_superoperator: dimension mismatch");
    return unvec(s.matrix * vec_view(rho), s.d);
}

Operator choi_matrix(const SuperoperatorMatrix& s) {
    const Eigen::Index d = s.d;
    Operator c(d * d, d * d);
    // block (i, j) of C is Φ(E_ij), whose (a, b) entry is S[a + b d, i + j d]
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index a = 0; a < d; ++a)
                for (Eigen::Index b = 0; b < d; ++b) c(i * d + a, j * d + b) = s.matrix(a + b * d, i + j * d);
    return c;
}

Operator choi_matrix(const ChannelParams& params, const HamiltonianModel& model) {
    return choi_matrix(build_superoperator(params, model));
}

double trace_preservation_defect(const SuperoperatorMatrix& s) {
    const StateVector v = vec(Operator::Identity(s.d, s.d));
    const StateVector left = s.matrix.adjoint() * v;  // S† vec(I)
    return max_abs(left - v);
}

StateVector sorted_spectrum(const SuperoperatorMatrix& s) {
    Eigen::ComplexEigenSolver<Operator> solver(s.matrix, false);
    if (solver.info() != Eigen::Success) throw std::runtime_error("sorted_spectrum: eigensolver failed");
    StateVector ev = solver.eigenvalues();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(ev.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(ev(a)) > std::abs(ev(b)); });
    StateVector out(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) out(i) = ev(order[static_cast<std::size_t>(i)]);
    return out;
}

SpectralReport spectral_report(const SuperoperatorMatrix& s, const std::optional<TargetState>& target) {
    const Eigen::Index n = s.matrix.rows();
    Eigen::ComplexEigenSolver<Operator> solver(s.matrix, true);
    if (solver.info() != Eigen::Success) throw std::runtime_error("spectral_report: eigensolver failed");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const auto& ev = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(ev(a)) > std::abs(ev(b)); });

    SpectralReport r;
    r.eigenvalues.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) r.eigenvalues(i) = ev(order[static_cast<std::size_t>(i)]);
    const double lambda2 = n > 1 ? std::abs(r.eigenvalues(1)) : 0.0;
    r.gap = 1.0 - lambda2;
    r.mixing = r.gap > 1e-9;
    r.mixing_estimate = lambda2 >= 1.0 ? std::numeric_limits<double>::infinity()
                        : lambda2 == 0 ? 0.0
                                       : std::log(2.0) / -std::log(lambda2);

    int near_one = 0;
    Eigen::Index best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double dist = std::abs(ev(i) - Complex(1));
        if (dist < 1e-9) ++near_one;
        if (dist < best_dist) {
            best_dist = dist;
            best = i;
        }
    }
    if (near_one > 1) throw NonUniqueFixedPoint(r.eigenvalues, r.gap);

    Operator rho = unvec(solver.eigenvectors().col(best), s.d);
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-14) throw std::runtime_error("spectral_report: fixed-point eigenvector is traceless");
    rho /= tr;
    rho = (rho + rho.adjoint()).eval() / 2.0;
    r.fixed_point = rho;
    r.residual = trace_norm(apply_superoperator(s, rho) - rho);
    if (target) {
        r.trace_distance = 0.5 * trace_norm(rho - target->matrix);
        r.infidelity = 1.0 - fidelity(rho, target->matrix);
    }
    return r;
}

}  // namespace sysbath
