// Superoperator assembly, Choi matrix, spectrum and fixed point.

#include "sysbath/superop.hpp"

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace sysbath;
using namespace sysbath::testing;

namespace {

double min_eigenvalue(const Operator& m) { return herm_eig(Operator((m + m.adjoint()) / 2.0)).eigenvalues(0); }

SuperoperatorMatrix depolarizing(Eigen::Index d, double p) {
    return superoperator_of(d, [&](const Operator& x) -> Operator {
        return (1 - p) * x + p * x.trace() * Operator::Identity(d, d) / double(d);
    });
}

SuperoperatorMatrix amplitude_damping(double gamma) {
    Operator k0 = Operator::Zero(2, 2), k1 = Operator::Zero(2, 2);
    k0(0, 0) = 1;
    k0(1, 1) = std::sqrt(1 - gamma);
    k1(0, 1) = std::sqrt(gamma);
    return superoperator_of(
        2, [&](const Operator& x) -> Operator { return k0 * x * k0.adjoint() + k1 * x * k1.adjoint(); });
}

}  // namespace

TEST_CASE("column-stacking vectorization", "[superop]") {
    Lcg rng(1);
    const Operator a = random_matrix(3, rng), x = random_matrix(3, rng), b = random_matrix(3, rng);
    CHECK(max_abs(unvec(vec(x), 3) - x) == 0);
    CHECK(vec(x)(1) == x(1, 0));  // second entry is row 1 of column 0
    CHECK(vec(x)(3) == x(0, 1));
    // vec(A X B) = (Bᵀ ⊗ A) vec(X)
    CHECK(max_abs(vec(Operator(a * x * b)) - kron(Operator(b.transpose()), a) * vec(x)) < 1e-13);
    CHECK_THROWS_AS(unvec(StateVector::Zero(5), 2), InvalidOperator);
}

TEST_CASE("identity and unitary superoperators", "[superop]") {
    const auto id = superoperator_of(3, [](const Operator& x) { return x; });
    CHECK(max_abs(id.matrix - Operator::Identity(9, 9)) == 0);

    Lcg rng(3);
    const Operator u = expm_herm(random_hermitian(3, rng), 0.8);
    const auto s = superoperator_of(3, [&](const Operator& x) -> Operator { return u * x * u.adjoint(); });
    CHECK(max_abs(s.matrix - kron(Operator(u.conjugate()), u)) < 1e-14);
    CHECK(trace_preservation_defect(s) < 1e-14);
}

TEST_CASE("Choi matrix conventions", "[superop]") {
    const Eigen::Index d = 3;
    const auto id = superoperator_of(d, [](const Operator& x) { return x; });
    StateVector omega = StateVector::Zero(d * d);
    for (Eigen::Index i = 0; i < d; ++i) omega(i * d + i) = 1;
    CHECK(max_abs(choi_matrix(id) - omega * omega.adjoint()) == 0);  // d × maximally entangled projector

    Lcg rng(5);
    const Operator u = expm_herm(random_hermitian(d, rng), 1.3);
    const auto s = superoperator_of(d, [&](const Operator& x) -> Operator { return u * x * u.adjoint(); });
    const Operator c = choi_matrix(s);
    const auto e = herm_eig(c);
    CHECK(e.eigenvalues(d * d - 1) == Catch::Approx(double(d)));
    CHECK(std::abs(e.eigenvalues(0)) < 1e-12);
    CHECK(e.eigenvalues(d * d - 2) < 1e-12);  // rank one

    // against the definition Σ E_ij ⊗ Φ(E_ij)
    const auto amp = amplitude_damping(0.3);
    Operator direct = Operator::Zero(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) direct += kron(matrix_unit(2, i, j), apply_superoperator(amp, matrix_unit(2, i, j)));
    CHECK(max_abs(choi_matrix(amp) - direct) < 1e-15);

    // transposition is positive but not completely positive
    const auto transpose = superoperator_of(2, [](const Operator& x) -> Operator { return x.transpose(); });
    CHECK(min_eigenvalue(choi_matrix(transpose)) == Catch::Approx(-1));
}

TEST_CASE("depolarizing channel spectrum", "[superop]") {
    for (double p : {0.1, 0.35, 0.8}) {
        const auto s = depolarizing(3, p);
        const auto r = spectral_report(s, std::nullopt);
        CHECK(r.gap == Catch::Approx(p));
        CHECK(std::abs(r.eigenvalues(0) - Complex(1)) < 1e-12);
        CHECK(max_abs(r.fixed_point - Operator::Identity(3, 3) / 3.0) < 1e-12);
        CHECK(r.residual < 1e-12);
        CHECK(r.mixing);
        CHECK(r.mixing_estimate == Catch::Approx(std::log(2.0) / -std::log(1 - p)));
    }
}

TEST_CASE("amplitude damping spectrum and fixed point", "[superop]") {
    // eigenvalues 1, √(1−γ) (twice), 1−γ; fixed point |0⟩⟨0|
    const double gamma = 0.36;
    const auto s = amplitude_damping(gamma);
    const TargetState target{matrix_unit(2, 0, 0), std::numeric_limits<double>::infinity(), 0};
    const auto r = spectral_report(s, target);
    CHECK(r.gap == Catch::Approx(1 - std::sqrt(1 - gamma)));
    CHECK(std::abs(std::abs(r.eigenvalues(3)) - (1 - gamma)) < 1e-12);
    CHECK(max_abs(r.fixed_point - matrix_unit(2, 0, 0)) < 1e-12);
    CHECK(r.trace_distance < 1e-12);
    CHECK(r.infidelity < 1e-9);
    CHECK(sorted_spectrum(s).size() == 4);
}

TEST_CASE("peripheral degeneracy is reported", "[superop]") {
    Lcg rng(7);
    const Operator u = expm_herm(random_hermitian(2, rng), 0.9);
    const auto s = superoperator_of(2, [&](const Operator& x) -> Operator { return u * x * u.adjoint(); });
    try {
        spectral_report(s, std::nullopt);
        FAIL("expected NonUniqueFixedPoint");
    } catch (const NonUniqueFixedPoint& e) {
        CHECK(std::abs(e.gap) < 1e-12);
        CHECK(e.eigenvalues.size() == 4);
    }
}

TEST_CASE("trace preservation defect detects non-TP maps", "[superop]") {
    CHECK(trace_preservation_defect(depolarizing(2, 0.5)) < 1e-15);
    const auto doubled = superoperator_of(2, [](const Operator& x) -> Operator { return 2.0 * x; });
    CHECK(trace_preservation_defect(doubled) == Catch::Approx(1));
}

TEST_CASE("channel superoperator in trivial limits", "[superop]") {
    const auto model = build_tfim(2, 1.0, 1.2);
    auto p = ChannelParams::standard(0.0, 1.0, 1.0, pauli_coupling_set(2));
    p.omega_nodes = 2;

    auto identity = p;
    identity.T = 0;
    identity.override_time_policy = true;
    identity.alpha = 0.5;
    CHECK(max_abs(build_superoperator(identity, model).matrix - Operator::Identity(16, 16)) < 1e-14);

    const Operator us = expm_herm(model.matrix, 2 * p.T);
    const auto s = build_superoperator(p, model);
    REQUIRE(s.params.has_value());
    CHECK(max_abs(s.matrix - kron(Operator(us.conjugate()), us)) < 1e-10);
    CHECK(min_eigenvalue(choi_matrix(s)) > -1e-10);
    CHECK(herm_eig(choi_matrix(s)).eigenvalues(14) < 1e-10);  // rank one

    CHECK_THROWS_AS(build_superoperator(p, build_tfim(7, 1.0, 1.0)), std::invalid_argument);
}

TEST_CASE("channel superoperator reconstructs the channel", "[superop][property]") {
    const auto model = build_tfim(2, 1.0, 1.2);
    auto p = ChannelParams::standard(0.5 / std::sqrt(2.0), 2.0, 1.0, pauli_coupling_set(2));
    p.omega_nodes = 16;
    const ExactChannel ch(p, model);
    const auto s = build_superoperator(ch);

    Lcg rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Operator rho = random_density(4, rng);
        CHECK(max_abs(apply_superoperator(s, rho) - ch.apply(rho)) < 1e-9);
    }
    CHECK(trace_preservation_defect(s) < 1e-8);
    CHECK(min_eigenvalue(choi_matrix(s)) >= -1e-8);

    const auto target = thermal_state(model, 1.0);
    const auto r = spectral_report(s, target);
    CHECK(std::abs(std::abs(r.eigenvalues(0)) - 1) < 1e-7);
    for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) CHECK(std::abs(r.eigenvalues(i)) <= 1 + 1e-7);
    CHECK(r.gap >= -1e-7);
    CHECK(r.gap <= 1);
    REQUIRE(r.gap > 1e-4);
    CHECK(r.residual <= 1e-7);
    CHECK(std::abs(r.fixed_point.trace() - 1.0) < 1e-12);
    CHECK(is_hermitian(r.fixed_point, 1e-12));
    CHECK(min_eigenvalue(r.fixed_point) >= -1e-7);
    // the fixed point approximates the Gibbs state at this σ
    CHECK(r.trace_distance < 0.05);
}

TEST_CASE("TFIM-4 superoperator agrees with direct application", "[superop]") {
    const auto model = build_tfim(4, 1.0, 1.2);
    auto p = ChannelParams::standard(0.5 / std::sqrt(2.0), 2.0, 1.0, pauli_coupling_set(4));
    p.omega_nodes = 2;
    const ExactChannel ch(p, model);
    const auto s = build_superoperator(ch);
    const Operator gibbs = thermal_state(model, 1.0).matrix;
    CHECK(max_abs(apply_superoperator(s, gibbs) - ch.apply(gibbs)) < 1e-9);
    CHECK(trace_preservation_defect(s) < 1e-8);
}
