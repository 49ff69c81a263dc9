// Dyson operators G_k, F_k and the identities and bounds they satisfy.

#include "sysbath/dyson.hpp"

#include "sysbath/quadrature.hpp"
#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace sysbath;
using namespace sysbath::testing;

namespace {

const double kPi = std::numbers::pi;

// ∫_ℝ f(t) e^{iνt} dt for the normalized Gaussian profile
double profile_fourier(double sigma, double nu) {
    return std::pow(2.0, 0.75) * std::pow(kPi, 0.25) * std::sqrt(sigma) * std::exp(-sigma * sigma * nu * nu);
}

HamiltonianModel zero_model(int qubits) {
    const Eigen::Index d = Eigen::Index(1) << qubits;
    return {Operator::Zero(d, d), "zero", qubits, qubits};
}

HamiltonianModel qubit_z() { return {pauli_z(), "z", 1, 1}; }

HamiltonianModel random_model(std::uint64_t seed, Eigen::Index d) {
    Lcg rng(seed);
    Operator h = random_hermitian(d, rng);
    h /= operator_norm(h);
    return {h, "random", 2, 2};
}

}  // namespace

TEST_CASE("Heisenberg picture", "[dyson]") {
    Lcg rng(1);
    const auto model = random_model(3, 4);
    const Operator a = random_matrix(4, rng);
    CHECK(max_abs(heisenberg(a, model, 0.0) - a) < 1e-14);
    CHECK(operator_norm(heisenberg(a, model, 1.7)) == Catch::Approx(operator_norm(a)).epsilon(1e-12));

    const Operator commuting = model.matrix * model.matrix;
    CHECK(max_abs(heisenberg(commuting, model, 2.3) - commuting) < 1e-12);

    // e^{iZt} X e^{-iZt} = cos(2t) X − sin(2t) Y
    for (double t : {0.0, 0.4, 1.9, -3.1}) {
        const Operator expected = std::cos(2 * t) * pauli_x() - std::sin(2 * t) * pauli_y();
        CHECK(max_abs(heisenberg(Operator(pauli_x()), qubit_z(), t) - expected) < 1e-14);
    }
}

TEST_CASE("profile integral", "[dyson]") {
    for (double sigma : {1.0, 2.0, 8.0}) {
        CHECK(profile_integral(sigma, kInfiniteT) == Catch::Approx(profile_fourier(sigma, 0)));
        const auto rule = quad::gauss_legendre(64, -5 * sigma, 5 * sigma);
        double s = 0;
        for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * gaussian_profile(rule.nodes[i], sigma);
        CHECK(profile_integral(sigma, 5 * sigma) == Catch::Approx(s).epsilon(1e-13));
    }
}

TEST_CASE("order zero is the identity", "[dyson]") {
    const auto model = random_model(5, 4);
    const Operator a = embed_site(pauli_x(), 0, 2);
    CHECK(max_abs(compute_G(0, a, model, 0.7, 2.0, kInfiniteT, 16).op - Operator::Identity(4, 4)) == 0);
    CHECK(max_abs(compute_F(0, a, model, 0.7, 2.0, kInfiniteT, 16).op - Operator::Identity(4, 4)) == 0);
    CHECK_THROWS_AS(compute_G(4, a, model, 0.7, 2.0, kInfiniteT, 16), std::invalid_argument);
    CHECK_THROWS_AS(compute_G(1, a, model, 0.7, 2.0, kInfiniteT, 4), std::invalid_argument);
}

TEST_CASE("first order in closed form", "[dyson]") {
    const double sigma = 2.0;
    const Operator a = pauli_x() + Complex(0, 0.5) * pauli_y();
    SECTION("H = 0") {
        for (double omega : {0.0, 0.3, -0.45}) {
            const double c = profile_fourier(sigma, omega);
            const auto g = compute_G(1, a, zero_model(1), omega, sigma, kInfiniteT, 32);
            const auto f = compute_F(1, a, zero_model(1), omega, sigma, kInfiniteT, 32);
            CHECK(max_abs(g.op - c * a) < 1e-8);
            CHECK(max_abs(f.op - c * Operator(a.adjoint())) < 1e-8);
            CHECK(g.infinite);
            CHECK(g.T_cutoff == kInfiniteCutoff * sigma);
        }
    }
    SECTION("H = Z shifts the frequency by the Bohr frequencies ±2") {
        // A(t) = a01 e^{2it}|0⟩⟨1| + a10 e^{−2it}|1⟩⟨0|, and G_1 carries e^{iωt}
        const double omega = 0.1;
        const auto g = compute_G(1, a, qubit_z(), omega, sigma, kInfiniteT, 32);
        Operator expected = Operator::Zero(2, 2);
        expected(0, 1) = a(0, 1) * profile_fourier(sigma, omega + 2);
        expected(1, 0) = a(1, 0) * profile_fourier(sigma, omega - 2);
        CHECK(max_abs(g.op - expected) < 1e-10);
        // resonant finite-T term: ∫_{-T}^{T} f
        const auto res = compute_G(1, a, qubit_z(), -2.0, sigma, 5 * sigma, 32);
        CHECK(std::abs(res.op(0, 1) - a(0, 1) * profile_integral(sigma, 5 * sigma)) < 1e-10);
    }
}

TEST_CASE("higher orders at zero frequency with H = 0", "[dyson]") {
    // the ordered integral of a symmetric integrand is (∫f)^k / k!
    const double sigma = 1.5;
    const Operator a = pauli_x() + Complex(0, 0.5) * pauli_y();
    const Operator ad = a.adjoint();
    const double c = profile_integral(sigma, kInfiniteT);
    const auto g2 = compute_G(2, a, zero_model(1), 0.0, sigma, kInfiniteT, 24);
    const auto g3 = compute_G(3, a, zero_model(1), 0.0, sigma, kInfiniteT, 24);
    CHECK(max_abs(g2.op - c * c / 2 * a * ad) < 1e-8);
    CHECK(max_abs(g3.op - c * c * c / 6 * a * ad * a) < 1e-8);
    const auto f2 = compute_F(2, a, zero_model(1), 0.0, sigma, kInfiniteT, 24);
    CHECK(max_abs(f2.op - c * c / 2 * ad * a) < 1e-8);

    // Hermitian A collapses the F and G patterns
    const Operator h = pauli_x();
    for (int k = 1; k <= 3; ++k)
        CHECK(max_abs(compute_G(k, h, zero_model(1), 0.0, sigma, 4 * sigma, 16).op -
                      compute_F(k, h, zero_model(1), 0.0, sigma, 4 * sigma, 16).op) < 1e-12);
}

TEST_CASE("F and G adjoint relation", "[dyson][property]") {
    const auto model = random_model(7, 4);
    const auto set = pauli_coupling_set(2);
    Lcg rng(9);
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const Operator a = set.members[std::size_t(rng.uniform() * set.size())] +
                           Complex(0, rng.uniform(-1, 1)) * set.members[std::size_t(rng.uniform() * set.size())];
        const double omega = rng.uniform(-4, 4);
        for (int k = 1; k <= 2; ++k) {
            const auto g = compute_G(k, a, model, omega, 2.0, kInfiniteT, 24);
            const auto f = compute_F(k, Operator(a.adjoint()), model, -omega, 2.0, kInfiniteT, 24);
            worst = std::max(worst, operator_norm(f.op - g.op));
        }
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("G norm bound", "[dyson][property]") {
    const auto set = pauli_coupling_set(2);
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const auto model = random_model(seed, 4);
        for (double T : {5.0, 10.0, kInfiniteT})
            for (int k = 1; k <= 3; ++k) {
                const double bound = std::pow(profile_integral(2.0, T), k) / std::tgamma(k + 1.0);
                for (double omega : {0.0, 0.8, 2.5}) {
                    const Operator& a = set.members[std::size_t(seed + k) % set.size()];
                    CHECK(operator_norm(compute_G(k, a, model, omega, 2.0, T, 16).op) <= bound + 1e-8);
                    CHECK(operator_norm(compute_F(k, a, model, omega, 2.0, T, 16).op) <= bound + 1e-8);
                }
            }
    }
}

TEST_CASE("Dyson terms converge under node refinement", "[dyson]") {
    const auto model = random_model(17, 4);
    const Operator a = embed_site(pauli_y(), 1, 2);
    const Operator ref = compute_G(2, a, model, 1.1, 2.0, 10.0, 48).op;
    const double e8 = operator_norm(compute_G(2, a, model, 1.1, 2.0, 10.0, 8).op - ref);
    const double e16 = operator_norm(compute_G(2, a, model, 1.1, 2.0, 10.0, 16).op - ref);
    CHECK(e16 < e8);
    CHECK(e16 < 1e-10);
}

TEST_CASE("avoid detailed balance identity", "[dyson]") {
    AvoidDbOptions opt;
    opt.omega_nodes = 16;
    SECTION("random 2-qubit H with Pauli couplings") {
        const auto model = random_model(21, 4);
        const double r = avoid_db_residual(model, pauli_coupling_set(2), 1.0, 2.0, 16, opt);
        CHECK(r <= 1e-5);
        opt.corrupt_gamma = true;
        CHECK(avoid_db_residual(model, pauli_coupling_set(2), 1.0, 2.0, 16, opt) > 1e-2);
    }
    SECTION("H = 0, A = X") {
        CHECK(avoid_db_residual(zero_model(1), CouplingSet{{pauli_x()}, "x"}, 1.0, 2.0, 16, opt) <= 1e-8);
    }
    SECTION("the identity needs an adjoint-closed set") {
        const auto model = random_model(23, 4);
        const CouplingSet lowering_only{{embed_site(lowering(), 0, 2)}, "lowering"};
        const CouplingSet closed{{embed_site(lowering(), 0, 2), embed_site(Operator(lowering().adjoint()), 0, 2)},
                                 "ladder"};
        CHECK(avoid_db_residual(model, closed, 1.0, 2.0, 16, opt) <= 1e-5);
        CHECK(avoid_db_residual(model, lowering_only, 1.0, 2.0, 16, opt) > 1e-3);
    }
    SECTION("parallel evaluation is schedule independent") {
        const auto model = random_model(25, 4);
        const double serial = avoid_db_residual(model, pauli_coupling_set(2), 0.5, 1.0, 8, opt);
        opt.threads = 3;
        CHECK(avoid_db_residual(model, pauli_coupling_set(2), 0.5, 1.0, 8, opt) == serial);
    }
}

TEST_CASE("thermal conjugation identity", "[dyson]") {
    const Operator x = pauli_x();
    SECTION("beta = 0") {
        for (int k = 1; k <= 2; ++k) CHECK(conjugation_identity_check(k, x, qubit_z(), 0.6, 0.0, 2.0, 24) <= 1e-7);
    }
    SECTION("H = Z, A = X, beta = 1, sigma = 2") {
        for (int k = 1; k <= 2; ++k)
            for (double omega : {-1.0, 0.0, 1.3, 2.2}) CHECK(conjugation_identity_check(k, x, qubit_z(), omega, 1.0, 2.0, 24) <= 1e-5);
    }
    SECTION("random 2-qubit H, non-Hermitian A") {
        const auto model = random_model(29, 4);
        const Operator a = embed_site(lowering(), 1, 2) + 0.3 * embed_site(pauli_z(), 0, 2);
        for (int k = 1; k <= 2; ++k) CHECK(conjugation_identity_check(k, a, model, 0.9, 1.0, 2.0, 24) <= 1e-5);
    }
    SECTION("refinement shrinks the discrepancy") {
        const auto model = random_model(31, 4);
        const Operator a = embed_site(pauli_x(), 0, 2);
        const double coarse = conjugation_identity_check(2, a, model, 0.9, 1.0, 2.0, 8);
        const double fine = conjugation_identity_check(2, a, model, 0.9, 1.0, 2.0, 16);
        CHECK((fine < coarse || fine < 1e-12));
    }
    SECTION("rejections") {
        CHECK_THROWS_AS(conjugation_identity_check(3, x, qubit_z(), 0.6, 1.0, 2.0, 16), std::invalid_argument);
        CHECK_THROWS_AS(conjugation_identity_check(1, x, qubit_z(), 0.6, 100.0, 2.0, 16), std::invalid_argument);
        CHECK_THROWS_AS(conjugation_identity_check(1, x, qubit_z(), 0.6, kInfiniteT, 2.0, 16), std::invalid_argument);
    }
}

TEST_CASE("multivariable Fourier bound", "[dyson]") {
    SECTION("n = 1 closed form") {
        for (double sigma : {1.0, 2.0})
            for (double a : {0.0, 0.3, -0.7}) {
                const auto r = multifourier_bound_check({a}, sigma, 24);
                CHECK(std::abs(r.lhs - profile_fourier(sigma, a)) < 1e-8);
                CHECK(r.rhs == Catch::Approx(2 * sigma * std::sqrt(kPi) * std::exp(-sigma * sigma * a * a)));
                CHECK(r.rhs_with_prefactor == Catch::Approx(r.lhs).epsilon(1e-10));  // tight at n = 1
                CHECK(r.holds());
            }
    }
    SECTION("cancelling frequencies have no suppression") {
        const auto r = multifourier_bound_check({1.2, -1.2}, 2.0, 24);
        CHECK(r.rhs == Catch::Approx(2 * 2.0 * std::sqrt(kPi) / std::sqrt(2.0) * 2 * 2.0 * std::sqrt(2 * kPi)));
        CHECK(r.holds());
    }
    SECTION("random tuples") {
        Lcg rng(37);
        for (double sigma : {1.0, 2.0})
            for (int n = 1; n <= 3; ++n)
                for (int t = 0; t < 100; ++t) {
                    std::vector<double> alphas(static_cast<std::size_t>(n));
                    for (auto& a : alphas) a = rng.uniform(-2, 2);
                    const auto r = multifourier_bound_check(alphas, sigma, 16);
                    CHECK(r.holds());
                    CHECK(r.lhs <= r.rhs_with_prefactor * (1 + 1e-10) + 1e-14);
                }
    }
    CHECK_THROWS_AS(multifourier_bound_check({}, 1.0, 16), std::invalid_argument);
    CHECK_THROWS_AS(multifourier_bound_check({1, 2, 3, 4}, 1.0, 16), std::invalid_argument);
}

TEST_CASE("order-two Dyson channel", "[dyson]") {
    const auto model = build_tfim(2, 1.0, 1.2);
    auto p = ChannelParams::standard(0.0, 2.0, 1.0, pauli_coupling_set(2));
    p.omega_nodes = 16;
    const DysonOrder2 dyson(p, model, 24);
    Lcg rng(41);
    const Operator rho = random_density(4, rng);

    // α = 0: unitary conjugation over the full window
    const Operator us = expm_herm(model.matrix, 2 * p.T);
    CHECK(max_abs(dyson.apply(rho, 0.0) - us * rho * us.adjoint()) < 1e-12);

    // trace preserving order by order
    CHECK(std::abs(dyson.correction(Operator::Identity(4, 4) / 4.0).trace()) < 1e-8);
    for (int trial = 0; trial < 3; ++trial) CHECK(std::abs(dyson.correction(random_density(4, rng)).trace()) < 1e-8);
    CHECK(is_hermitian(dyson.correction(rho), 1e-10));

    // remainder against the exact channel is fourth order in α
    std::vector<double> errors;
    for (double alpha : {0.01, 0.02, 0.04}) {
        p.alpha = alpha;
        errors.push_back(trace_norm(apply_channel_exact(rho, p, model) - dyson.apply(rho, alpha)));
    }
    for (std::size_t i = 1; i < errors.size(); ++i) CHECK(std::log2(errors[i] / errors[i - 1]) == Catch::Approx(4).margin(0.3));

    p.alpha = 0.02;
    CHECK(max_abs(dyson_channel_order2(rho, p, model, 24) - dyson.apply(rho, 0.02)) < 1e-14);
}

TEST_CASE("thermal residual table", "[dyson]") {
    const auto model = build_tfim(2, 1.0, 1.2);
    auto base = ChannelParams::standard(0.0, 2.0, 1.0, pauli_coupling_set(2));
    base.omega_nodes = 32;
    const auto zero = thermal_residual_scaling(model, base, {2.0}, 0.0);
    REQUIRE(zero.size() == 1);
    CHECK(zero[0].residual <= 1e-10);

    const auto rows = thermal_residual_scaling(model, base, {2.0, 4.0}, 1.0);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].alpha == Catch::Approx(1 / std::sqrt(2.0)));
    CHECK(rows[1].alpha == Catch::Approx(0.5));
    CHECK(rows[1].residual < rows[0].residual);
    CHECK(rows[0].normalized == Catch::Approx(rows[0].residual * 2.0 / 0.5));
}
