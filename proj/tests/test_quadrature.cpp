// Gauss–Legendre rules and ordered-simplex integration.

#include "sysbath/quadrature.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

using namespace sysbath::quad;

TEST_CASE("Gauss-Legendre integrates polynomials exactly", "[quadrature]") {
    for (int n : {1, 2, 5, 16, 48, 64}) {
        const Rule& r = gauss_legendre(n);
        REQUIRE(r.size() == static_cast<std::size_t>(n));
        for (int deg = 0; deg <= 2 * n - 1 && deg <= 40; ++deg) {
            double s = 0;
            for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], deg);
            const double exact = deg % 2 == 1 ? 0.0 : 2.0 / (deg + 1);
            CHECK(s == Catch::Approx(exact).margin(1e-13));
        }
        for (std::size_t i = 1; i < r.size(); ++i) CHECK(r.nodes[i - 1] < r.nodes[i]);
    }
    CHECK_THROWS(gauss_legendre(0));
}

TEST_CASE("mapped rule integrates a Gaussian", "[quadrature]") {
    const Rule r = gauss_legendre(64, -10, 10);
    double s = 0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::exp(-r.nodes[i] * r.nodes[i]);
    CHECK(s == Catch::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
}

TEST_CASE("ordered simplex volume", "[quadrature]") {
    // ∫_{0<t1<...<tk<1} 1 = 1/k!
    CompositeRule rule{0, 1, 3, 8};
    OrderedIntegrator<double> integ(rule, 3, [](int, double) { return 1.0; }, 1.0, 0.0);
    CHECK(integ.total(1) == Catch::Approx(1.0));
    CHECK(integ.total(2) == Catch::Approx(0.5));
    CHECK(integ.total(3) == Catch::Approx(1.0 / 6));
}

TEST_CASE("ordered integral of separable factors", "[quadrature]") {
    // ∫_{0<t1<t2<1} t1 · t2² = ∫ t2² · t2²/2 = 1/10
    CompositeRule rule{0, 1, 2, 8};
    OrderedIntegrator<double> integ(
        rule, 2, [](int p, double t) { return p == 1 ? t : t * t; }, 1.0, 0.0);
    CHECK(integ.total(2) == Catch::Approx(0.1).epsilon(1e-13));
}

TEST_CASE("ordered integral of oscillatory phases", "[quadrature]") {
    // ∫_{0<t1<t2<L} e^{i a t1} e^{i b t2} in closed form
    using C = std::complex<double>;
    const double a = 3.0, b = -1.7, L = 5.0;
    CompositeRule rule{0, L, panels_for_bandwidth(0, L, 4), 16};
    OrderedIntegrator<C> integ(
        rule, 2, [&](int p, double t) { return std::exp(C(0, (p == 1 ? a : b) * t)); }, C(1), C(0));
    const C i(0, 1);
    // inner: (e^{i a t2} − 1)/(i a); outer: ∫ e^{i b t}(e^{i a t} − 1)/(i a)
    const C exact = ((std::exp(i * (a + b) * L) - 1.0) / (i * (a + b)) - (std::exp(i * b * L) - 1.0) / (i * b)) / (i * a);
    CHECK(std::abs(integ.total(2) - exact) < 1e-12);
}

TEST_CASE("ordering of non-commuting factors", "[quadrature]") {
    // factor p is a constant matrix M_p; the simplex volume multiplies M1 M2 or M2 M1
    Eigen::Matrix2d m1, m2;
    m1 << 0, 1, 0, 0;
    m2 << 0, 0, 1, 0;
    CompositeRule rule{0, 1, 2, 8};
    auto f = [&](int p, double) -> Eigen::Matrix2d { return p == 1 ? m1 : m2; };
    OrderedIntegrator<Eigen::Matrix2d> early(rule, 2, f, Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Zero(),
                                             Ordering::EarliestLeft);
    OrderedIntegrator<Eigen::Matrix2d> late(rule, 2, f, Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Zero(),
                                            Ordering::LatestLeft);
    CHECK((early.total(2) - 0.5 * m1 * m2).norm() < 1e-14);
    CHECK((late.total(2) - 0.5 * m2 * m1).norm() < 1e-14);
}

TEST_CASE("panel count follows bandwidth", "[quadrature]") {
    CHECK(panels_for_bandwidth(0, 1, 0) == 2);
    CHECK(panels_for_bandwidth(-10, 10, 6) == 10);
}
