// quadrature.cpp: Gauss–Legendre nodes by Newton iteration on P_n, composite panels.

#include "sysbath/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace sysbath::quad {

namespace {

Rule compute_gauss_legendre(int n) {
    Rule r;
    if (n == 1) return Rule{{0.0}, {2.0}};
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged root
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[static_cast<std::size_t>(i)] = -x;
        r.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        r.weights[static_cast<std::size_t>(i)] = w;
        r.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) r.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return r;
}

}  // namespace

const Rule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<Rule>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Rule>(compute_gauss_legendre(n));
    return *slot;
}

Rule gauss_legendre(int n, double a, double b) {
    Rule r = gauss_legendre(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r.nodes[i] = mid + half * r.nodes[i];
        r.weights[i] *= half;
    }
    return r;
}

int CompositeRule::panel_of(double t) const {
    const int j = static_cast<int>(std::floor((t - lo) / width()));
    return std::clamp(j, 0, panels - 1);
}

Rule CompositeRule::flatten() const {
    Rule out;
    for (int j = 0; j < panels; ++j) {
        const Rule r = gauss_legendre(nodes, panel_start(j), panel_start(j) + width());
        out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
        out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
    }
    return out;
}

int panels_for_bandwidth(double lo, double hi, double bandwidth) {
    // at most ~12 rad of phase per panel
    const double phase = (hi - lo) * std::max(bandwidth, 0.0);
    return std::max(2, static_cast<int>(std::ceil(phase / 12.0)));
}

}  // namespace sysbath::quad
