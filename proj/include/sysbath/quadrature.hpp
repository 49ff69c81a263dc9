// quadrature.hpp: Gauss–Legendre rules, composite panels, and iterated integrals
// over ordered simplices lo < t1 <= t2 <= ... <= tk < hi.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace sysbath::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

// n-point Gauss–Legendre rule on [-1, 1]. Cached per n; thread-safe.
const Rule& gauss_legendre(int n);

// Same rule mapped to [a, b].
Rule gauss_legendre(int n, double a, double b);

// Equal-width panels on [lo, hi], each carrying an n-point Gauss–Legendre rule.
struct CompositeRule {
    double lo = 0;
    double hi = 0;
    int panels = 1;
    int nodes = 0;

    double width() const { return (hi - lo) / panels; }
    double panel_start(int j) const { return lo + j * width(); }
    int panel_of(double t) const;
    Rule flatten() const;
};

// Panel count resolving oscillations up to `bandwidth` (rad per unit time) on [lo, hi].
int panels_for_bandwidth(double lo, double hi, double bandwidth);

enum class Ordering {
    // ∫ F_1(t1) F_2(t2) ... F_k(tk) with t1 <= ... <= tk (left factor earliest)
    EarliestLeft,
    // ∫ F_k(tk) ... F_2(t2) F_1(t1) with t1 <= ... <= tk (left factor latest)
    LatestLeft,
};

namespace detail {

template <class Value>
Value multiply(const Value& a, const Value& b) {
    return a * b;
}

}  // namespace detail

// Iterated Gauss–Legendre over the ordered simplex with nested upper limits.
// factor(p, t) returns the p-th integrand factor (p = 1..k); `one` is the
// multiplicative identity (I for operators, 1 for scalars). Returns all
// orders 1..k evaluated at the upper limit.
//
// Nested limits are resolved per panel: the inner integral up to t is the
// cumulative sum over complete panels plus a mapped rule on the partial panel.
template <class Value>
class OrderedIntegrator {
public:
    using Factor = std::function<Value(int, double)>;

    OrderedIntegrator(CompositeRule rule, int max_order, Factor factor, Value one, Value zero,
                      Ordering ordering = Ordering::EarliestLeft)
        : rule_(rule), k_(max_order), factor_(std::move(factor)), one_(std::move(one)), zero_(std::move(zero)),
          ordering_(ordering), ref_(gauss_legendre(rule.nodes)) {
        if (max_order < 1) throw std::invalid_argument("OrderedIntegrator: order must be >= 1");
        if (rule.nodes < 1 || rule.panels < 1) throw std::invalid_argument("OrderedIntegrator: empty rule");
        cumulative_.assign(static_cast<std::size_t>(k_) + 1, {});
        for (int p = 1; p <= k_; ++p) build_cumulative(p);
    }

    // ∫ over the full simplex for orders 1..k (index 0 holds order 1).
    std::vector<Value> totals() const {
        std::vector<Value> out;
        out.reserve(static_cast<std::size_t>(k_));
        for (int p = 1; p <= k_; ++p) out.push_back(cumulative_[p].back());
        return out;
    }

    Value total(int order) const { return cumulative_.at(static_cast<std::size_t>(order)).back(); }

private:
    Value combine(const Value& inner, const Value& f) const {
        return ordering_ == Ordering::EarliestLeft ? detail::multiply(inner, f) : detail::multiply(f, inner);
    }

    // L_p(t): ordered integral of the first p factors with upper limit t.
    Value eval(int p, double t) const {
        if (p == 0) return one_;
        const int j = rule_.panel_of(t);
        Value acc = cumulative_[p][static_cast<std::size_t>(j)];
        const double a = rule_.panel_start(j);
        if (t <= a) return acc;
        const double half = 0.5 * (t - a);
        const double mid = 0.5 * (t + a);
        for (std::size_t q = 0; q < ref_.size(); ++q) {
            const double s = mid + half * ref_.nodes[q];
            acc += (half * ref_.weights[q]) * combine(eval(p - 1, s), factor_(p, s));
        }
        return acc;
    }

    void build_cumulative(int p) {
        auto& c = cumulative_[static_cast<std::size_t>(p)];
        c.assign(static_cast<std::size_t>(rule_.panels) + 1, zero_);
        const double half = 0.5 * rule_.width();
        for (int j = 0; j < rule_.panels; ++j) {
            const double mid = rule_.panel_start(j) + half;
            Value acc = c[static_cast<std::size_t>(j)];
            for (std::size_t q = 0; q < ref_.size(); ++q) {
                const double s = mid + half * ref_.nodes[q];
                acc += (half * ref_.weights[q]) * combine(eval(p - 1, s), factor_(p, s));
            }
            c[static_cast<std::size_t>(j) + 1] = acc;
        }
    }

    CompositeRule rule_;
    int k_;
    Factor factor_;
    Value one_;
    Value zero_;
    Ordering ordering_;
    const Rule& ref_;
    std::vector<std::vector<Value>> cumulative_;
};

}  // namespace sysbath::quad
