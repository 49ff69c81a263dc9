// dyson.cpp: G_k / F_k on the ordered simplex and the identity checks.
//
// Everything is evaluated in the eigenbasis of H, where A(t) = Ã ∘ E(t) with
// E_ij = e^{i(λ_i − λ_j)t}, so no matrix exponentials are needed per node.

#include "sysbath/dyson.hpp"

#include "sysbath/parallel.hpp"
#include "sysbath/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace sysbath {

namespace {

constexpr double kPi = std::numbers::pi;

// A panel may span at most 2 units of the Gaussian's natural scale.
int panel_count(double lo, double hi, double bandwidth, double gaussian_scale) {
    const int by_phase = quad::panels_for_bandwidth(lo, hi, bandwidth);
    const int by_envelope = static_cast<int>(std::ceil((hi - lo) / (2.0 * gaussian_scale) - 1e-9));
    return std::max(by_phase, by_envelope);
}

void check_order(int k, int nodes) {
    if (k < 0 || k > 3) throw std::invalid_argument("Dyson terms are limited to 0 <= k <= 3");
    if (nodes < 8) throw std::invalid_argument("Dyson quadrature needs at least 8 nodes per panel");
}

}  // namespace

Operator heisenberg(const Operator& a, const HamiltonianModel& model, double t) {
    return expm_herm(model.matrix, -t) * a * expm_herm(model.matrix, t);
}

double profile_integral(double sigma, double T) {
    const double total = std::pow(2.0, 0.75) * std::pow(kPi, 0.25) * std::sqrt(sigma);
    return std::isinf(T) ? total : total * std::erf(T / (2.0 * sigma));
}

DysonFrame::DysonFrame(const HamiltonianModel& model, const Operator& a) : eig_(herm_eig(model.matrix)) {
    if (a.rows() != model.dim() || a.cols() != model.dim())
        throw InvalidOperator("DysonFrame: coupling dimension does not match the model");
    a_ = eig_.eigenvectors.adjoint() * a * eig_.eigenvectors;
    ad_ = a_.adjoint();
}

double DysonFrame::bohr_bandwidth() const {
    return eig_.eigenvalues.maxCoeff() - eig_.eigenvalues.minCoeff();
}

Operator DysonFrame::to_computational(const Operator& x) const {
    return eig_.eigenvectors * x * eig_.eigenvectors.adjoint();
}

namespace {

// S ∘ E(t) · scale
Operator rotate(const Operator& s, const RealVector<double>& lambda, double t, Complex scale) {
    const Eigen::Index d = s.rows();
    StateVector u(d);
    for (Eigen::Index i = 0; i < d; ++i) u(i) = std::exp(Complex(0, lambda(i) * t));
    Operator out(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const Complex cj = std::conj(u(j)) * scale;
        for (Eigen::Index i = 0; i < d; ++i) out(i, j) = s(i, j) * u(i) * cj;
    }
    return out;
}

}  // namespace

std::vector<Operator> DysonFrame::terms(DysonKind kind, int max_k, double omega, double sigma, double T, int nodes,
                                        int* panels_out) const {
    check_order(max_k, nodes);
    if (max_k < 1) throw std::invalid_argument("DysonFrame::terms: max_k must be >= 1");
    const double cutoff = std::isinf(T) ? kInfiniteCutoff * sigma : T;
    const Eigen::Index d = a_.rows();
    if (cutoff <= 0) {
        std::vector<Operator> zeros(static_cast<std::size_t>(max_k), Operator::Zero(d, d));
        return zeros;
    }
    quad::CompositeRule rule{-cutoff, cutoff, panel_count(-cutoff, cutoff, bohr_bandwidth() + std::abs(omega), sigma),
                             nodes};
    if (panels_out) *panels_out = rule.panels;

    // G: odd factors A, even A†, phase e^{-iω(−1)^p t}.  F: swapped, e^{+iω(−1)^p t}.
    const double phase_sign = kind == DysonKind::G ? -1.0 : 1.0;
    auto factor = [&](int p, double t) -> Operator {
        const bool odd = p % 2 == 1;
        const Operator& s = (kind == DysonKind::G) == odd ? a_ : ad_;
        const double parity = odd ? -1.0 : 1.0;
        const Complex scale = gaussian_profile(t, sigma) * std::exp(Complex(0, phase_sign * omega * parity * t));
        return rotate(s, eig_.eigenvalues, t, scale);
    };
    quad::OrderedIntegrator<Operator> integ(rule, max_k, factor, Operator::Identity(d, d), Operator::Zero(d, d),
                                            quad::Ordering::EarliestLeft);
    std::vector<Operator> out;
    for (const auto& x : integ.totals()) out.push_back(to_computational(x));
    return out;
}

Operator DysonFrame::shifted_adjoint_term(int k, double omega, double beta, double sigma, int nodes) const {
    check_order(k, nodes);
    if (k < 1 || k > 2) throw std::invalid_argument("shifted_adjoint_term: k must be 1 or 2");
    const Eigen::Index d = a_.rows();
    const double lo = -kInfiniteCutoff / 2.0, hi = kInfiniteCutoff / 2.0;  // τ = t / 2σ
    const double bandwidth = 2.0 * sigma * (bohr_bandwidth() + std::abs(omega)) + beta / sigma;
    quad::CompositeRule rule{lo, hi, panel_count(lo, hi, bandwidth, 1.0), nodes};

    // factors of G†: odd p → A†, even p → A; latest time on the left
    auto factor = [&](int p, double tau) -> Operator {
        const bool odd = p % 2 == 1;
        const Operator& s = odd ? ad_ : a_;
        const double parity = odd ? -1.0 : 1.0;
        const Complex w = std::exp(Complex(-tau * tau, 2.0 * sigma * omega * parity * tau - beta * tau / sigma));
        return rotate(s, eig_.eigenvalues, 2.0 * sigma * tau, w);
    };
    quad::OrderedIntegrator<Operator> integ(rule, k, factor, Operator::Identity(d, d), Operator::Zero(d, d),
                                            quad::Ordering::LatestLeft);
    const double pref = std::pow(2.0 * std::sqrt(sigma) / std::pow(2.0 * kPi, 0.25), k) *
                        std::exp(k * beta * beta / (4.0 * sigma * sigma) - omega * beta * lambda_indicator(k));
    return to_computational(pref * integ.total(k));
}

namespace {

DysonTerm make_term(DysonKind kind, int k, const Operator& a, const HamiltonianModel& model, double omega,
                    double sigma, double T, int nodes) {
    check_order(k, nodes);
    DysonFrame frame(model, a);
    DysonTerm term;
    term.kind = kind;
    term.k = k;
    term.omega = omega;
    term.infinite = std::isinf(T);
    term.T_cutoff = term.infinite ? kInfiniteCutoff * sigma : T;
    term.nodes = nodes;
    if (k == 0) {  // empty product
        term.op = Operator::Identity(model.dim(), model.dim());
        return term;
    }
    term.op = frame.terms(kind, k, omega, sigma, T, nodes, &term.panels).back();
    return term;
}

}  // namespace

DysonTerm compute_G(int k, const Operator& a, const HamiltonianModel& model, double omega, double sigma, double T,
                    int nodes) {
    return make_term(DysonKind::G, k, a, model, omega, sigma, T, nodes);
}

DysonTerm compute_F(int k, const Operator& a, const HamiltonianModel& model, double omega, double sigma, double T,
                    int nodes) {
    return make_term(DysonKind::F, k, a, model, omega, sigma, T, nodes);
}

// ---------------------------------------------------------------------------
// Order-α² channel

DysonOrder2::DysonOrder2(const ChannelParams& params, const HamiltonianModel& model, int nodes) {
    params.validate();
    u_half_ = expm_herm(model.matrix, params.T);
    const auto reps = coupling_representatives(params.coupling);
    const auto rule = quad::gauss_legendre(params.omega_nodes, params.omega_lo, params.omega_hi);

    struct Job {
        std::size_t rep;
        std::size_t node;
    };
    std::vector<Job> jobs;
    for (std::size_t r = 0; r < reps.size(); ++r)
        for (std::size_t q = 0; q < rule.size(); ++q) jobs.push_back({r, q});

    std::vector<DysonFrame> frames;
    for (const auto& [idx, w] : reps) frames.emplace_back(model, params.coupling.members[idx]);

    branches_ = parallel_map<Branch>(jobs.size(), params.threads, [&](std::size_t i) {
        const auto& job = jobs[i];
        const double omega = rule.nodes[job.node];
        const BathSpec bath = make_bath(omega, params.beta, params.bath_init);
        Branch b;
        b.weight = reps[job.rep].second * rule.weights[job.node] * params.omega_density();
        b.p0 = bath.population(0);
        b.p1 = bath.population(1);
        const auto& frame = frames[job.rep];
        const auto neg = frame.terms(DysonKind::G, 2, -omega, params.sigma, params.T, nodes);
        b.g1_neg = neg[0];
        b.g2_neg = neg[1];
        if (b.p1 > 0) {
            const auto pos = frame.terms(DysonKind::G, 2, omega, params.sigma, params.T, nodes);
            b.g1_pos = pos[0];
            b.g2_pos = pos[1];
        }
        return b;
    });
}

Operator DysonOrder2::correction(const Operator& rho) const {
    auto x = [&](const Operator& g1, const Operator& g2) -> Operator {
        return g2.adjoint() * rho - g1.adjoint() * rho * g1 + rho * g2;
    };
    Operator out = Operator::Zero(rho.rows(), rho.cols());
    // ∫γ(ω) X(ω) dω = ∫ g(ω) [X(ω)/(1+e^{βω}) + X(−ω)/(1+e^{−βω})] dω
    for (const auto& b : branches_) {
        if (b.p0 > 0) out += (b.weight * b.p0) * x(b.g1_neg, b.g2_neg);
        if (b.p1 > 0) out += (b.weight * b.p1) * x(b.g1_pos, b.g2_pos);
    }
    return out;
}

Operator DysonOrder2::apply(const Operator& rho, double alpha) const {
    const Operator rho1 = u_half_ * rho * u_half_.adjoint();
    const Operator mid = rho1 - (alpha * alpha) * correction(rho1);
    return u_half_ * mid * u_half_.adjoint();
}

Operator dyson_channel_order2(const Operator& rho, const ChannelParams& params, const HamiltonianModel& model,
                              int nodes) {
    return DysonOrder2(params, model, nodes).apply(rho, params.alpha);
}

// ---------------------------------------------------------------------------
// Identity checks

double avoid_db_residual(const HamiltonianModel& model, const CouplingSet& coupling, double beta, double sigma,
                         int nodes, const AvoidDbOptions& options) {
    if (coupling.members.empty()) throw std::invalid_argument("avoid_db_residual: empty coupling set");
    const auto reps = coupling_representatives(coupling);
    const auto rule = quad::gauss_legendre(options.omega_nodes, options.omega_lo, options.omega_hi);
    const double density = 1.0 / (options.omega_hi - options.omega_lo);
    const double middle_sign = options.corrupt_gamma ? 1.0 : -1.0;

    std::vector<DysonFrame> frames;
    for (const auto& [idx, w] : reps) frames.emplace_back(model, coupling.members[idx]);

    struct Job {
        std::size_t rep;
        std::size_t node;
    };
    std::vector<Job> jobs;
    for (std::size_t r = 0; r < reps.size(); ++r)
        for (std::size_t q = 0; q < rule.size(); ++q) jobs.push_back({r, q});

    const auto parts = parallel_map<Operator>(jobs.size(), options.threads, [&](std::size_t i) {
        const auto& job = jobs[i];
        const double omega = rule.nodes[job.node];
        const double w = reps[job.rep].second * rule.weights[job.node] * density;
        const auto [p0, p1] = bath_populations(omega, beta);
        const auto pos = frames[job.rep].terms(DysonKind::G, 2, omega, sigma, kInfiniteT, nodes);
        const auto neg = frames[job.rep].terms(DysonKind::G, 2, -omega, sigma, kInfiniteT, nodes);
        auto outer = [](const std::vector<Operator>& g) -> Operator { return g[1].adjoint() + g[1]; };
        auto middle = [](const std::vector<Operator>& g) -> Operator { return g[0].adjoint() * g[0]; };
        // ∫γ(ω)Y(ω) → g(ω)[p1 Y(ω) + p0 Y(−ω)];  ∫γ(−ω)Z(ω) → g(ω)[p1 Z(−ω) + p0 Z(ω)]
        Operator r = p1 * outer(pos) + p0 * outer(neg);
        r += middle_sign * (p1 * middle(neg) + p0 * middle(pos));
        return Operator(w * r);
    });
    Operator total = Operator::Zero(model.dim(), model.dim());
    for (const auto& p : parts) total += p;
    return operator_norm(total);
}

double conjugation_identity_check(int k, const Operator& a, const HamiltonianModel& model, double omega, double beta,
                                  double sigma, int nodes) {
    if (k < 1 || k > 2) throw std::invalid_argument("conjugation_identity_check: k must be 1 or 2");
    if (!(beta >= 0) || std::isinf(beta)) throw std::invalid_argument("conjugation_identity_check: beta must be finite");
    DysonFrame frame(model, a);
    const auto& lambda = frame.eig().eigenvalues;
    if (beta * (lambda.maxCoeff() - lambda.minCoeff()) > std::log(1e14))
        throw std::invalid_argument("conjugation_identity_check: sigma_beta is too ill-conditioned; lower beta");

    const Operator g = frame.terms(DysonKind::G, k, omega, sigma, kInfiniteT, nodes).back();
    const double shift = lambda.minCoeff();
    const auto& e = frame.eig();
    const Operator sigma_inv = e.apply([&](double l) { return Complex(std::exp(beta * (l - shift)), 0); });
    const Operator sigma_b = e.apply([&](double l) { return Complex(std::exp(-beta * (l - shift)), 0); });
    const Operator direct = sigma_inv * g.adjoint() * sigma_b;
    const Operator shifted = frame.shifted_adjoint_term(k, omega, beta, sigma, nodes);
    return operator_norm(direct - shifted);
}

MultiFourierResult multifourier_bound_check(const std::vector<double>& alphas, double sigma, int nodes) {
    const int n = static_cast<int>(alphas.size());
    if (n < 1 || n > 3) throw std::invalid_argument("multifourier_bound_check: need 1 to 3 frequencies");
    if (nodes < 8) throw std::invalid_argument("multifourier_bound_check: need at least 8 nodes");
    const double cutoff = kInfiniteCutoff * sigma;
    double bandwidth = 0, total = 0;
    for (double a : alphas) {
        bandwidth = std::max(bandwidth, std::abs(a));
        total += a;
    }
    quad::CompositeRule rule{-cutoff, cutoff, panel_count(-cutoff, cutoff, bandwidth, sigma), nodes};
    // s_n ≤ … ≤ s_1: the p-th earliest variable carries α_{n+1−p}
    auto factor = [&](int p, double s) -> Complex {
        return gaussian_profile(s, sigma) * std::exp(Complex(0, alphas[static_cast<std::size_t>(n - p)] * s));
    };
    quad::OrderedIntegrator<Complex> integ(rule, n, factor, Complex(1), Complex(0));

    MultiFourierResult r;
    r.lhs = std::abs(integ.total(n));
    double fact = 1;
    for (int i = 2; i < n; ++i) fact *= i;
    r.rhs = 2.0 * sigma * std::sqrt(kPi) / std::sqrt(double(n)) * std::pow(2.0 * sigma * std::sqrt(n * kPi), n - 1) /
            fact * std::exp(-sigma * sigma * total * total / n);
    r.rhs_with_prefactor = r.rhs * std::pow(std::pow(2.0 * kPi, -0.25) / std::sqrt(sigma), n);
    return r;
}

std::vector<ResidualRow> thermal_residual_scaling(const HamiltonianModel& model, const ChannelParams& base,
                                                  const std::vector<double>& sigma_list, double c, double t_factor,
                                                  double dt_divisor) {
    std::vector<ResidualRow> rows;
    const TargetState target = target_state(model, base.beta);
    for (double sigma : sigma_list) {
        ChannelParams p = base;
        p.sigma = sigma;
        p.alpha = c / std::sqrt(sigma);
        p.T = t_factor * sigma;
        p.dt = sigma / dt_divisor;
        ResidualRow row;
        row.sigma = sigma;
        row.alpha = p.alpha;
        row.residual = trace_norm(apply_channel_exact(target.matrix, p, model) - target.matrix);
        row.normalized = p.alpha > 0 ? row.residual * sigma / (p.alpha * p.alpha) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sysbath
