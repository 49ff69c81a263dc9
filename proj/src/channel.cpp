// channel.cpp: Joint propagation and the exact / sampled / pure-state channel.

#include "sysbath/channel.hpp"

#include "sysbath/parallel.hpp"
#include "sysbath/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace sysbath {

ChannelParams ChannelParams::standard(double alpha, double sigma, double beta, CouplingSet coupling, double t_factor,
                                      double dt_divisor) {
    ChannelParams p;
    p.alpha = alpha;
    p.sigma = sigma;
    p.beta = beta;
    p.T = t_factor * sigma;
    p.dt = sigma / dt_divisor;
    p.coupling = std::move(coupling);
    p.bath_init = std::isinf(beta) ? BathInit::Ground : BathInit::Thermal;
    return p;
}

long ChannelParams::steps() const {
    if (T == 0) return 0;
    return static_cast<long>(std::ceil(2.0 * T / dt - 1e-9));
}

void ChannelParams::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("ChannelParams: " + msg); };
    if (!(alpha >= 0) || !std::isfinite(alpha)) fail("alpha must be finite and >= 0");
    if (!(sigma > 0) || !std::isfinite(sigma)) fail("sigma must be > 0");
    if (!(T >= 0) || !std::isfinite(T)) fail("T must be finite and >= 0");
    if (!(dt > 0)) fail("dt must be > 0");
    if (!(beta >= 0)) fail("beta must be >= 0");
    if (!(omega_hi > omega_lo) || !std::isfinite(omega_lo) || !std::isfinite(omega_hi))
        fail("omega interval must be finite and non-empty");
    if (omega_nodes < 1) fail("omega_nodes must be >= 1");
    if (coupling.members.empty()) fail("coupling set is empty");
    if (!override_time_policy) {
        if (T < 5.0 * sigma * (1 - 1e-12)) fail("T must be >= 5 sigma (set override_time_policy to bypass)");
        if (dt > sigma / 50.0 * (1 + 1e-12)) fail("dt must be <= sigma/50 (set override_time_policy to bypass)");
    }
    if (2.0 * T / dt > 1e7) fail("more than 1e7 time steps");
}

std::pair<double, double> bath_populations(double omega, double beta) {
    if (std::isinf(beta)) {
        if (omega > 0) return {1.0, 0.0};
        if (omega < 0) return {0.0, 1.0};
        return {0.5, 0.5};
    }
    // 1/(1+e^{-x}) evaluated without overflow
    const double x = beta * omega;
    const double p0 = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    const double p1 = x >= 0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
    return {p0, p1};
}

BathSpec make_bath(double omega, double beta, BathInit init) {
    BathSpec b;
    b.omega = omega;
    b.h_env = -0.5 * omega * pauli_z();
    b.b_env = Operator::Zero(2, 2);
    b.b_env(1, 0) = 1;
    b.rho_env = Operator::Zero(2, 2);
    if (init == BathInit::Ground) {
        b.rho_env(0, 0) = 1;
    } else {
        const auto [p0, p1] = bath_populations(omega, beta);
        b.rho_env(0, 0) = p0;
        b.rho_env(1, 1) = p1;
    }
    return b;
}

double gaussian_profile(double t, double sigma) {
    if (!(sigma > 0)) throw std::invalid_argument("gaussian_profile: sigma must be > 0");
    return std::pow(2.0 * std::numbers::pi, -0.25) / std::sqrt(sigma) * std::exp(-t * t / (4.0 * sigma * sigma));
}

namespace {

struct JointParts {
    Operator h0;     // H ⊗ I + I ⊗ H_E
    Operator coupl;  // A ⊗ B + A† ⊗ B†
};

JointParts joint_parts(const HamiltonianModel& model, const Operator& a, const BathSpec& bath) {
    if (a.rows() != model.dim() || a.cols() != model.dim())
        throw InvalidOperator("coupling operator dimension does not match the model");
    const Operator id_s = Operator::Identity(model.dim(), model.dim());
    const Operator id_e = Operator::Identity(2, 2);
    JointParts parts;
    parts.h0 = kron(model.matrix, id_e) + kron(id_s, bath.h_env);
    parts.coupl = kron(a, bath.b_env);
    parts.coupl += parts.coupl.adjoint().eval();
    return parts;
}

}  // namespace

Operator joint_hamiltonian(const HamiltonianModel& model, const Operator& a, const BathSpec& bath, double t,
                           double alpha, double sigma) {
    const auto parts = joint_parts(model, a, bath);
    return parts.h0 + (alpha * gaussian_profile(t, sigma)) * parts.coupl;
}

Operator propagate_joint(const ChannelParams& params, const HamiltonianModel& model, const Operator& a,
                         const BathSpec& bath) {
    params.validate();
    const auto parts = joint_parts(model, a, bath);
    const Eigen::Index n = parts.h0.rows();
    const long steps = params.steps();
    Operator u = Operator::Identity(n, n);
    if (steps == 0) return u;
    const double h = 2.0 * params.T / static_cast<double>(steps);

    Eigen::SelfAdjointEigenSolver<Operator> solver(n);
    Operator h_t(n, n);
    StateVector phases(n);
    for (long k = 0; k < steps; ++k) {
        const double t = -params.T + (static_cast<double>(k) + 0.5) * h;
        h_t = parts.h0 + (params.alpha * gaussian_profile(t, params.sigma)) * parts.coupl;
        solver.compute(h_t);
        if (solver.info() != Eigen::Success) throw std::runtime_error("propagate_joint: eigensolver failed");
        for (Eigen::Index i = 0; i < n; ++i) phases(i) = std::exp(Complex(0, -solver.eigenvalues()(i) * h));
        u = (solver.eigenvectors() * phases.asDiagonal() * (solver.eigenvectors().adjoint() * u)).eval();
    }
    return u;
}

Operator bath_block(const Operator& u, int e_out, int e_in) {
    const Eigen::Index d = u.rows() / 2;
    Operator k(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) k(i, j) = u(2 * i + e_out, 2 * j + e_in);
    return k;
}

std::vector<std::pair<std::size_t, double>> coupling_representatives(const CouplingSet& coupling) {
    const auto& members = coupling.members;
    const double w_member = 1.0 / static_cast<double>(members.size());
    std::vector<std::pair<std::size_t, double>> reps;
    std::vector<int> rep_of(members.size(), -1);
    for (std::size_t i = 0; i < members.size(); ++i) {
        const int partner = coupling.negation_partner(i);
        if (partner >= 0 && static_cast<std::size_t>(partner) < i) {
            const int r = rep_of[static_cast<std::size_t>(partner)];
            reps[static_cast<std::size_t>(r)].second += w_member;
            rep_of[i] = r;
            continue;
        }
        rep_of[i] = static_cast<int>(reps.size());
        reps.emplace_back(i, w_member);
    }
    return reps;
}

namespace {

struct Branch {
    std::size_t a_index;
    double a_weight;
    double omega;
    double omega_weight;
};

std::vector<Branch> exact_branches(const ChannelParams& params) {
    const auto reps = coupling_representatives(params.coupling);
    const auto rule = quad::gauss_legendre(params.omega_nodes, params.omega_lo, params.omega_hi);
    std::vector<Branch> out;
    for (const auto& [idx, w] : reps)
        for (std::size_t q = 0; q < rule.size(); ++q)
            out.push_back({idx, w, rule.nodes[q], rule.weights[q] * params.omega_density()});
    return out;
}

std::vector<WeightedKraus> branch_kraus(const Operator& u, const BathSpec& bath, double weight) {
    std::vector<WeightedKraus> out;
    for (int e = 0; e < 2; ++e) {
        const double p = bath.population(e);
        if (p <= 0) continue;
        for (int e_out = 0; e_out < 2; ++e_out) out.push_back({weight * p, bath_block(u, e_out, e)});
    }
    return out;
}

Operator apply_kraus(const std::vector<WeightedKraus>& kraus, const Operator& rho) {
    Operator out = Operator::Zero(rho.rows(), rho.cols());
    for (const auto& [w, k] : kraus) out.noalias() += w * (k * rho * k.adjoint());
    return out;
}

}  // namespace

ExactChannel::ExactChannel(const ChannelParams& params, const HamiltonianModel& model) : dim_(model.dim()) {
    params.validate();
    const auto branches = exact_branches(params);
    auto per_branch = parallel_map<std::vector<WeightedKraus>>(branches.size(), params.threads, [&](std::size_t i) {
        const auto& br = branches[i];
        const BathSpec bath = make_bath(br.omega, params.beta, params.bath_init);
        const Operator u = propagate_joint(params, model, params.coupling.members[br.a_index], bath);
        return branch_kraus(u, bath, br.a_weight * br.omega_weight);
    });
    for (auto& group : per_branch)
        for (auto& k : group) kraus_.push_back(std::move(k));
    propagations_ = branches.size();
}

Operator ExactChannel::apply(const Operator& rho) const {
    if (rho.rows() != dim_ || rho.cols() != dim_) throw InvalidOperator("ExactChannel::apply: dimension mismatch");
    return apply_kraus(kraus_, rho);
}

Operator apply_channel_exact(const Operator& rho, const ChannelParams& params, const HamiltonianModel& model) {
    require_square(rho, "apply_channel_exact");
    return ExactChannel(params, model).apply(rho);
}

Draw draw_branch(const ChannelParams& params, Rng& rng) {
    Draw d;
    d.a_index = rng.index(params.coupling.size());
    d.omega = params.omega_lo + (params.omega_hi - params.omega_lo) * rng.uniform();
    return d;
}

std::pair<Operator, Draw> apply_channel_sampled(const Operator& rho, const ChannelParams& params,
                                                const HamiltonianModel& model, Rng& rng) {
    require_square(rho, "apply_channel_sampled");
    const Draw d = draw_branch(params, rng);
    const BathSpec bath = make_bath(d.omega, params.beta, params.bath_init);
    const Operator u = propagate_joint(params, model, params.coupling.members[d.a_index], bath);
    return {apply_kraus(branch_kraus(u, bath, 1.0), rho), d};
}

std::pair<StateVector, Draw> trajectory_pure(const StateVector& psi, const ChannelParams& params,
                                             const HamiltonianModel& model, Rng& rng) {
    const bool ground = params.bath_init == BathInit::Ground || std::isinf(params.beta);
    if (!ground) throw std::invalid_argument("trajectory_pure: requires a ground-state bath");
    if (psi.size() != model.dim()) throw InvalidOperator("trajectory_pure: dimension mismatch");
    Draw d = draw_branch(params, rng);
    const BathSpec bath = make_bath(d.omega, params.beta, BathInit::Ground);
    const Operator u = propagate_joint(params, model, params.coupling.members[d.a_index], bath);
    const StateVector phi0 = bath_block(u, 0, 0) * psi;
    const StateVector phi1 = bath_block(u, 1, 0) * psi;
    const double p0 = phi0.squaredNorm();
    const double p1 = phi1.squaredNorm();
    const double r = rng.uniform() * (p0 + p1);
    d.outcome = r < p0 ? 0 : 1;
    const double p = d.outcome == 0 ? p0 : p1;
    if (p < 1e-14) throw ZeroNormBranch("trajectory_pure: sampled branch has probability below 1e-14");
    StateVector out = (d.outcome == 0 ? phi0 : phi1) / std::sqrt(p);
    return {out, d};
}

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::Exact: return "exact";
        case Mode::Sampled: return "sampled";
        case Mode::Pure: return "pure";
    }
    return "?";
}

Mode parse_mode(const std::string& name) {
    if (name == "exact") return Mode::Exact;
    if (name == "sampled") return Mode::Sampled;
    if (name == "pure") return Mode::Pure;
    throw std::invalid_argument("unknown mode '" + name + "'");
}

namespace {

TrajectoryRow observe(int iter, const Operator& rho, const HamiltonianModel& model, const TargetState& target) {
    TrajectoryRow row;
    row.iter = iter;
    row.fidelity = fidelity(rho, target.matrix);
    row.energy = energy(model, rho);
    row.trace = std::real(rho.trace());
    return row;
}

TrajectoryRow observe_pure(int iter, const StateVector& psi, const HamiltonianModel& model, const TargetState& target) {
    TrajectoryRow row;
    row.iter = iter;
    row.fidelity = pure_fidelity(psi, target.matrix);
    row.energy = std::real(psi.dot(model.matrix * psi));
    row.trace = psi.squaredNorm();
    return row;
}

}  // namespace

TrajectoryRecord run_iterations(const Operator& initial, int n_iter, Mode mode, const ChannelParams& params,
                                const HamiltonianModel& model, const TargetState& target, std::uint64_t seed) {
    if (n_iter < 0) throw std::invalid_argument("run_iterations: n_iter must be >= 0");
    params.validate();
    TrajectoryRecord rec;
    rec.seed = seed;
    rec.params = params;
    rec.rows.reserve(static_cast<std::size_t>(n_iter) + 1);
    Rng rng(seed);

    if (mode == Mode::Pure) {
        if (initial.cols() != 1) throw InvalidOperator("run_iterations: pure mode needs a state vector");
        StateVector psi = initial.col(0);
        psi.normalize();
        rec.rows.push_back(observe_pure(0, psi, model, target));
        for (int it = 1; it <= n_iter; ++it) {
            auto [next, d] = trajectory_pure(psi, params, model, rng);
            psi = std::move(next);
            auto row = observe_pure(it, psi, model, target);
            row.a_index = static_cast<long>(d.a_index);
            row.omega = d.omega;
            rec.rows.push_back(row);
        }
        rec.final_state = projector<double>(psi);
        return rec;
    }

    Operator rho = initial.cols() == 1 ? Operator(projector<double>(initial.col(0))) : initial;
    require_density(rho, "run_iterations");
    rec.rows.push_back(observe(0, rho, model, target));
    std::optional<ExactChannel> exact;
    if (mode == Mode::Exact && n_iter > 0) exact.emplace(params, model);
    for (int it = 1; it <= n_iter; ++it) {
        TrajectoryRow row;
        if (mode == Mode::Exact) {
            rho = exact->apply(rho);
            rho = (rho + rho.adjoint()).eval() / 2.0;
            row = observe(it, rho, model, target);
        } else {
            auto [next, d] = apply_channel_sampled(rho, params, model, rng);
            rho = (next + next.adjoint()) / 2.0;
            row = observe(it, rho, model, target);
            row.a_index = static_cast<long>(d.a_index);
            row.omega = d.omega;
        }
        rec.rows.push_back(row);
    }
    rec.final_state = rho;
    return rec;
}

}  // namespace sysbath
