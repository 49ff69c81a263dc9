// channel.hpp: The system–bath interaction channel: joint propagation over [-T, T]
// with a one-qubit bath, trace-out and reset, averaged over couplings and bath
// frequencies either exactly (quadrature) or by sampling one branch per step.

#pragma once

#include "sysbath/models.hpp"
#include "sysbath/operators.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sysbath {

enum class BathInit { Thermal, Ground };

struct ChannelParams {
    double alpha = 0;
    double sigma = 1;
    double T = 5;
    double beta = 1;  // may be +inf
    double omega_lo = 0;
    double omega_hi = 5;
    double dt = 0.01;
    int omega_nodes = 64;
    BathInit bath_init = BathInit::Thermal;
    CouplingSet coupling;
    // Skip the T >= 5σ and dt <= σ/50 policy checks (convergence studies, T = 0).
    bool override_time_policy = false;
    int threads = 1;

    // T = t_factor·σ, dt = σ/dt_divisor.
    static ChannelParams standard(double alpha, double sigma, double beta, CouplingSet coupling,
                                  double t_factor = 5.0, double dt_divisor = 100.0);

    void validate() const;
    long steps() const;
    double omega_density() const { return 1.0 / (omega_hi - omega_lo); }
};

struct BathSpec {
    double omega = 0;
    Operator h_env;
    Operator b_env;
    Operator rho_env;

    double population(int e) const { return std::real(rho_env(e, e)); }
};

// Thermal bath populations at frequency ω: (1/(1+e^{-βω}), 1/(1+e^{βω})).
std::pair<double, double> bath_populations(double omega, double beta);

BathSpec make_bath(double omega, double beta, BathInit init);

double gaussian_profile(double t, double sigma);

Operator joint_hamiltonian(const HamiltonianModel& model, const Operator& a, const BathSpec& bath, double t,
                           double alpha, double sigma);

// U^α(T): midpoint exponential steps over [-T, T].
Operator propagate_joint(const ChannelParams& params, const HamiltonianModel& model, const Operator& a,
                         const BathSpec& bath);

// One representative per {A, −A} pair with its summed uniform weight. ±A give
// identical channels (conjugate the bath by Z), so each pair is propagated once.
std::vector<std::pair<std::size_t, double>> coupling_representatives(const CouplingSet& coupling);

// System block ⟨e'|U|e⟩.
Operator bath_block(const Operator& u, int e_out, int e_in);

struct WeightedKraus {
    double weight;
    Operator k;
};

// Weighted Kraus decomposition of the exact channel: Φ(ρ) = Σ w K ρ K†.
// Built once per (params, model); applying it is then cheap.
class ExactChannel {
public:
    ExactChannel(const ChannelParams& params, const HamiltonianModel& model);

    Operator apply(const Operator& rho) const;
    Eigen::Index dim() const { return dim_; }
    const std::vector<WeightedKraus>& kraus() const { return kraus_; }
    std::size_t propagations() const { return propagations_; }

private:
    Eigen::Index dim_;
    std::vector<WeightedKraus> kraus_;
    std::size_t propagations_ = 0;
};

Operator apply_channel_exact(const Operator& rho, const ChannelParams& params, const HamiltonianModel& model);

// Deterministic generator: 53-bit uniforms from mt19937_64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::size_t index(std::size_t n) {
        const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

private:
    std::mt19937_64 engine_;
};

struct Draw {
    std::size_t a_index = 0;
    double omega = 0;
    int outcome = -1;  // bath measurement in pure mode
};

Draw draw_branch(const ChannelParams& params, Rng& rng);

std::pair<Operator, Draw> apply_channel_sampled(const Operator& rho, const ChannelParams& params,
                                                const HamiltonianModel& model, Rng& rng);

class ZeroNormBranch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::pair<StateVector, Draw> trajectory_pure(const StateVector& psi, const ChannelParams& params,
                                             const HamiltonianModel& model, Rng& rng);

enum class Mode { Exact, Sampled, Pure };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& name);

struct TrajectoryRow {
    int iter = 0;
    double fidelity = 0;
    double energy = 0;
    double trace = 0;
    long a_index = -1;  // -1 in exact mode and for the initial row
    double omega = std::numeric_limits<double>::quiet_NaN();
};

struct TrajectoryRecord {
    std::vector<TrajectoryRow> rows;
    std::uint64_t seed = 0;
    ChannelParams params;
    Operator final_state;  // density matrix (ψψ† in pure mode)
};

// `initial` is a density matrix, or a d×1 state vector in pure mode.
TrajectoryRecord run_iterations(const Operator& initial, int n_iter, Mode mode, const ChannelParams& params,
                                const HamiltonianModel& model, const TargetState& target, std::uint64_t seed);

}  // namespace sysbath
