// dyson.hpp: Dyson-series operators G_k, F_k on the ordered time simplex and
// numerical checks of the identities and bounds they satisfy.

#pragma once

#include "sysbath/channel.hpp"

#include <limits>
#include <vector>

namespace sysbath {

inline constexpr double kInfiniteT = std::numeric_limits<double>::infinity();
// G̃ (T = ∞) is evaluated on [-12σ, 12σ].
inline constexpr double kInfiniteCutoff = 12.0;

enum class DysonKind { G, F };

struct DysonTerm {
    DysonKind kind = DysonKind::G;
    int k = 0;
    double omega = 0;
    Operator op;
    double T_cutoff = 0;
    bool infinite = false;
    int nodes = 0;   // per panel
    int panels = 0;
};

Operator heisenberg(const Operator& a, const HamiltonianModel& model, double t);

// ∫_{-T}^{T} f(t) dt
double profile_integral(double sigma, double T);

// Eigenbasis of H plus the coupling operator expressed in it; shared by
// every G/F evaluation for one (A, H).
class DysonFrame {
public:
    DysonFrame(const HamiltonianModel& model, const Operator& a);

    // G_1..G_k (or F_1..F_k) at ω, in the computational basis.
    std::vector<Operator> terms(DysonKind kind, int max_k, double omega, double sigma, double T, int nodes,
                                int* panels_out = nullptr) const;

    // A(t) factors of G†_k with τ-scaled time and the shifted Gaussian weight.
    // Used by the conjugation identity; see conjugation_identity_check.
    Operator shifted_adjoint_term(int k, double omega, double beta, double sigma, int nodes) const;

    double bohr_bandwidth() const;
    const HermEigen<double>& eig() const { return eig_; }
    Operator to_computational(const Operator& x) const;

private:
    HermEigen<double> eig_;
    Operator a_;    // V† A V
    Operator ad_;   // V† A† V
};

DysonTerm compute_G(int k, const Operator& a, const HamiltonianModel& model, double omega, double sigma, double T,
                    int nodes);
DysonTerm compute_F(int k, const Operator& a, const HamiltonianModel& model, double omega, double sigma, double T,
                    int nodes);

// Order-α² truncation of the channel. The G operators do not depend on α, so
// one instance serves a whole α ladder.
class DysonOrder2 {
public:
    DysonOrder2(const ChannelParams& params, const HamiltonianModel& model, int nodes = 32);

    // Σ_A w ∫γ (G2† ρ − G1† ρ G1 + ρ G2) dω for an arbitrary operator ρ.
    Operator correction(const Operator& rho) const;

    // U_S(T) [ρ1 − α² correction(ρ1)] U_S(T)†, with ρ1 = U_S(T) ρ U_S(T)†.
    Operator apply(const Operator& rho, double alpha) const;

private:
    struct Branch {
        double weight;  // coupling weight × ω weight × g
        double p0, p1;
        Operator g1_pos, g2_pos, g1_neg, g2_neg;
    };
    Operator u_half_;
    std::vector<Branch> branches_;
};

Operator dyson_channel_order2(const Operator& rho, const ChannelParams& params, const HamiltonianModel& model,
                              int nodes = 32);

struct AvoidDbOptions {
    double omega_lo = 0;
    double omega_hi = 5;
    int omega_nodes = 64;
    bool corrupt_gamma = false;  // negative control: flip the sign of γ in the middle term
    int threads = 1;
};

// ‖𝔼_A Σ_k (−1)^k ∫ γ((−1)^k ω) G̃†_{2−k} G̃_k dω‖ with G̃ on the 12σ cutoff.
double avoid_db_residual(const HamiltonianModel& model, const CouplingSet& coupling, double beta, double sigma,
                         int nodes, const AvoidDbOptions& options = {});

// 0 for even k, −1 for odd k.
inline int lambda_indicator(int k) { return k % 2 == 0 ? 0 : -1; }

// ‖σ_β^{-1} G̃_k† σ_β − (contour-shifted integral)‖.
double conjugation_identity_check(int k, const Operator& a, const HamiltonianModel& model, double omega, double beta,
                                  double sigma, int nodes);

struct MultiFourierResult {
    double lhs = 0;
    double rhs = 0;                 // bound as stated, without the profile normalization
    double rhs_with_prefactor = 0;  // rhs · ((2π)^{-1/4} σ^{-1/2})^n
    bool holds() const { return lhs <= rhs * (1 + 1e-10) + 1e-14; }
};

MultiFourierResult multifourier_bound_check(const std::vector<double>& alphas, double sigma, int nodes);

struct ResidualRow {
    double sigma = 0;
    double alpha = 0;
    double residual = 0;     // ‖Φ_α(σ_β) − σ_β‖₁
    double normalized = 0;   // residual · σ / α²
};

// α = c σ^{-1/2} per row; `base` supplies everything except α, σ, T, dt.
std::vector<ResidualRow> thermal_residual_scaling(const HamiltonianModel& model, const ChannelParams& base,
                                                  const std::vector<double>& sigma_list, double c,
                                                  double t_factor = 5.0, double dt_divisor = 100.0);

}  // namespace sysbath
