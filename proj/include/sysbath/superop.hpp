// superop.hpp: The channel as a d²×d² matrix (column-stacking vec), its spectrum,
// spectral gap, fixed point and Choi matrix.

#pragma once

#include "sysbath/channel.hpp"

#include <optional>

namespace sysbath {

struct SuperoperatorMatrix {
    Eigen::Index d = 0;
    Operator matrix;  // vec(Φ(ρ)) = matrix · vec(ρ), vec stacks columns
    std::optional<ChannelParams> params;
};

Eigen::Map<const StateVector> vec_view(const Operator& rho);
StateVector vec(const Operator& rho);
Operator unvec(const StateVector& v, Eigen::Index d);

SuperoperatorMatrix build_superoperator(const ChannelParams& params, const HamiltonianModel& model);
SuperoperatorMatrix build_superoperator(const ExactChannel& channel);

// Column k = vec(Φ(E_ij)) for an arbitrary linear map, k = i + j·d.
template <class Fn>
SuperoperatorMatrix superoperator_of(Eigen::Index d, Fn&& phi) {
    SuperoperatorMatrix s{d, Operator::Zero(d * d, d * d), std::nullopt};
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) s.matrix.col(i + j * d) = vec(phi(matrix_unit(d, i, j)));
    return s;
}

Operator apply_superoperator(const SuperoperatorMatrix& s, const Operator& rho);

// C = Σ_ij E_ij ⊗ Φ(E_ij)
Operator choi_matrix(const SuperoperatorMatrix& s);
Operator choi_matrix(const ChannelParams& params, const HamiltonianModel& model);

// |⟨vec(I), S x⟩ - ⟨vec(I), x⟩| over the unit basis; 0 for trace-preserving maps.
double trace_preservation_defect(const SuperoperatorMatrix& s);

struct SpectralReport {
    StateVector eigenvalues;  // descending modulus
    double gap = 0;
    Operator fixed_point;
    double residual = 0;
    double trace_distance = 0;  // ½‖ρ_fix − target‖₁
    double infidelity = 0;
    double mixing_estimate = 0;  // ln 2 / (−ln|λ₂|); +inf when |λ₂| = 1
    bool mixing = true;          // false when the gap is numerically zero
};

class NonUniqueFixedPoint : public std::runtime_error {
public:
    NonUniqueFixedPoint(StateVector eigenvalues, double gap)
        : std::runtime_error("superoperator has multiple eigenvalues within 1e-9 of 1"),
          eigenvalues(std::move(eigenvalues)), gap(gap) {}
    StateVector eigenvalues;
    double gap;
};

StateVector sorted_spectrum(const SuperoperatorMatrix& s);

// Throws NonUniqueFixedPoint when several eigenvalues sit within 1e-9 of 1.
SpectralReport spectral_report(const SuperoperatorMatrix& s, const std::optional<TargetState>& target);

}  // namespace sysbath
