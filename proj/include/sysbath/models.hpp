// models.hpp: Spin and fermion chain Hamiltonians, coupling-operator sets, and
// target states (Gibbs state, nondegenerate ground state).

#pragma once

#include "sysbath/operators.hpp"

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sysbath {

struct HamiltonianModel {
    Operator matrix;
    std::string label;
    int sites = 0;
    int qubits = 0;

    Eigen::Index dim() const { return matrix.rows(); }
};

struct CouplingSet {
    std::vector<Operator> members;
    std::string label;

    std::size_t size() const { return members.size(); }

    bool adjoint_closed(double tolerance = 1e-12) const;
    bool negation_closed(double tolerance = 1e-12) const;
    bool norm_bounded(double tolerance = 1e-12) const;

    // Index of -members[i], or -1.
    int negation_partner(std::size_t i, double tolerance = 1e-12) const;
};

struct TargetState {
    Operator matrix;
    double beta = 0;  // +inf for the ground state
    double energy = 0;

    bool is_ground() const { return beta == std::numeric_limits<double>::infinity(); }
};

class DegenerateGroundState : public std::runtime_error {
public:
    DegenerateGroundState(double gap, double energy)
        : std::runtime_error("ground space is degenerate (gap " + std::to_string(gap) + ")"), gap(gap),
          energy(energy) {}
    double gap;
    double energy;
};

/// H = -J Σ Z_i Z_{i+1} - g Σ X_i, open boundary.
HamiltonianModel build_tfim(int sites, double J, double g);

/// Fermi–Hubbard chain via Jordan–Wigner, mode m = 2 j + s (s = 0 up, 1 down).
HamiltonianModel build_hubbard(int sites, double hopping, double interaction);

/// H = (J1/4) Σ Z_i Z_{i+1} + (J2/4) Σ Z_i Z_{i+2} - (Γ/2) Σ X_i, open boundary.
HamiltonianModel build_annni(int sites, double J1, double J2, double Gamma);

/// c_m on a register of `modes` qubits.
Operator jordan_wigner_annihilation(int mode, int modes);

/// {±X_i, ±Y_i, ±Z_i}
CouplingSet pauli_coupling_set(int sites);

/// {±c_{j,s}, ±c†_{j,s}} over 2 * sites modes.
CouplingSet fermionic_coupling_set(int sites);

/// Total particle number Σ n_m on `modes` qubits.
Operator number_operator(int modes);

TargetState thermal_state(const HamiltonianModel& model, double beta);

TargetState ground_state(const HamiltonianModel& model, double degeneracy_tol = 1e-10);

/// Dispatches β = ∞ to ground_state.
TargetState target_state(const HamiltonianModel& model, double beta);

double energy(const HamiltonianModel& model, const Operator& rho);

}  // namespace sysbath
