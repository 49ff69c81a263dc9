// models.cpp: Hamiltonian constructors and target states.

#include "sysbath/models.hpp"

#include <cmath>

namespace sysbath {

namespace {

void require_sites(int sites, const char* where) {
    if (sites < 1) throw std::invalid_argument(std::string(where) + ": need at least one site");
    if (sites > 10) throw std::invalid_argument(std::string(where) + ": too many qubits for dense storage");
}

Operator zz(int i, int j, int n) {
    return embed_site(pauli_z(), i, n) * embed_site(pauli_z(), j, n);
}

}  // namespace

bool CouplingSet::adjoint_closed(double tolerance) const {
    for (const auto& a : members) {
        bool found = false;
        const Operator adj = a.adjoint();
        for (const auto& b : members) {
            if (max_abs(adj - b) <= tolerance) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

int CouplingSet::negation_partner(std::size_t i, double tolerance) const {
    for (std::size_t j = 0; j < members.size(); ++j)
        if (max_abs(members[i] + members[j]) <= tolerance) return static_cast<int>(j);
    return -1;
}

bool CouplingSet::negation_closed(double tolerance) const {
    for (std::size_t i = 0; i < members.size(); ++i)
        if (negation_partner(i, tolerance) < 0) return false;
    return true;
}

bool CouplingSet::norm_bounded(double tolerance) const {
    for (const auto& a : members)
        if (operator_norm(a) > 1.0 + tolerance) return false;
    return true;
}

HamiltonianModel build_tfim(int sites, double J, double g) {
    require_sites(sites, "build_tfim");
    const Eigen::Index d = Eigen::Index(1) << sites;
    Operator h = Operator::Zero(d, d);
    for (int i = 0; i + 1 < sites; ++i) h -= J * zz(i, i + 1, sites);
    for (int i = 0; i < sites; ++i) h -= g * embed_site(pauli_x(), i, sites);
    return {h, "tfim", sites, sites};
}

Operator jordan_wigner_annihilation(int mode, int modes) {
    Operator op = Operator::Identity(1, 1);
    for (int k = 0; k < modes; ++k) {
        if (k < mode) op = kron(op, pauli_z());
        else if (k == mode) op = kron(op, lowering());
        else op = kron(op, Operator::Identity(2, 2));
    }
    return op;
}

Operator number_operator(int modes) {
    const Eigen::Index d = Eigen::Index(1) << modes;
    Operator n = Operator::Zero(d, d);
    for (int m = 0; m < modes; ++m) {
        const Operator c = jordan_wigner_annihilation(m, modes);
        n += c.adjoint() * c;
    }
    return n;
}

HamiltonianModel build_hubbard(int sites, double hopping, double interaction) {
    require_sites(2 * sites, "build_hubbard");
    const int modes = 2 * sites;
    const Eigen::Index d = Eigen::Index(1) << modes;
    std::vector<Operator> c;
    for (int m = 0; m < modes; ++m) c.push_back(jordan_wigner_annihilation(m, modes));
    const Operator id = Operator::Identity(d, d);

    Operator h = Operator::Zero(d, d);
    for (int j = 0; j + 1 < sites; ++j) {
        for (int s = 0; s < 2; ++s) {
            const Operator& a = c[static_cast<std::size_t>(2 * j + s)];
            const Operator& b = c[static_cast<std::size_t>(2 * (j + 1) + s)];
            Operator hop = a.adjoint() * b;
            h -= hopping * (hop + hop.adjoint());
        }
    }
    for (int j = 0; j < sites; ++j) {
        const Operator& up = c[static_cast<std::size_t>(2 * j)];
        const Operator& dn = c[static_cast<std::size_t>(2 * j + 1)];
        const Operator n_up = up.adjoint() * up;
        const Operator n_dn = dn.adjoint() * dn;
        h += interaction * (n_up - 0.5 * id) * (n_dn - 0.5 * id);
    }
    return {h, "hubbard", sites, modes};
}

HamiltonianModel build_annni(int sites, double J1, double J2, double Gamma) {
    require_sites(sites, "build_annni");
    const Eigen::Index d = Eigen::Index(1) << sites;
    Operator h = Operator::Zero(d, d);
    for (int i = 0; i + 1 < sites; ++i) h += (J1 / 4.0) * zz(i, i + 1, sites);
    for (int i = 0; i + 2 < sites; ++i) h += (J2 / 4.0) * zz(i, i + 2, sites);
    for (int i = 0; i < sites; ++i) h -= (Gamma / 2.0) * embed_site(pauli_x(), i, sites);
    return {h, "annni", sites, sites};
}

CouplingSet pauli_coupling_set(int sites) {
    require_sites(sites, "pauli_coupling_set");
    CouplingSet set{{}, "pauli"};
    const Operator paulis[] = {pauli_x(), pauli_y(), pauli_z()};
    for (int i = 0; i < sites; ++i) {
        for (const auto& p : paulis) {
            const Operator a = embed_site(p, i, sites);
            set.members.push_back(a);
            set.members.push_back(-a);
        }
    }
    return set;
}

CouplingSet fermionic_coupling_set(int sites) {
    require_sites(2 * sites, "fermionic_coupling_set");
    const int modes = 2 * sites;
    CouplingSet set{{}, "fermionic"};
    for (int m = 0; m < modes; ++m) {
        const Operator c = jordan_wigner_annihilation(m, modes);
        const Operator cd = c.adjoint();
        set.members.push_back(c);
        set.members.push_back(-c);
        set.members.push_back(cd);
        set.members.push_back(-cd);
    }
    return set;
}

double energy(const HamiltonianModel& model, const Operator& rho) {
    return std::real((model.matrix * rho).trace());
}

TargetState thermal_state(const HamiltonianModel& model, double beta) {
    if (!(beta >= 0)) throw std::invalid_argument("thermal_state: beta must be >= 0");
    if (std::isinf(beta)) return ground_state(model);
    const auto eig = herm_eig(model.matrix);
    const double shift = eig.eigenvalues.minCoeff();
    RealVector<double> w = (-beta * (eig.eigenvalues.array() - shift)).exp();
    w /= w.sum();
    Operator rho = eig.eigenvectors * w.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
    rho = (rho + rho.adjoint()).eval() / 2.0;
    TargetState out{rho, beta, 0};
    out.energy = energy(model, rho);
    return out;
}

TargetState ground_state(const HamiltonianModel& model, double degeneracy_tol) {
    const auto eig = herm_eig(model.matrix);
    if (eig.eigenvalues.size() > 1) {
        const double gap = eig.eigenvalues(1) - eig.eigenvalues(0);
        if (gap <= degeneracy_tol) throw DegenerateGroundState(gap, eig.eigenvalues(0));
    }
    const StateVector psi = eig.eigenvectors.col(0);
    TargetState out{projector<double>(psi), std::numeric_limits<double>::infinity(), 0};
    out.energy = energy(model, out.matrix);
    return out;
}

TargetState target_state(const HamiltonianModel& model, double beta) {
    return std::isinf(beta) ? ground_state(model) : thermal_state(model, beta);
}

}  // namespace sysbath
