#pragma once

#include <cstdint>
#include <vector>

#include "msre/disorder.hpp"
#include "msre/domain.hpp"
#include "msre/field.hpp"

namespace msre {

struct EnergyBreakdown {
    double elastic = 0.0;
    double disorder = 0.0;
    double total = 0.0;
};

// ½ ‖∇φ‖²_Λ
double elastic_energy(const LatticeField& phi, const Domain& dom);

// grid indices of the interior values of φ, which must be grid-aligned
std::vector<int64_t> grid_labels(const DisorderField& eta, const LatticeField& phi);

// H(φ) = ½‖∇φ‖²_Λ + Σ_{v∈Λ} η_{v,φ_v}; interior values read from the grid
EnergyBreakdown hamiltonian(const DisorderField& eta, const LatticeField& phi);

// same, with φ given as per-vertex grid indices inside Λ and τ outside
EnergyBreakdown hamiltonian(const DisorderField& eta, const std::vector<int64_t>& labels,
                            const LatticeField& tau);

LatticeField field_from_labels(const DisorderField& eta, const std::vector<int64_t>& labels,
                               const LatticeField& tau);

struct IdentityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;  // |lhs − rhs| / (1 + max(|lhs|, |rhs|))
};

// recentering identity: H^{η^s}(φ+s) − H^{η}(φ) matches
// (φ, −Δ_Λ s) + ½‖∇s‖²_Λ − Σ_{v∈Λ} η_{v,−s_v}; s vanishes off Λ and the
// shifted field is rebuilt on a K_out window
IdentityCheck main_identity_residual(const DisorderField& eta, const LatticeField& phi,
                                     const LatticeField& s, int K_out);

// Σ_{v∈Λ} η_{v,c}: the energy offset between the constant-boundary problem
// and its recentered zero-boundary form
double constant_boundary_correction(const DisorderField& eta, const double* c);

}  // namespace msre
