#pragma once

#include <cstdint>
#include <vector>

#include "msre/domain.hpp"
#include "msre/field.hpp"

namespace msre {

// Visit every unordered lattice edge {u,v} with at least one endpoint in Λ,
// exactly once. f(storage_rank_u, storage_rank_v) with u interior.
template <typename F>
void for_each_edge(const Domain& dom, F&& f) {
    const int d = dom.d();
    const auto& ranks = dom.interior_storage_ranks();
    int v[kMaxDim], u[kMaxDim];
    for (int64_t i = 0; i < dom.interior_count(); ++i) {
        dom.interior_coord(i, v);
        const int64_t r = ranks[static_cast<size_t>(i)];
        for (int c = 0; c < d; ++c) u[c] = v[c];
        for (int a = 0; a < d; ++a) {
            const int64_t stride = dom.storage_stride(a);
            // + direction: interior-interior edges are claimed by the lower
            // endpoint, and upward boundary edges only have this endpoint
            f(r, r + stride);
            u[a] = v[a] - 1;
            if (!dom.is_interior(u)) f(r, r - stride);
            u[a] = v[a];
        }
    }
}

LatticeField laplacian(const LatticeField& f, const Domain& dom);

double dirichlet_inner(const LatticeField& f, const LatticeField& g, const Domain& dom);
double dirichlet_energy(const LatticeField& f, const Domain& dom);

// (f, g) over the closure: sum of f_v · g_v for v in Λ⁺
double closure_inner(const LatticeField& f, const LatticeField& g, const Domain& dom);

struct SolveStats {
    int64_t iterations = 0;
    bool used_dense_fallback = false;
    double residual = 0.0;
};

// -Δ_Λ G = δ_v with G = 0 off Λ
LatticeField greens_function(const Domain& dom, const int* v, SolveStats* stats = nullptr);

struct HarmonicExtension {
    LatticeField field;      // equals τ off Λ, harmonic on Λ
    double dirichlet = 0.0;  // ‖τ‖²_{DE(Λ)} = ‖∇τ̄‖²_Λ
    SolveStats stats;
};
HarmonicExtension harmonic_extension(const LatticeField& tau, const Domain& dom);

// dyadic Green's-difference shifts: s_1 = G_1·e, s_j = (G_j − G_{j−1})·e,
// with G_j the Green's function of Λ_j = Λ ∩ (v + (−2^j, 2^j)^d)
struct ShiftFunction {
    LatticeField field;
    int m = 0;  // first scale with Λ_m = Λ
};
ShiftFunction shift_function_s_j(const Domain& dom, const int* v, int j,
                                 const std::vector<double>& e);
int shift_scale_count(const Domain& dom, const int* v);

// D(s) = ‖∇s‖^{4−4H} Σ_v‖s_v‖^{2H} + ‖∇s‖⁴ |supp(s)|
double d_functional(const LatticeField& s, const Domain& dom, double H);

struct BumpReport {
    LatticeField pi;
    double A = 0.0;
    int inner_L = 0;         // Λ^− = Λ_{inner_L}
    double min_inner = 0.0;  // min over Λ^−
    double c_laplace = 0.0;  // L² · max_v (Δπ)_v
    double c_energy = 0.0;   // ‖∇π‖² / L^{d−2}
};

// product bump π_v = A·Π_i q(v_i/(L+1)), q(x) = ((1−x²)_+)²; A normalized
// uniformly in L so that π ≥ 1 on Λ_{⌈(1−ε/2d)L⌉}; conditions checked on
// construction
BumpReport pi_bump(int d, int L, double eps);

}  // namespace msre
