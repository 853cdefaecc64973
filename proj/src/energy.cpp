#include "msre/energy.hpp"

#include <algorithm>
#include <cmath>

#include "msre/common.hpp"
#include "msre/lattice.hpp"
#include "msre/summation.hpp"

namespace msre {

double elastic_energy(const LatticeField& phi, const Domain& dom) {
    return 0.5 * dirichlet_energy(phi, dom);
}

std::vector<int64_t> grid_labels(const DisorderField& eta, const LatticeField& phi) {
    const Domain& dom = eta.domain;
    require(phi.compatible(dom), "field storage does not match domain");
    require(phi.n == eta.grid.n, "component counts differ");
    const int64_t nv = dom.interior_count();
    const auto& ranks = dom.interior_storage_ranks();
    std::vector<int64_t> labels(static_cast<size_t>(nv));
    std::vector<int> digits(static_cast<size_t>(eta.grid.n));
    for (int64_t i = 0; i < nv; ++i) {
        const double* pv = phi.at_rank(ranks[static_cast<size_t>(i)]);
        for (int c = 0; c < eta.grid.n; ++c) {
            const int64_t off = eta.grid.aligned_offset(pv[c]);
            require(std::abs(off) <= eta.grid.K,
                    "field value lies outside the height window");
            digits[static_cast<size_t>(c)] = static_cast<int>(eta.grid.K + off);
        }
        labels[static_cast<size_t>(i)] = eta.grid.index_from_digits(digits.data());
    }
    return labels;
}

EnergyBreakdown hamiltonian(const DisorderField& eta, const LatticeField& phi) {
    const Domain& dom = eta.domain;
    EnergyBreakdown out;
    out.elastic = elastic_energy(phi, dom);
    const std::vector<int64_t> labels = grid_labels(eta, phi);
    PairwiseAccumulator acc;
    for (int64_t i = 0; i < dom.interior_count(); ++i) {
        acc.add(eta.value(i, labels[static_cast<size_t>(i)]));
    }
    out.disorder = acc.total();
    out.total = out.elastic + out.disorder;
    return out;
}

LatticeField field_from_labels(const DisorderField& eta, const std::vector<int64_t>& labels,
                               const LatticeField& tau) {
    const Domain& dom = eta.domain;
    require(tau.compatible(dom), "field storage does not match domain");
    require(tau.n == eta.grid.n, "component counts differ");
    require(labels.size() == static_cast<size_t>(dom.interior_count()),
            "one label per interior vertex required");
    LatticeField phi = tau;
    const auto& ranks = dom.interior_storage_ranks();
    for (int64_t i = 0; i < dom.interior_count(); ++i) {
        const int64_t g = labels[static_cast<size_t>(i)];
        require(g >= 0 && g < eta.grid.size(), "grid index out of range");
        eta.grid.heights(g, phi.at_rank(ranks[static_cast<size_t>(i)]));
    }
    return phi;
}

EnergyBreakdown hamiltonian(const DisorderField& eta, const std::vector<int64_t>& labels,
                            const LatticeField& tau) {
    return hamiltonian(eta, field_from_labels(eta, labels, tau));
}

IdentityCheck main_identity_residual(const DisorderField& eta, const LatticeField& phi,
                                     const LatticeField& s, int K_out) {
    const Domain& dom = eta.domain;
    require(phi.compatible(dom) && s.compatible(dom),
            "field storage does not match domain");
    require(phi.n == eta.grid.n && s.n == eta.grid.n, "component counts differ");

    // s must be a zero-boundary displacement
    const Box& box = dom.storage();
    int v[kMaxDim];
    for (int64_t r = 0; r < box.size(); ++r) {
        box.decode(r, v);
        if (dom.is_interior(v)) continue;
        require(norm2(s.at_rank(r), s.n) == 0.0, "shift must vanish off the domain");
    }

    const DisorderField shifted = shift_recenter(eta, s, K_out);

    LatticeField moved = phi;
    for (int64_t r = 0; r < box.size(); ++r) {
        const double* sv = s.at_rank(r);
        double* mv = moved.at_rank(r);
        for (int c = 0; c < s.n; ++c) mv[c] += sv[c];
    }

    const EnergyBreakdown before = hamiltonian(eta, phi);
    const EnergyBreakdown after = hamiltonian(shifted, moved);

    // Σ_{v∈Λ} η_{v,−s_v}
    PairwiseAccumulator eta_at_minus_s;
    const auto& ranks = dom.interior_storage_ranks();
    std::vector<int> digits(static_cast<size_t>(eta.grid.n));
    for (int64_t i = 0; i < dom.interior_count(); ++i) {
        const double* sv = s.at_rank(ranks[static_cast<size_t>(i)]);
        for (int c = 0; c < eta.grid.n; ++c) {
            const int64_t off = eta.grid.aligned_offset(sv[c]);
            digits[static_cast<size_t>(c)] = static_cast<int>(eta.grid.K - off);
        }
        eta_at_minus_s.add(eta.value(i, eta.grid.index_from_digits(digits.data())));
    }

    const LatticeField lap_s = laplacian(s, dom);
    const double transport = -closure_inner(phi, lap_s, dom);

    IdentityCheck out;
    out.lhs = after.total - before.total;
    out.rhs = transport + 0.5 * dirichlet_energy(s, dom) - eta_at_minus_s.total();
    out.residual = std::abs(out.lhs - out.rhs) /
                   (1.0 + std::max(std::abs(out.lhs), std::abs(out.rhs)));
    return out;
}

double constant_boundary_correction(const DisorderField& eta, const double* c) {
    std::vector<int> digits(static_cast<size_t>(eta.grid.n));
    for (int comp = 0; comp < eta.grid.n; ++comp) {
        const int64_t off = eta.grid.aligned_offset(c[comp]);
        require(std::abs(off) <= eta.grid.K,
                "constant boundary lies outside the height window");
        digits[static_cast<size_t>(comp)] = static_cast<int>(eta.grid.K + off);
    }
    const int64_t g = eta.grid.index_from_digits(digits.data());
    PairwiseAccumulator acc;
    for (int64_t i = 0; i < eta.domain.interior_count(); ++i) acc.add(eta.value(i, g));
    return acc.total();
}

}  // namespace msre
