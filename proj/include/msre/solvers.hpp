#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msre/disorder.hpp"
#include "msre/energy.hpp"
#include "msre/field.hpp"

namespace msre {

struct SolverStats {
    int64_t configurations = 0;  // states visited (exhaustive search)
    int64_t augmentations = 0;   // flow augmentations (cut solver)
    int64_t phases = 0;
    int64_t arcs = 0;
    int64_t sweeps = 0;          // local-search passes
    int64_t restarts = 0;
    int64_t pinned = 0;          // interior vertices within δ of the window edge
    double cut_value = 0.0;
};

struct SolveResult {
    std::vector<int64_t> labels;  // per-interior-vertex grid index
    LatticeField phi;             // full surface, τ off Λ
    double ground_energy = 0.0;   // recomputed H at the returned labels
    std::string solver_id;
    bool exact = true;
    SolverStats stats;
};

// Exact solvers return the lexicographically first minimizer over the
// flattened label vector (vertex 0 most significant, grid indices ascending);
// for scalar heights this is the pointwise-minimal optimizer.

// exhaustive odometer scan; refuses instances beyond the configuration cap
SolveResult solve_bruteforce(const DisorderField& eta, const LatticeField& tau);
constexpr int64_t kBruteforceCap = 10'000'000;

// exact dynamic program along a path (d = 1), any number of components;
// transitions via quadratic lower envelopes, O(|Λ|·G) per solve
SolveResult solve_chain_dp(const DisorderField& eta, const LatticeField& tau);

// exact min-cut reduction for scalar heights (n = 1), any dimension:
// level indicators x_{v,m} = 1[label_v ≥ m] on the source side, monotone
// chains enforced by infinite arcs, quadratic edge costs spread over level
// pairs, unary increments attached to source/sink
SolveResult solve_graphcut(const DisorderField& eta, const LatticeField& tau);

struct DescentOptions {
    int restarts = 4;
    int max_sweeps = 200;
    bool anneal = false;
    int anneal_steps = 2000;
    double t_start = 1.0;
    double t_end = 1e-3;
    uint64_t seed = 0;
};

// per-site exact scans to a fixpoint, best of several random starts,
// optional annealing prepass; heuristic (exact = false)
SolveResult solve_coordinate_descent(const DisorderField& eta, const LatticeField& tau,
                                     const DescentOptions& opt = {});

// method ∈ {auto, bruteforce, chain, graphcut, descent}
SolveResult solve(const DisorderField& eta, const LatticeField& tau,
                  const std::string& method = "auto", const DescentOptions& opt = {});

int64_t count_pinned(const DisorderField& eta, const std::vector<int64_t>& labels);

}  // namespace msre
