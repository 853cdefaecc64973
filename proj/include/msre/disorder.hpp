#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "msre/domain.hpp"
#include "msre/field.hpp"
#include "msre/grid.hpp"
#include "msre/rng.hpp"

namespace msre {

struct HurstParams {
    double H = 0.5;
    int n = 1;

    HurstParams() = default;
    HurstParams(double H_, int n_) : H(H_), n(n_) {
        require(H > 0.0 && H < 1.0, "Hurst parameter must lie strictly in (0,1)");
        require(n >= 1, "codimension n must be >= 1");
    }
};

// Cov(B_t, B_s) = (‖t‖^{2H} + ‖s‖^{2H} − ‖t−s‖^{2H}) / 2
double fbm_covariance(const double* t, const double* s, int n, double H);

// Per-vertex tables of the disorder η_{v,·} on a height grid. Rows are
// indexed by the domain's interior rank; row[origin] == 0 always.
struct DisorderField {
    Domain domain;
    HeightGrid grid;
    HurstParams params;
    uint64_t seed = 0;
    uint32_t resample_index = 0;
    std::vector<double> values;  // interior_count * grid.size()

    const double* row(int64_t interior_rank) const {
        return values.data() + static_cast<size_t>(interior_rank) * grid.size();
    }
    double* row(int64_t interior_rank) {
        return values.data() + static_cast<size_t>(interior_rank) * grid.size();
    }
    double value(int64_t interior_rank, int64_t grid_idx) const {
        return row(interior_rank)[grid_idx];
    }
};

// Exact fBm on a symmetric 1-d grid: one stationary increment path across the
// whole window (circulant embedding of the increment covariance), partial
// sums re-anchored at 0. Falls back to dense Cholesky if the embedding has a
// negative eigenvalue at this size.
class FbmLineSampler {
  public:
    FbmLineSampler(int K, double delta, double H);
    ~FbmLineSampler();
    FbmLineSampler(const FbmLineSampler&) = delete;
    FbmLineSampler& operator=(const FbmLineSampler&) = delete;

    // out has 2K+1 entries, grid order; out[K] = 0
    void sample(const GaussianStream& gs, uint64_t slot, double* out) const;
    bool used_cholesky_fallback() const { return fallback_; }

  private:
    int K_;
    double delta_, H_;
    int m_ = 0;  // embedding length
    std::vector<double> sqrt_eig_;
    bool fallback_ = false;
    std::vector<double> chol_;  // lower factor, row-major, if fallback
    void* plan_ = nullptr;      // fftw plan for the per-sample transform
};

// Dense-Cholesky sampler over a general n-dimensional grid (origin pinned to
// zero). Jitter ladder: 1e-12 * max diagonal, x10 per retry, 3 retries.
class FbmFieldSampler {
  public:
    FbmFieldSampler(const HeightGrid& grid, double H, int64_t dense_cap = 4096);

    // out has grid.size() entries; out[origin] = 0
    void sample(const GaussianStream& gs, uint64_t slot, double* out) const;
    int jitter_retries_used() const { return retries_; }

  private:
    HeightGrid grid_;
    int64_t points_ = 0;  // grid.size() - 1
    std::vector<double> factor_;  // lower-triangular, row-major
    std::vector<int64_t> point_index_;  // grid linear index per point
    int retries_ = 0;
};

// Independent per-vertex disorder tables; deterministic in
// (seed, stream_salt, resample_index, domain, grid, params) and independent
// of scheduling. stream_salt separates configs (e.g. distinct L) sharing a seed.
DisorderField sample_disorder(const Domain& dom, const HeightGrid& grid,
                              const HurstParams& params, uint64_t seed,
                              uint32_t resample_index = 0, uint64_t stream_salt = 0);

// η^s_{v,t} = η_{v, t−s_v} − η_{v, −s_v}, exact table lookups. s must be
// grid-aligned on interior vertices; the input grid must cover every shifted
// lookup for the requested output extent K_out.
DisorderField shift_recenter(const DisorderField& field, const LatticeField& s, int K_out);

// same, with shifts given directly as grid-digit offsets per interior rank
// (row-major vertex order, n offsets per vertex)
DisorderField shift_recenter_digits(const DisorderField& field,
                                    const std::vector<int>& digit_offsets, int K_out);

// η̂ = Σ_{v∈subdomain} (η_{v, αh e₁} + η_{v, −αh e₁})
double eta_hat(const DisorderField& field, const std::vector<int64_t>& subdomain_ranks,
               double alpha_h);

// Var η̂ = |subdomain| (4 − 2^{2H}) (αh)^{2H}
double eta_hat_variance(int64_t subdomain_size, double alpha_h, double H);

// κ(t) = Cov(η_{v,t}, η̂)/var_hat with the closed-form covariance
// (2‖t‖^{2H} + 2(αh)^{2H} − ‖t−αh e₁‖^{2H} − ‖t+αh e₁‖^{2H}) / 2
double kappa(const double* t, int n, double alpha_h, double H, double var_hat);

struct ResampleReport {
    DisorderField zeta;
    double old_hat = 0.0;
    double new_hat = 0.0;
    double var_hat = 0.0;
};

// ζ_{v,t} = η_{v,t} + κ(t)(ζ̂ − η̂) on the subdomain, unchanged elsewhere;
// ζ̂ ~ N(0, Var η̂) drawn independently (or injected for tests).
ResampleReport decompose_and_resample(const DisorderField& field,
                                      const std::vector<int64_t>& subdomain_ranks,
                                      double alpha_h, uint64_t draw_index,
                                      std::optional<double> forced_new_hat = std::nullopt);

// Correlation-kernel sandwich at unit scale:
//   value(t) = 2‖t‖^{2H} + 2 − ‖t−e₁‖^{2H} − ‖t+e₁‖^{2H}
//   lower    = 2‖t‖^{2H} + 2 − 2(‖t‖²+1)^H   (power-mean bound; tight ⊥ e₁)
//   upper    = min(2(‖t‖^{2H} + ‖t‖), 8)
// The doubled form of the lower curve fails the sandwich near ‖t‖ ≈ 1, so the
// single application is used; both diagnostic curves are exposed below.
struct KernelBounds {
    double lower = 0.0;
    double value = 0.0;
    double upper = 0.0;
};
KernelBounds kernel_bounds_check(const double* t, int n, double H);

double g_curve(double x, double H);        // 2x^{2H} + 2 − 2(x²+1)^H
double g_curve_variant(double x, double H);  // x^H + 1 − (x+1)^H (diagnostic)

// smallest grid levels (0.25 steps) with: sup_{‖t‖≤h} Cov ≤ (αh)^{2H}/8 and
// inf_{‖t‖≥βh} Cov ≥ (αh)^{2H}/2, h=1 (scale-free); β >= α enforced
struct NoiseLevels {
    double alpha = 0.0;
    double beta = 0.0;
};
NoiseLevels noise_levels(double H);

}  // namespace msre
