#include "msre/disorder.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <mutex>
#include <sstream>

#include "msre/summation.hpp"

namespace msre {

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

inline double pow_h(double x_squared, double H) {
    return x_squared <= 0.0 ? 0.0 : std::pow(x_squared, H);
}

inline double norm_sq(const double* t, int n) {
    double s = 0.0;
    for (int c = 0; c < n; ++c) s += t[c] * t[c];
    return s;
}

// lower Cholesky factor with the jitter retry ladder; row-major output
std::vector<double> cholesky_with_jitter(Eigen::MatrixXd C, int* retries_used) {
    const auto P = C.rows();
    const double max_diag = P > 0 ? C.diagonal().maxCoeff() : 0.0;
    double jitter = 1e-12 * std::max(max_diag, 1.0);
    for (int attempt = 0; attempt <= 3; ++attempt) {
        Eigen::MatrixXd work = C;
        if (attempt > 0) {
            work.diagonal().array() += jitter;
            jitter *= 10.0;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(work);
        if (llt.info() == Eigen::Success) {
            if (retries_used) *retries_used = attempt;
            Eigen::MatrixXd L = llt.matrixL();
            std::vector<double> flat(static_cast<size_t>(P) * P, 0.0);
            for (Eigen::Index i = 0; i < P; ++i)
                for (Eigen::Index j = 0; j <= i; ++j)
                    flat[static_cast<size_t>(i) * P + j] = L(i, j);
            return flat;
        }
    }
    throw sampler_error("covariance matrix not positive semidefinite after jitter ladder");
}

}  // namespace

double fbm_covariance(const double* t, const double* s, int n, double H) {
    require(H > 0.0 && H < 1.0, "Hurst parameter must lie strictly in (0,1)");
    double dts = 0.0;
    for (int c = 0; c < n; ++c) {
        const double d = t[c] - s[c];
        dts += d * d;
    }
    return 0.5 * (pow_h(norm_sq(t, n), H) + pow_h(norm_sq(s, n), H) - pow_h(dts, H));
}

FbmLineSampler::FbmLineSampler(int K, double delta, double H)
    : K_(K), delta_(delta), H_(H) {
    require(K >= 0, "FbmLineSampler: K >= 0");
    require(delta > 0.0, "FbmLineSampler: delta > 0");
    require(H > 0.0 && H < 1.0, "FbmLineSampler: H in (0,1)");
    if (K_ == 0) return;

    const int N = 2 * K_;  // increments across the window
    m_ = 2 * N;
    // increment autocovariance gamma(k), k = 0..N
    const double d2h = std::pow(delta_ * delta_, H_);
    std::vector<double> gamma(N + 1);
    for (int k = 0; k <= N; ++k) {
        const double kp = pow_h(double(k + 1) * (k + 1), H_);
        const double k0 = pow_h(double(k) * k, H_);
        const double km = pow_h(double(k - 1) * (k - 1), H_);
        gamma[k] = 0.5 * d2h * (kp - 2.0 * k0 + km);
    }

    std::vector<std::complex<double>> c(m_), lam(m_);
    for (int j = 0; j < m_; ++j) c[j] = gamma[std::min(j, m_ - j)];

    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_plan p = fftw_plan_dft_1d(
            m_, reinterpret_cast<fftw_complex*>(c.data()),
            reinterpret_cast<fftw_complex*>(lam.data()), FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_execute(p);
        fftw_destroy_plan(p);
        // reusable plan for per-sample transforms (new-array execution)
        fftw_complex* in = fftw_alloc_complex(m_);
        fftw_complex* out = fftw_alloc_complex(m_);
        plan_ = fftw_plan_dft_1d(m_, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
    }

    double max_eig = 0.0, min_eig = 0.0;
    for (int j = 0; j < m_; ++j) {
        max_eig = std::max(max_eig, lam[j].real());
        min_eig = std::min(min_eig, lam[j].real());
    }
    if (min_eig < -1e-10 * std::max(max_eig, 1.0)) {
        // embedding not nonnegative-definite at this size: dense fallback
        fallback_ = true;
        const int P = 2 * K_;  // grid points except the pinned origin
        Eigen::MatrixXd C(P, P);
        int p = 0;
        for (int i = 0; i <= 2 * K_; ++i) {
            if (i == K_) continue;
            int q = 0;
            const double ti = (i - K_) * delta_;
            for (int j = 0; j <= 2 * K_; ++j) {
                if (j == K_) continue;
                const double tj = (j - K_) * delta_;
                C(p, q) = fbm_covariance(&ti, &tj, 1, H_);
                ++q;
            }
            ++p;
        }
        chol_ = cholesky_with_jitter(C, nullptr);
        return;
    }
    sqrt_eig_.resize(m_);
    for (int j = 0; j < m_; ++j) sqrt_eig_[j] = std::sqrt(std::max(lam[j].real(), 0.0));
}

FbmLineSampler::~FbmLineSampler() {
    if (plan_) {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    }
}

void FbmLineSampler::sample(const GaussianStream& gs, uint64_t slot, double* out) const {
    if (K_ == 0) {
        out[0] = 0.0;
        return;
    }
    const int N = 2 * K_;
    if (fallback_) {
        std::vector<double> z(N);
        for (int k = 0; k < N; ++k) z[k] = gs.normal(slot, static_cast<uint64_t>(k));
        int p = 0;
        for (int i = 0; i <= N; ++i) {
            if (i == K_) {
                out[i] = 0.0;
                continue;
            }
            double acc = 0.0;
            const double* lrow = chol_.data() + static_cast<size_t>(p) * N;
            for (int q = 0; q <= p; ++q) acc += lrow[q] * z[q];
            out[i] = acc;
            ++p;
        }
        return;
    }

    const double inv_sqrt_m = 1.0 / std::sqrt(double(m_));
    const double inv_sqrt_2m = 1.0 / std::sqrt(2.0 * m_);
    fftw_complex* xi = fftw_alloc_complex(m_);
    fftw_complex* spec = fftw_alloc_complex(m_);
    xi[0][0] = sqrt_eig_[0] * gs.normal(slot, 0) * inv_sqrt_m;
    xi[0][1] = 0.0;
    xi[m_ / 2][0] = sqrt_eig_[m_ / 2] * gs.normal(slot, 1) * inv_sqrt_m;
    xi[m_ / 2][1] = 0.0;
    for (int j = 1; j < m_ / 2; ++j) {
        const double a = gs.normal(slot, 2 * static_cast<uint64_t>(j));
        const double b = gs.normal(slot, 2 * static_cast<uint64_t>(j) + 1);
        const double scale = sqrt_eig_[j] * inv_sqrt_2m;
        xi[j][0] = scale * a;
        xi[j][1] = scale * b;
        xi[m_ - j][0] = scale * a;
        xi[m_ - j][1] = -scale * b;
    }
    fftw_execute_dft(static_cast<fftw_plan>(plan_), xi, spec);

    // partial sums of the first N increments, re-anchored at the origin
    double p_prev = 0.0;
    std::vector<double> path(N + 1);
    path[0] = 0.0;
    for (int k = 1; k <= N; ++k) {
        p_prev += spec[k - 1][0];
        path[k] = p_prev;
    }
    const double anchor = path[K_];
    for (int i = 0; i <= N; ++i) out[i] = path[i] - anchor;
    out[K_] = 0.0;
    fftw_free(xi);
    fftw_free(spec);
}

FbmFieldSampler::FbmFieldSampler(const HeightGrid& grid, double H, int64_t dense_cap)
    : grid_(grid) {
    require(H > 0.0 && H < 1.0, "FbmFieldSampler: H in (0,1)");
    const int64_t G = grid.size();
    if (G > dense_cap)
        throw capacity_error("grid too large for the dense sampler: " + std::to_string(G) +
                             " points > cap " + std::to_string(dense_cap));
    points_ = G - 1;
    point_index_.reserve(static_cast<size_t>(points_));
    const int64_t origin = grid.origin();
    for (int64_t g = 0; g < G; ++g)
        if (g != origin) point_index_.push_back(g);

    if (points_ == 0) return;
    Eigen::MatrixXd C(points_, points_);
    std::vector<double> tp(grid.n), tq(grid.n);
    for (int64_t p = 0; p < points_; ++p) {
        grid.heights(point_index_[static_cast<size_t>(p)], tp.data());
        for (int64_t q = 0; q <= p; ++q) {
            grid.heights(point_index_[static_cast<size_t>(q)], tq.data());
            const double cov = fbm_covariance(tp.data(), tq.data(), grid.n, H);
            C(p, q) = cov;
            C(q, p) = cov;
        }
    }
    factor_ = cholesky_with_jitter(std::move(C), &retries_);
}

void FbmFieldSampler::sample(const GaussianStream& gs, uint64_t slot, double* out) const {
    const int64_t G = grid_.size();
    for (int64_t g = 0; g < G; ++g) out[g] = 0.0;
    if (points_ == 0) return;
    std::vector<double> z(static_cast<size_t>(points_));
    for (int64_t k = 0; k < points_; ++k)
        z[static_cast<size_t>(k)] = gs.normal(slot, static_cast<uint64_t>(k));
    for (int64_t p = 0; p < points_; ++p) {
        const double* lrow = factor_.data() + static_cast<size_t>(p) * points_;
        double acc = 0.0;
        for (int64_t q = 0; q <= p; ++q) acc += lrow[q] * z[static_cast<size_t>(q)];
        out[point_index_[static_cast<size_t>(p)]] = acc;
    }
}

DisorderField sample_disorder(const Domain& dom, const HeightGrid& grid,
                              const HurstParams& params, uint64_t seed,
                              uint32_t resample_index, uint64_t stream_salt) {
    require(grid.n == params.n, "grid/params codimension mismatch");
    DisorderField field{dom, grid, params, seed, resample_index, {}};
    const int64_t nv = dom.interior_count();
    const int64_t G = grid.size();
    field.values.resize(static_cast<size_t>(nv) * G);
    GaussianStream gs(seed, kStreamDisorder | (stream_salt << 8));

    if (grid.n == 1) {
        FbmLineSampler sampler(grid.K, grid.delta, params.H);
        for (int64_t i = 0; i < nv; ++i)
            sampler.sample(gs, pack_slot(resample_index, static_cast<uint64_t>(i)),
                           field.row(i));
    } else {
        FbmFieldSampler sampler(grid, params.H);
        for (int64_t i = 0; i < nv; ++i)
            sampler.sample(gs, pack_slot(resample_index, static_cast<uint64_t>(i)),
                           field.row(i));
    }
    return field;
}

DisorderField shift_recenter_digits(const DisorderField& field,
                                    const std::vector<int>& digit_offsets, int K_out) {
    const int n = field.grid.n;
    const int K_in = field.grid.K;
    const int64_t nv = field.domain.interior_count();
    require(digit_offsets.size() == static_cast<size_t>(nv) * n,
            "shift_recenter: offset table size mismatch");
    require(K_out >= 0, "shift_recenter: K_out >= 0");

    HeightGrid out_grid(n, field.grid.delta, K_out);
    DisorderField out{field.domain, out_grid, field.params, field.seed,
                      field.resample_index, {}};
    const int64_t G_out = out_grid.size();
    out.values.resize(static_cast<size_t>(nv) * G_out);

    const int M_in = field.grid.axis_points();
    const int M_out = out_grid.axis_points();
    std::vector<int> digits(n, 0);

    for (int64_t i = 0; i < nv; ++i) {
        const int* sigma = digit_offsets.data() + static_cast<size_t>(i) * n;
        for (int c = 0; c < n; ++c) {
            if (std::abs(sigma[c]) > K_in - K_out) {
                int v[kMaxDim];
                field.domain.interior_coord(i, v);
                std::ostringstream msg;
                msg << "shift_recenter: window underflow at vertex (";
                for (int a = 0; a < field.domain.d(); ++a) msg << (a ? "," : "") << v[a];
                msg << "): |shift| " << std::abs(sigma[c]) << " grid steps > padding "
                    << (K_in - K_out);
                throw config_error(msg.str());
            }
        }
        const double* in_row = field.row(i);
        double* out_row = out.row(i);
        // base lookup η_{v,−s_v}
        int64_t base_idx = 0;
        for (int c = 0; c < n; ++c) base_idx = base_idx * M_in + (K_in - sigma[c]);
        const double base = in_row[base_idx];
        std::fill(digits.begin(), digits.end(), 0);
        for (int64_t g = 0; g < G_out; ++g) {
            int64_t in_idx = 0;
            for (int c = 0; c < n; ++c)
                in_idx = in_idx * M_in + (digits[c] + (K_in - K_out) - sigma[c]);
            out_row[g] = in_row[in_idx] - base;
            // odometer increment, last component fastest
            for (int c = n - 1; c >= 0; --c) {
                if (++digits[c] < M_out) break;
                digits[c] = 0;
            }
        }
    }
    return out;
}

DisorderField shift_recenter(const DisorderField& field, const LatticeField& s, int K_out) {
    require(s.n == field.grid.n, "shift_recenter: component mismatch");
    require(s.compatible(field.domain), "shift_recenter: shift field domain mismatch");
    const int64_t nv = field.domain.interior_count();
    const int n = field.grid.n;
    std::vector<int> offsets(static_cast<size_t>(nv) * n);
    const auto& ranks = field.domain.interior_storage_ranks();
    for (int64_t i = 0; i < nv; ++i) {
        const double* sv = s.at_rank(ranks[static_cast<size_t>(i)]);
        for (int c = 0; c < n; ++c)
            offsets[static_cast<size_t>(i) * n + c] = field.grid.aligned_offset(sv[c]);
    }
    return shift_recenter_digits(field, offsets, K_out);
}

namespace {
int64_t hat_grid_index(const HeightGrid& grid, double alpha_h, int sign) {
    const int o = grid.aligned_offset(alpha_h);
    require(o >= 0 && o <= grid.K, "eta_hat: alpha_h outside grid");
    int64_t stride = 1;
    for (int c = 1; c < grid.n; ++c) stride *= grid.axis_points();
    return grid.origin() + static_cast<int64_t>(sign) * o * stride;
}
}  // namespace

double eta_hat(const DisorderField& field, const std::vector<int64_t>& subdomain_ranks,
               double alpha_h) {
    const int64_t gp = hat_grid_index(field.grid, alpha_h, +1);
    const int64_t gm = hat_grid_index(field.grid, alpha_h, -1);
    PairwiseAccumulator acc;
    acc.reserve(subdomain_ranks.size());
    for (int64_t r : subdomain_ranks) {
        require(r >= 0 && r < field.domain.interior_count(), "eta_hat: rank outside domain");
        acc.add(field.value(r, gp) + field.value(r, gm));
    }
    return acc.total();
}

double eta_hat_variance(int64_t subdomain_size, double alpha_h, double H) {
    return double(subdomain_size) * (4.0 - std::pow(2.0, 2.0 * H)) *
           std::pow(alpha_h * alpha_h, H);
}

double kappa(const double* t, int n, double alpha_h, double H, double var_hat) {
    require(var_hat > 0.0, "kappa: var_hat must be positive");
    double tm = 0.0, tp = 0.0;
    for (int c = 0; c < n; ++c) {
        const double shift = (c == 0) ? alpha_h : 0.0;
        tm += (t[c] - shift) * (t[c] - shift);
        tp += (t[c] + shift) * (t[c] + shift);
    }
    const double cov = 0.5 * (2.0 * pow_h(norm_sq(t, n), H) +
                              2.0 * pow_h(alpha_h * alpha_h, H) - pow_h(tm, H) - pow_h(tp, H));
    return cov / var_hat;
}

ResampleReport decompose_and_resample(const DisorderField& field,
                                      const std::vector<int64_t>& subdomain_ranks,
                                      double alpha_h, uint64_t draw_index,
                                      std::optional<double> forced_new_hat) {
    ResampleReport rep{field, 0.0, 0.0, 0.0};
    rep.var_hat = eta_hat_variance(static_cast<int64_t>(subdomain_ranks.size()), alpha_h,
                                   field.params.H);
    rep.old_hat = eta_hat(field, subdomain_ranks, alpha_h);
    if (forced_new_hat) {
        rep.new_hat = *forced_new_hat;
    } else {
        GaussianStream gs(field.seed, kStreamHatResample);
        rep.new_hat = gs.normal(draw_index, 0) * std::sqrt(rep.var_hat);
    }

    const int64_t G = field.grid.size();
    std::vector<double> kappa_row(static_cast<size_t>(G));
    std::vector<double> t(field.grid.n);
    for (int64_t g = 0; g < G; ++g) {
        field.grid.heights(g, t.data());
        kappa_row[static_cast<size_t>(g)] =
            kappa(t.data(), field.grid.n, alpha_h, field.params.H, rep.var_hat);
    }

    const double shift = rep.new_hat - rep.old_hat;
    for (int64_t r : subdomain_ranks) {
        double* row = rep.zeta.row(r);
        for (int64_t g = 0; g < G; ++g) row[g] += kappa_row[static_cast<size_t>(g)] * shift;
    }
    return rep;
}

KernelBounds kernel_bounds_check(const double* t, int n, double H) {
    require(H > 0.0 && H < 1.0, "kernel_bounds_check: H in (0,1)");
    double tm = 0.0, tp = 0.0;
    for (int c = 0; c < n; ++c) {
        const double e = (c == 0) ? 1.0 : 0.0;
        tm += (t[c] - e) * (t[c] - e);
        tp += (t[c] + e) * (t[c] + e);
    }
    const double x2 = norm_sq(t, n);
    KernelBounds kb;
    kb.value = 2.0 * pow_h(x2, H) + 2.0 - pow_h(tm, H) - pow_h(tp, H);
    kb.lower = g_curve(std::sqrt(x2), H);
    kb.upper = std::min(2.0 * (pow_h(x2, H) + std::sqrt(x2)), 8.0);
    return kb;
}

double g_curve(double x, double H) {
    return 2.0 * pow_h(x * x, H) + 2.0 - 2.0 * std::pow(x * x + 1.0, H);
}

double g_curve_variant(double x, double H) {
    return std::pow(x, H) + 1.0 - std::pow(x + 1.0, H);
}

NoiseLevels noise_levels(double H) {
    require(H > 0.0 && H < 1.0, "noise_levels: H in (0,1)");
    NoiseLevels lv;
    // alpha: sup_{‖t‖<=1} Cov(t; a) <= a^{2H}/8; the sup sits on the e1 axis
    for (int k = 1; k <= 4000; ++k) {
        const double a = 0.25 * k;
        const double a2h = pow_h(a * a, H);
        double sup = 0.0;
        const int steps = 1000;
        for (int i = 0; i <= steps; ++i) {
            const double x = double(i) / steps;
            const double cov = 0.5 * (2.0 * pow_h(x * x, H) + 2.0 * a2h -
                                      pow_h((x - a) * (x - a), H) -
                                      pow_h((x + a) * (x + a), H));
            sup = std::max(sup, cov);
        }
        if (sup <= 0.125 * a2h) {
            lv.alpha = a;
            break;
        }
    }
    check(lv.alpha > 0.0, "noise_levels: alpha scan failed");
    // beta: inf_{‖t‖>=b} Cov >= a^{2H}/2; the inf sits perpendicular to e1,
    // where Cov = a^{2H} * (x^{2H}+1-(x²+1)^H) at x = r/a, increasing in r
    for (int k = 1; k <= 4000; ++k) {
        const double b = 0.25 * k;
        const double x = b / lv.alpha;
        const double gt = pow_h(x * x, H) + 1.0 - std::pow(x * x + 1.0, H);
        if (gt >= 0.5) {
            lv.beta = std::max(b, lv.alpha);
            break;
        }
    }
    check(lv.beta > 0.0, "noise_levels: beta scan failed");
    return lv;
}

}  // namespace msre
