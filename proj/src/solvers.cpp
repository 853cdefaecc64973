#include "msre/solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "msre/common.hpp"
#include "msre/lattice.hpp"
#include "msre/maxflow.hpp"
#include "msre/rng.hpp"
#include "msre/summation.hpp"

namespace msre {

namespace {

constexpr double kInfCap = 1e100;
constexpr double kReevalTol = 1e-9;

// flattened view of one instance: height lookup, interior edges as rank
// pairs, fixed boundary values per interior vertex
struct InstanceView {
    const DisorderField* eta = nullptr;
    int n = 0;
    int64_t nv = 0;
    int64_t G = 0;
    std::vector<double> height_table;              // G × n
    std::vector<std::array<int64_t, 2>> int_edges; // (i, j) interior ranks, i < j
    std::vector<int64_t> bnd_offset;               // nv + 1 prefix sums
    std::vector<double> bnd_values;                // concatenated n-vectors
    std::vector<int> degree;                       // always 2d, kept for masked domains

    const double* height(int64_t g) const {
        return height_table.data() + static_cast<size_t>(g) * n;
    }
    int64_t bnd_count(int64_t i) const {
        return bnd_offset[static_cast<size_t>(i) + 1] - bnd_offset[static_cast<size_t>(i)];
    }
    const double* bnd_value(int64_t i, int64_t k) const {
        return bnd_values.data() +
               static_cast<size_t>(bnd_offset[static_cast<size_t>(i)] + k) * n;
    }

    double energy(const int64_t* labels) const {
        PairwiseAccumulator elastic;
        for (const auto& e : int_edges) {
            elastic.add(dist2(height(labels[e[0]]), height(labels[e[1]]), n));
        }
        PairwiseAccumulator rest;
        for (int64_t i = 0; i < nv; ++i) {
            const double* h = height(labels[i]);
            double b = 0.0;
            for (int64_t k = 0; k < bnd_count(i); ++k) b += dist2(h, bnd_value(i, k), n);
            rest.add(0.5 * b + eta->value(i, labels[i]));
        }
        return 0.5 * elastic.total() + rest.total();
    }

    // elastic cost of placing grid point g at vertex i with neighbors fixed
    double local_cost(int64_t i, int64_t g, const int64_t* labels,
                      const std::vector<std::vector<std::pair<int64_t, int64_t>>>& nbrs) const {
        const double* h = height(g);
        double acc = 0.0;
        for (const auto& [j, unused] : nbrs[static_cast<size_t>(i)]) {
            acc += dist2(h, height(labels[j]), n);
        }
        for (int64_t k = 0; k < bnd_count(i); ++k) acc += dist2(h, bnd_value(i, k), n);
        return 0.5 * acc + eta->value(i, g);
    }
};

InstanceView build_view(const DisorderField& eta, const LatticeField& tau) {
    const Domain& dom = eta.domain;
    require(tau.compatible(dom), "boundary field storage does not match domain");
    require(tau.n == eta.grid.n, "component counts differ");
    InstanceView view;
    view.eta = &eta;
    view.n = eta.grid.n;
    view.nv = dom.interior_count();
    view.G = eta.grid.size();
    view.height_table.resize(static_cast<size_t>(view.G) * view.n);
    for (int64_t g = 0; g < view.G; ++g) {
        eta.grid.heights(g, view.height_table.data() + static_cast<size_t>(g) * view.n);
    }
    view.bnd_offset.assign(static_cast<size_t>(view.nv) + 1, 0);
    view.degree.assign(static_cast<size_t>(view.nv), 2 * dom.d());

    const int d = dom.d();
    int v[kMaxDim], u[kMaxDim];
    // first pass: count boundary neighbors
    for (int64_t i = 0; i < view.nv; ++i) {
        dom.interior_coord(i, v);
        for (int c = 0; c < d; ++c) u[c] = v[c];
        int64_t nb = 0;
        for (int a = 0; a < d; ++a) {
            for (int step : {-1, 1}) {
                u[a] = v[a] + step;
                if (!dom.is_interior(u)) ++nb;
            }
            u[a] = v[a];
        }
        view.bnd_offset[static_cast<size_t>(i) + 1] =
            view.bnd_offset[static_cast<size_t>(i)] + nb;
    }
    view.bnd_values.resize(static_cast<size_t>(view.bnd_offset[static_cast<size_t>(view.nv)]) *
                           view.n);
    // second pass: record edges and boundary values
    std::vector<int64_t> cursor(view.bnd_offset.begin(), view.bnd_offset.end() - 1);
    const auto& ranks = dom.interior_storage_ranks();
    for (int64_t i = 0; i < view.nv; ++i) {
        dom.interior_coord(i, v);
        const int64_t r = ranks[static_cast<size_t>(i)];
        for (int c = 0; c < d; ++c) u[c] = v[c];
        for (int a = 0; a < d; ++a) {
            const int64_t stride = dom.storage_stride(a);
            for (int step : {-1, 1}) {
                u[a] = v[a] + step;
                if (dom.is_interior(u)) {
                    const int64_t j = dom.interior_rank(u);
                    if (i < j) view.int_edges.push_back({i, j});
                } else {
                    const double* tu = tau.at_rank(r + step * stride);
                    double* dst = view.bnd_values.data() +
                                  static_cast<size_t>(cursor[static_cast<size_t>(i)]) * view.n;
                    for (int c = 0; c < view.n; ++c) dst[c] = tu[c];
                    ++cursor[static_cast<size_t>(i)];
                }
            }
            u[a] = v[a];
        }
    }
    return view;
}

std::vector<std::vector<std::pair<int64_t, int64_t>>> neighbor_lists(const InstanceView& view) {
    std::vector<std::vector<std::pair<int64_t, int64_t>>> nbrs(
        static_cast<size_t>(view.nv));
    for (const auto& e : view.int_edges) {
        nbrs[static_cast<size_t>(e[0])].push_back({e[1], 0});
        nbrs[static_cast<size_t>(e[1])].push_back({e[0], 0});
    }
    return nbrs;
}

SolveResult finish(const DisorderField& eta, const LatticeField& tau,
                   std::vector<int64_t> labels, const char* id, bool exact,
                   SolverStats stats, double internal_value, bool cross_check) {
    LatticeField phi = field_from_labels(eta, labels, tau);
    SolveResult out{std::move(labels), std::move(phi), 0.0, id, exact, stats};
    const EnergyBreakdown bd = hamiltonian(eta, out.phi);
    out.ground_energy = bd.total;
    out.stats.pinned = count_pinned(eta, out.labels);
    if (cross_check) {
        check(std::abs(internal_value - out.ground_energy) <=
                  kReevalTol * (1.0 + std::abs(out.ground_energy)),
              "solver value disagrees with re-evaluated energy");
    }
    return out;
}

}  // namespace

int64_t count_pinned(const DisorderField& eta, const std::vector<int64_t>& labels) {
    const int64_t K = eta.grid.K;
    int64_t pinned = 0;
    std::vector<int> digits(static_cast<size_t>(eta.grid.n));
    for (int64_t g : labels) {
        bool hit = false;
        for (int c = 0; c < eta.grid.n; ++c) {
            const int dg = eta.grid.digit(g, c);
            hit = hit || dg <= 1 || dg >= 2 * K - 1;
        }
        pinned += hit ? 1 : 0;
    }
    return pinned;
}

SolveResult solve_bruteforce(const DisorderField& eta, const LatticeField& tau) {
    InstanceView view = build_view(eta, tau);
    double states = 1.0;
    for (int64_t i = 0; i < view.nv; ++i) {
        states *= static_cast<double>(view.G);
        if (states > static_cast<double>(kBruteforceCap)) {
            throw capacity_error("exhaustive search refuses more than 1e7 configurations");
        }
    }

    std::vector<int64_t> labels(static_cast<size_t>(view.nv), 0);
    std::vector<int64_t> best = labels;
    double best_e = view.energy(labels.data());
    SolverStats stats;
    stats.configurations = 1;
    while (true) {
        // odometer: last vertex is least significant, so configurations are
        // visited in lexicographic order of the label vector
        int64_t pos = view.nv - 1;
        while (pos >= 0 && labels[static_cast<size_t>(pos)] == view.G - 1) {
            labels[static_cast<size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++labels[static_cast<size_t>(pos)];
        ++stats.configurations;
        const double e = view.energy(labels.data());
        if (e < best_e) {
            best_e = e;
            best = labels;
        }
    }
    return finish(eta, tau, std::move(best), "bruteforce", true, stats, best_e, true);
}

namespace {

// g[x] = min_y a·(x−y)² + f[y] via the lower envelope of parabolas
void envelope_transform(const double* f, double* g, int M, double a, int* vbuf,
                        double* zbuf) {
    int k = 0;
    vbuf[0] = 0;
    zbuf[0] = -std::numeric_limits<double>::infinity();
    zbuf[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < M; ++q) {
        double s;
        while (true) {
            const int p = vbuf[k];
            s = (f[q] + a * double(q) * q - (f[p] + a * double(p) * p)) /
                (2.0 * a * (q - p));
            if (s <= zbuf[k]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        vbuf[k] = q;
        zbuf[k] = s;
        zbuf[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int x = 0; x < M; ++x) {
        while (zbuf[k + 1] < x) ++k;
        const double dx = double(x) - vbuf[k];
        g[x] = a * dx * dx + f[vbuf[k]];
    }
}

// n-dimensional separable transform over the height grid, in place
void grid_envelope(double* buf, int n, int M, double a, std::vector<double>& fline,
                   std::vector<double>& gline, std::vector<int>& vbuf,
                   std::vector<double>& zbuf) {
    int64_t G = 1;
    for (int c = 0; c < n; ++c) G *= M;
    for (int c = 0; c < n; ++c) {
        int64_t stride = 1;
        for (int cc = c + 1; cc < n; ++cc) stride *= M;  // component 0 most significant
        for (int64_t base = 0; base < G; ++base) {
            if ((base / stride) % M != 0) continue;
            for (int m = 0; m < M; ++m) {
                fline[static_cast<size_t>(m)] = buf[base + m * stride];
            }
            envelope_transform(fline.data(), gline.data(), M, a, vbuf.data(),
                               zbuf.data());
            for (int m = 0; m < M; ++m) {
                buf[base + m * stride] = gline[static_cast<size_t>(m)];
            }
        }
    }
}

}  // namespace

SolveResult solve_chain_dp(const DisorderField& eta, const LatticeField& tau) {
    const Domain& dom = eta.domain;
    require(dom.d() == 1 && !dom.has_mask(), "path dynamic program needs a 1-d box domain");
    InstanceView view = build_view(eta, tau);
    const int n = view.n;
    const int M = eta.grid.axis_points();
    const int64_t G = view.G;
    const int64_t nv = view.nv;
    const double a = 0.5 * eta.grid.delta * eta.grid.delta;

    // fixed endpoint values
    const auto& ranks = dom.interior_storage_ranks();
    const int64_t stride0 = dom.storage_stride(0);
    const double* tau_left = tau.at_rank(ranks.front() - stride0);
    const double* tau_right = tau.at_rank(ranks.back() + stride0);

    if (static_cast<double>(nv) * static_cast<double>(G) > 4e7) {
        throw capacity_error("path dynamic program table would exceed the memory budget");
    }
    // suffix[i][g]: minimal cost of vertices i.. given label g at vertex i,
    // including η_i and every edge to the right of vertex i
    std::vector<double> suffix(static_cast<size_t>(nv) * G);
    std::vector<double> fline(static_cast<size_t>(M)), gline(static_cast<size_t>(M));
    std::vector<int> vbuf(static_cast<size_t>(M));
    std::vector<double> zbuf(static_cast<size_t>(M) + 1);

    double* last = suffix.data() + static_cast<size_t>(nv - 1) * G;
    for (int64_t g = 0; g < G; ++g) {
        last[g] = eta.value(nv - 1, g) + 0.5 * dist2(view.height(g), tau_right, n);
    }
    std::vector<double> carry(static_cast<size_t>(G));
    for (int64_t i = nv - 2; i >= 0; --i) {
        std::copy(suffix.begin() + static_cast<size_t>(i + 1) * G,
                  suffix.begin() + static_cast<size_t>(i + 2) * G, carry.begin());
        grid_envelope(carry.data(), n, M, a, fline, gline, vbuf, zbuf);
        double* row = suffix.data() + static_cast<size_t>(i) * G;
        for (int64_t g = 0; g < G; ++g) {
            row[g] = eta.value(i, g) + carry[static_cast<size_t>(g)];
        }
    }

    // forward decode: ascending scans with strict improvement give the
    // lexicographically first minimizer
    std::vector<int64_t> labels(static_cast<size_t>(nv));
    double ge = 0.0;
    {
        const double* row = suffix.data();
        int64_t arg = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int64_t g = 0; g < G; ++g) {
            const double e = 0.5 * dist2(tau_left, view.height(g), n) + row[g];
            if (e < best) {
                best = e;
                arg = g;
            }
        }
        labels[0] = arg;
        ge = best;
    }
    for (int64_t i = 1; i < nv; ++i) {
        const double* row = suffix.data() + static_cast<size_t>(i) * G;
        const double* hp = view.height(labels[static_cast<size_t>(i - 1)]);
        int64_t arg = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int64_t g = 0; g < G; ++g) {
            const double e = 0.5 * dist2(hp, view.height(g), n) + row[g];
            if (e < best) {
                best = e;
                arg = g;
            }
        }
        labels[static_cast<size_t>(i)] = arg;
    }

    SolverStats stats;
    stats.sweeps = nv;
    return finish(eta, tau, std::move(labels), "chain", true, stats, ge, true);
}

SolveResult solve_graphcut(const DisorderField& eta, const LatticeField& tau) {
    require(eta.grid.n == 1, "cut solver handles scalar heights only");
    InstanceView view = build_view(eta, tau);
    const int64_t nv = view.nv;
    const int M = eta.grid.axis_points();
    const int levels = M - 1;
    const double c2 = eta.grid.delta * eta.grid.delta;

    const double arc_estimate =
        2.0 * (static_cast<double>(view.int_edges.size()) * levels * levels +
               static_cast<double>(nv) * (levels + 1.0));
    if (arc_estimate > 6e7) {
        throw capacity_error("cut network would exceed the arc budget");
    }

    const int64_t s = nv * levels;
    const int64_t t = s + 1;
    MaxFlow mf(t + 1);
    const auto node = [levels](int64_t v, int m) { return v * levels + (m - 1); };

    PairwiseAccumulator constant;

    // per-level linear weights from the quadratic edge spreading
    std::vector<double> linear(static_cast<size_t>(nv) * levels, 0.0);
    for (const auto& e : view.int_edges) {
        for (int m = 1; m <= levels; ++m) {
            linear[static_cast<size_t>(e[0] * levels + m - 1)] +=
                c2 * (0.5 * (2.0 * m - 1.0) - levels);
            linear[static_cast<size_t>(e[1] * levels + m - 1)] +=
                c2 * 0.5 * (2.0 * m - 1.0);
        }
    }

    // monotone chains
    for (int64_t v = 0; v < nv; ++v) {
        for (int m = 1; m < levels; ++m) {
            mf.add_edge(node(v, m + 1), node(v, m), kInfCap);
        }
    }
    // quadratic edge costs spread across level pairs
    for (const auto& e : view.int_edges) {
        for (int m = 1; m <= levels; ++m) {
            for (int mp = 1; mp <= levels; ++mp) {
                mf.add_edge(node(e[0], m), node(e[1], mp), c2);
            }
        }
    }
    // unary terms: θ_v(m) − θ_v(m−1) plus the linear corrections
    const auto theta = [&](int64_t v, int m) {
        double acc = view.eta->value(v, m);
        const double h = view.height(m)[0];
        for (int64_t k = 0; k < view.bnd_count(v); ++k) {
            const double dvb = h - view.bnd_value(v, k)[0];
            acc += 0.5 * dvb * dvb;
        }
        return acc;
    };
    for (int64_t v = 0; v < nv; ++v) {
        constant.add(theta(v, 0));
        double prev = theta(v, 0);
        for (int m = 1; m <= levels; ++m) {
            const double cur = theta(v, m);
            const double D = cur - prev + linear[static_cast<size_t>(v * levels + m - 1)];
            prev = cur;
            if (D >= 0.0) {
                mf.add_edge(node(v, m), t, D);
            } else {
                mf.add_edge(s, node(v, m), -D);
                constant.add(D);
            }
        }
    }

    SolverStats stats;
    stats.arcs = mf.arc_count();
    const double flow = mf.solve(s, t);
    stats.augmentations = mf.augmentations();
    stats.phases = mf.phases();
    stats.cut_value = flow;
    check(std::abs(mf.cut_capacity() - flow) <= 1e-6 * (1.0 + std::abs(flow)),
          "cut capacity does not certify the flow value");

    std::vector<int64_t> labels(static_cast<size_t>(nv), 0);
    for (int64_t v = 0; v < nv; ++v) {
        int64_t lab = 0;
        bool prev_on = true;
        for (int m = 1; m <= levels; ++m) {
            const bool on = mf.source_side(node(v, m));
            check(!on || prev_on, "level indicators lost monotonicity");
            if (on) lab = m;
            prev_on = on;
        }
        labels[static_cast<size_t>(v)] = lab;
    }
    const double ge = constant.total() + flow;
    return finish(eta, tau, std::move(labels), "graphcut", true, stats, ge, true);
}

SolveResult solve_coordinate_descent(const DisorderField& eta, const LatticeField& tau,
                                     const DescentOptions& opt) {
    require(opt.restarts >= 1 && opt.max_sweeps >= 1, "descent needs work to do");
    InstanceView view = build_view(eta, tau);
    const auto nbrs = neighbor_lists(view);
    const int64_t nv = view.nv;
    const int64_t G = view.G;

    GaussianStream init(opt.seed, kStreamDescentInit);
    GaussianStream metro(opt.seed, kStreamMetropolis);

    std::vector<int64_t> best;
    double best_e = std::numeric_limits<double>::infinity();
    SolverStats stats;
    stats.restarts = opt.restarts;

    std::vector<int64_t> labels(static_cast<size_t>(nv));
    for (int r = 0; r < opt.restarts; ++r) {
        if (r == 0) {
            // start from the grid origin, matching a flat surface
            std::fill(labels.begin(), labels.end(), eta.grid.origin());
        } else {
            for (int64_t i = 0; i < nv; ++i) {
                const double u = init.uniform(pack_slot(static_cast<uint32_t>(r), i), 0);
                labels[static_cast<size_t>(i)] =
                    std::min<int64_t>(G - 1, static_cast<int64_t>(u * G));
            }
        }

        if (opt.anneal) {
            double temp = opt.t_start;
            const double decay =
                opt.anneal_steps > 1
                    ? std::pow(opt.t_end / opt.t_start, 1.0 / (opt.anneal_steps - 1))
                    : 1.0;
            for (int step = 0; step < opt.anneal_steps; ++step) {
                const int64_t slot = pack_slot(static_cast<uint32_t>(r), step);
                const int64_t i = std::min<int64_t>(
                    nv - 1, static_cast<int64_t>(metro.uniform(slot, 0) * nv));
                const int64_t g = std::min<int64_t>(
                    G - 1, static_cast<int64_t>(metro.uniform(slot, 1) * G));
                const double before = view.local_cost(i, labels[static_cast<size_t>(i)],
                                                      labels.data(), nbrs);
                const double after = view.local_cost(i, g, labels.data(), nbrs);
                const double delta = after - before;
                if (delta <= 0.0 || metro.uniform(slot, 2) < std::exp(-delta / temp)) {
                    labels[static_cast<size_t>(i)] = g;
                }
                temp *= decay;
            }
        }

        for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
            ++stats.sweeps;
            bool changed = false;
            for (int64_t i = 0; i < nv; ++i) {
                int64_t arg = labels[static_cast<size_t>(i)];
                double best_local = view.local_cost(i, arg, labels.data(), nbrs);
                for (int64_t g = 0; g < G; ++g) {
                    const double e = view.local_cost(i, g, labels.data(), nbrs);
                    if (e < best_local) {
                        best_local = e;
                        arg = g;
                    }
                }
                if (arg != labels[static_cast<size_t>(i)]) {
                    labels[static_cast<size_t>(i)] = arg;
                    changed = true;
                }
            }
            if (!changed) break;
        }

        const double e = view.energy(labels.data());
        if (e < best_e) {
            best_e = e;
            best = labels;
        }
    }
    return finish(eta, tau, std::move(best), "descent", false, stats, best_e, true);
}

SolveResult solve(const DisorderField& eta, const LatticeField& tau,
                  const std::string& method, const DescentOptions& opt) {
    const Domain& dom = eta.domain;
    if (method == "bruteforce") return solve_bruteforce(eta, tau);
    if (method == "chain") return solve_chain_dp(eta, tau);
    if (method == "graphcut") return solve_graphcut(eta, tau);
    if (method == "descent") return solve_coordinate_descent(eta, tau, opt);
    require(method == "auto", "unknown solver method: " + method);
    if (dom.d() == 1 && !dom.has_mask()) return solve_chain_dp(eta, tau);
    if (eta.grid.n == 1) return solve_graphcut(eta, tau);
    const double states = std::pow(static_cast<double>(eta.grid.size()),
                                   static_cast<double>(dom.interior_count()));
    if (states <= static_cast<double>(kBruteforceCap)) return solve_bruteforce(eta, tau);
    return solve_coordinate_descent(eta, tau, opt);
}

}  // namespace msre
