#include "msre/lattice.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "msre/common.hpp"
#include "msre/summation.hpp"

namespace msre {

namespace {

constexpr int64_t kDenseFallbackCap = 10000;

Eigen::SparseMatrix<double> dirichlet_matrix(const Domain& dom) {
    const int64_t nv = dom.interior_count();
    const int d = dom.d();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(nv) * (2 * d + 1));
    int v[kMaxDim], u[kMaxDim];
    for (int64_t i = 0; i < nv; ++i) {
        dom.interior_coord(i, v);
        trip.emplace_back(i, i, 2.0 * d);
        for (int c = 0; c < d; ++c) u[c] = v[c];
        for (int a = 0; a < d; ++a) {
            for (int step : {-1, 1}) {
                u[a] = v[a] + step;
                if (dom.is_interior(u)) {
                    trip.emplace_back(i, dom.interior_rank(u), -1.0);
                }
            }
            u[a] = v[a];
        }
    }
    Eigen::SparseMatrix<double> A(nv, nv);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

// Solve A x = b for the −Δ_Λ system; CG with a dense fallback on stagnation.
void solve_dirichlet_system(const Eigen::SparseMatrix<double>& A,
                            const Eigen::MatrixXd& rhs, Eigen::MatrixXd& sol,
                            SolveStats* stats) {
    const int64_t nv = A.rows();
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper>
        cg;
    cg.setTolerance(1e-10);
    cg.setMaxIterations(10 * nv);
    cg.compute(A);
    sol = cg.solve(rhs);
    SolveStats local;
    local.iterations = cg.iterations();
    local.residual = cg.error();
    if (cg.info() != Eigen::Success) {
        check(nv <= kDenseFallbackCap,
              "iterative Dirichlet solve stagnated on a system too large for "
              "the dense fallback");
        Eigen::MatrixXd dense = Eigen::MatrixXd(A);
        sol = dense.ldlt().solve(rhs);
        local.used_dense_fallback = true;
        local.residual = (A * sol - rhs).norm() / std::max(1.0, rhs.norm());
    }
    if (stats != nullptr) *stats = local;
}

}  // namespace

LatticeField laplacian(const LatticeField& f, const Domain& dom) {
    require(f.compatible(dom), "field storage does not match domain");
    const int d = dom.d();
    const int n = f.n;
    LatticeField out(dom.storage(), n);
    const Box& box = dom.storage();
    int v[kMaxDim], u[kMaxDim];
    const int64_t cells = box.size();
    for (int64_t r = 0; r < cells; ++r) {
        box.decode(r, v);
        if (!dom.in_closure(v)) continue;
        const bool v_in = dom.is_interior(v);
        double* dst = out.at_rank(r);
        const double* fv = f.at_rank(r);
        for (int c = 0; c < d; ++c) u[c] = v[c];
        for (int a = 0; a < d; ++a) {
            const int64_t stride = dom.storage_stride(a);
            for (int step : {-1, 1}) {
                u[a] = v[a] + step;
                // the edge {v,u} contributes iff it meets Λ
                if (!v_in && !dom.is_interior(u)) continue;
                if (!box.contains(u)) continue;
                const double* fu = f.at_rank(r + step * stride);
                for (int c = 0; c < n; ++c) dst[c] += fu[c] - fv[c];
            }
            u[a] = v[a];
        }
    }
    return out;
}

double dirichlet_inner(const LatticeField& f, const LatticeField& g,
                       const Domain& dom) {
    require(f.compatible(dom) && g.compatible(dom),
            "field storage does not match domain");
    require(f.n == g.n, "component counts differ");
    const int n = f.n;
    PairwiseAccumulator acc;
    for_each_edge(dom, [&](int64_t ru, int64_t rv) {
        const double* fu = f.at_rank(ru);
        const double* fv = f.at_rank(rv);
        const double* gu = g.at_rank(ru);
        const double* gv = g.at_rank(rv);
        double term = 0.0;
        for (int c = 0; c < n; ++c) term += (fu[c] - fv[c]) * (gu[c] - gv[c]);
        acc.add(term);
    });
    return acc.total();
}

double dirichlet_energy(const LatticeField& f, const Domain& dom) {
    return dirichlet_inner(f, f, dom);
}

double closure_inner(const LatticeField& f, const LatticeField& g,
                     const Domain& dom) {
    require(f.compatible(dom) && g.compatible(dom),
            "field storage does not match domain");
    require(f.n == g.n, "component counts differ");
    const Box& box = dom.storage();
    const int64_t cells = box.size();
    int v[kMaxDim];
    PairwiseAccumulator acc;
    for (int64_t r = 0; r < cells; ++r) {
        box.decode(r, v);
        if (!dom.in_closure(v)) continue;
        const double* fv = f.at_rank(r);
        const double* gv = g.at_rank(r);
        double term = 0.0;
        for (int c = 0; c < f.n; ++c) term += fv[c] * gv[c];
        acc.add(term);
    }
    return acc.total();
}

LatticeField greens_function(const Domain& dom, const int* v,
                             SolveStats* stats) {
    require(dom.is_interior(v), "source vertex must lie in the domain");
    const int64_t nv = dom.interior_count();
    Eigen::SparseMatrix<double> A = dirichlet_matrix(dom);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nv, 1);
    rhs(dom.interior_rank(v), 0) = 1.0;
    Eigen::MatrixXd sol;
    solve_dirichlet_system(A, rhs, sol, stats);
    LatticeField out(dom.storage(), 1);
    const auto& ranks = dom.interior_storage_ranks();
    for (int64_t i = 0; i < nv; ++i) {
        out.values[static_cast<size_t>(ranks[static_cast<size_t>(i)])] =
            sol(i, 0);
    }
    return out;
}

HarmonicExtension harmonic_extension(const LatticeField& tau,
                                     const Domain& dom) {
    require(tau.compatible(dom), "field storage does not match domain");
    const int64_t nv = dom.interior_count();
    const int d = dom.d();
    const int n = tau.n;
    Eigen::SparseMatrix<double> A = dirichlet_matrix(dom);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nv, n);
    int v[kMaxDim], u[kMaxDim];
    for (int64_t i = 0; i < nv; ++i) {
        dom.interior_coord(i, v);
        for (int c = 0; c < d; ++c) u[c] = v[c];
        for (int a = 0; a < d; ++a) {
            for (int step : {-1, 1}) {
                u[a] = v[a] + step;
                if (!dom.is_interior(u)) {
                    const double* tu = tau.at(u);
                    for (int c = 0; c < n; ++c) rhs(i, c) += tu[c];
                }
            }
            u[a] = v[a];
        }
    }
    HarmonicExtension ext{tau, 0.0, {}};
    Eigen::MatrixXd sol;
    solve_dirichlet_system(A, rhs, sol, &ext.stats);
    const auto& ranks = dom.interior_storage_ranks();
    for (int64_t i = 0; i < nv; ++i) {
        double* dst = ext.field.at_rank(ranks[static_cast<size_t>(i)]);
        for (int c = 0; c < n; ++c) dst[c] = sol(i, c);
    }
    ext.dirichlet = dirichlet_energy(ext.field, dom);
    return ext;
}

namespace {

// Λ_j = Λ ∩ (v + (−2^j, 2^j)^d), i.e. |u_i − v_i| ≤ 2^j − 1
Domain scale_restriction(const Domain& dom, const int* v, int j) {
    require(!dom.has_mask(),
            "dyadic shift functions need a box-shaped domain");
    require(j >= 1 && j < 31, "scale index out of range");
    const int d = dom.d();
    const int half = (1 << j) - 1;
    Box win;
    win.d = d;
    for (int a = 0; a < d; ++a) {
        win.lo[a] = v[a] - half;
        win.hi[a] = v[a] + half;
    }
    return Domain(dom.bounds().intersect(win));
}

}  // namespace

int shift_scale_count(const Domain& dom, const int* v) {
    require(dom.is_interior(v), "center vertex must lie in the domain");
    for (int j = 1; j < 31; ++j) {
        Domain cut = scale_restriction(dom, v, j);
        if (cut.bounds() == dom.bounds()) return j;
    }
    check(false, "dyadic scales exhausted without covering the domain");
    return -1;
}

ShiftFunction shift_function_s_j(const Domain& dom, const int* v, int j,
                                 const std::vector<double>& e) {
    const int m = shift_scale_count(dom, v);
    require(j >= 1 && j <= m, "scale index exceeds the covering scale");
    const int n = static_cast<int>(e.size());
    require(n >= 1, "direction vector is empty");

    LatticeField diff(dom.storage(), 1);
    {
        Domain cut_j = scale_restriction(dom, v, j);
        LatticeField gj = greens_function(cut_j, v);
        const Box& sb = cut_j.storage();
        int u[kMaxDim];
        const int64_t cells = sb.size();
        for (int64_t r = 0; r < cells; ++r) {
            sb.decode(r, u);
            diff.values[static_cast<size_t>(diff.box.index(u))] =
                gj.values[static_cast<size_t>(r)];
        }
    }
    if (j >= 2) {
        Domain cut_p = scale_restriction(dom, v, j - 1);
        LatticeField gp = greens_function(cut_p, v);
        const Box& sb = cut_p.storage();
        int u[kMaxDim];
        const int64_t cells = sb.size();
        for (int64_t r = 0; r < cells; ++r) {
            sb.decode(r, u);
            diff.values[static_cast<size_t>(diff.box.index(u))] -=
                gp.values[static_cast<size_t>(r)];
        }
    }

    ShiftFunction out{LatticeField(dom.storage(), n), m};
    const int64_t cells = dom.storage().size();
    for (int64_t r = 0; r < cells; ++r) {
        const double g = diff.values[static_cast<size_t>(r)];
        double* dst = out.field.at_rank(r);
        for (int c = 0; c < n; ++c) dst[c] = g * e[static_cast<size_t>(c)];
    }
    return out;
}

double d_functional(const LatticeField& s, const Domain& dom, double H) {
    require(H > 0.0 && H < 1.0, "Hurst index must lie in (0,1)");
    const double de = dirichlet_energy(s, dom);
    PairwiseAccumulator l2h;
    int64_t support = 0;
    const auto& ranks = dom.interior_storage_ranks();
    for (int64_t i = 0; i < dom.interior_count(); ++i) {
        const double* sv = s.at_rank(ranks[static_cast<size_t>(i)]);
        const double n2 = norm2(sv, s.n);
        if (n2 > 0.0) {
            ++support;
            l2h.add(std::pow(n2, H));
        }
    }
    return std::pow(de, 2.0 - 2.0 * H) * l2h.total() +
           de * de * static_cast<double>(support);
}

BumpReport pi_bump(int d, int L, double eps) {
    require(d >= 1 && d <= kMaxDim, "dimension out of range");
    require(L >= 2, "side parameter too small");
    require(eps > 0.0 && eps < 1.0, "eps must lie in (0,1)");
    const auto q = [](double x) {
        const double y = 1.0 - x * x;
        return y > 0.0 ? y * y : 0.0;
    };
    const double edge = 1.0 - eps / (2.0 * d);
    const double A = 1.0 / std::pow(q(edge), d);

    Domain dom(Box::cube(d, L));
    BumpReport rep;
    rep.A = A;
    rep.pi = LatticeField(dom.storage(), 1);
    const Box& box = dom.storage();
    const double scale = 1.0 / (L + 1.0);
    int v[kMaxDim];
    const int64_t cells = box.size();
    for (int64_t r = 0; r < cells; ++r) {
        box.decode(r, v);
        double p = A;
        for (int a = 0; a < d; ++a) p *= q(v[a] * scale);
        rep.pi.values[static_cast<size_t>(r)] = p;
    }

    // support confined to Λ
    for (int64_t r = 0; r < cells; ++r) {
        box.decode(r, v);
        if (!dom.is_interior(v)) {
            check(rep.pi.values[static_cast<size_t>(r)] == 0.0,
                  "bump leaks outside the domain");
        }
    }

    // π ≥ 1 on the shrunken box Λ_{⌈(1−ε/2d)L⌉}
    rep.inner_L = static_cast<int>(std::ceil(edge * L));
    check(rep.inner_L >= 1 && rep.inner_L <= L, "inner box is degenerate");
    double mn = rep.pi.values[0];
    bool first = true;
    for (int64_t r = 0; r < cells; ++r) {
        box.decode(r, v);
        bool inner = true;
        for (int a = 0; a < d; ++a) {
            inner = inner && std::abs(v[a]) <= rep.inner_L;
        }
        if (!inner) continue;
        const double p = rep.pi.values[static_cast<size_t>(r)];
        mn = first ? p : std::min(mn, p);
        first = false;
    }
    rep.min_inner = mn;
    check(!first && rep.min_inner >= 1.0,
          "bump falls below one on the inner box");

    // discrete Laplacian bounded above by Ĉ/L²
    LatticeField lap = laplacian(rep.pi, dom);
    double mx = 0.0;
    for (int64_t r = 0; r < cells; ++r) {
        box.decode(r, v);
        if (!dom.in_closure(v)) continue;
        mx = std::max(mx, lap.values[static_cast<size_t>(r)]);
    }
    rep.c_laplace = mx * static_cast<double>(L) * L;

    // Dirichlet energy scaling ‖∇π‖² ≍ L^{d−2}
    rep.c_energy = dirichlet_energy(rep.pi, dom) /
                   std::pow(static_cast<double>(L), d - 2);
    return rep;
}

}  // namespace msre
