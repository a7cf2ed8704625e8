#pragma once
// Variable-coefficient Poisson solver for the pressure projection:
//
//     div( a grad p ) = rhs,   zero-flux outer boundary,
//
// with a >= 0 given per cell (a = h/rho in the projection; a ~ 0 inside
// solid).  The discrete system is written in face-conductance form
//
//     sum_faces g_f (p_nb - p_c) = rhs_c * dx * dy,      g_f = a_f * len/d,
//
// with harmonic face averaging of a, which kills the flux smoothly where the
// coefficient drops to zero.  The matrix is symmetric positive semidefinite;
// the constant per connected component spans the null space.
//
// Solver: flexible conjugate gradients (Polak-Ribiere beta, true residual
// recomputed every iteration, so the convergence claim is always measured
// against b - A x) preconditioned with an aggregation multigrid K-cycle.
// The hierarchy coarsens cell-centered 2:1 by plain aggregation: each live
// coarse value injects into its 2x2 children, restriction sums the child
// residuals, and the Galerkin coarse matrix is just A summed over aggregate
// pairs.  Those coarse operators inherit symmetry, zero row sums on coupled
// cells, and exact diagonal dominance from the fine level -- no coefficient
// layout can produce an unstable smoother.  Aggregation alone overestimates
// coarse energy by roughly 2x per level, so each coarse system is solved
// with two recursive, conjugated, line-searched descent steps (a K-cycle);
// the A-norm line searches rescale the correction level by level, which is
// what makes injection transfers competitive with interpolation.  Smoothing
// is symmetric Gauss-Seidel, two sweeps each way, and the coarsest level is
// solved with a dense LU.  Decoupled (solid) cells are pinned and stay out
// of the hierarchy entirely, so their rows cannot pollute the fluid
// equations.  Every loop runs in a fixed order, so results are
// bit-reproducible.  The line searches make the preconditioner nonlinear,
// which is why the outer iteration must be the flexible variant.
//
// Rebuilding the coarse hierarchy costs a few fine-grid passes; callers that
// change the coefficient gradually (density drifting with the phase field)
// can pass rebuild_hierarchy = false most steps.  The fine operator is always
// rebuilt, so the solution is exact for the current coefficient either way;
// only preconditioner quality degrades with staleness.
//
// Known limit: masks with one-cell hinge necks carry near-null modes that
// fixed 2x2 aggregation cannot represent; on such layouts convergence can
// stall around 1e-7 relative.  Tolerances through ~1e-6 -- what time
// stepping uses -- are reliable on every geometry tried; tighter ones are
// for smooth-walled validation problems.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "poredry/grid.hpp"

namespace poredry {

struct PoissonStats {
    int iters = 0;
    double rel_residual = 0.0;   // ||b - A x||_inf / ||b||_inf at exit
    double compat_adjust = 0.0;  // largest per-component mean removed from b
    bool converged = false;
    std::vector<double> residual_history;
};

class PoissonSolver {
public:
    explicit PoissonSolver(const Grid2D& g) : grid_(g) {
        int nx = g.nx, ny = g.ny;
        while (true) {
            levels_.push_back(Level(nx, ny));
            if (nx <= 4 || ny <= 4 || std::size_t(nx) * ny <= 64) break;
            nx = (nx + 1) / 2;
            ny = (ny + 1) / 2;
        }
        levels_[0].five_point = true;
        comp_.assign(levels_[0].cells(), -1);
    }

    void set_coefficient(const ScalarField& a) { set_coefficient(a, true); }

    /// Rebuild the operator from the cell coefficient field a >= 0.  The
    /// fine-level stencil is always refreshed; the coarse hierarchy and the
    /// component labeling only when rebuild_hierarchy is set (or on first use).
    void set_coefficient(const ScalarField& a, bool rebuild_hierarchy) {
        Level& L = levels_[0];
        const int nx = L.nx, ny = L.ny;
        const double cx = grid_.dy / grid_.dx, cy = grid_.dx / grid_.dy;
        auto harm = [](double l, double r) {
            const double s = l + r;
            return s > 0.0 ? 2.0 * l * r / s : 0.0;
        };
        double gsum = 0.0;
        std::size_t gcount = 0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const std::size_t c = L.id(i, j);
                const double gE = i < nx - 1 ? cx * harm(a(i, j), a(i + 1, j)) : 0.0;
                const double gW = i > 0 ? cx * harm(a(i - 1, j), a(i, j)) : 0.0;
                const double gN = j < ny - 1 ? cy * harm(a(i, j), a(i, j + 1)) : 0.0;
                const double gS = j > 0 ? cy * harm(a(i, j - 1), a(i, j)) : 0.0;
                L.sE[c] = -gE;
                L.sW[c] = -gW;
                L.sN[c] = -gN;
                L.sS[c] = -gS;
                const double s = gE + gW + gN + gS;
                L.active[c] = s > 0.0;
                L.sC[c] = s;  // inactive rows pinned below, once gscale is known
                gsum += gE + gN;
                gcount += (gE > 0.0) + (gN > 0.0);
            }
        // Pin decoupled cells at the typical conductance magnitude so their
        // rows never dwarf (or vanish next to) the live equations.
        const double gscale = gcount > 0 ? gsum / double(gcount) : 1.0;
        for (std::size_t c = 0; c < L.cells(); ++c)
            if (!L.active[c]) L.sC[c] = gscale;
        L.refresh_inv_diag();

        if (rebuild_hierarchy || !hierarchy_built_) {
            for (std::size_t l = 1; l < levels_.size(); ++l)
                galerkin(levels_[l - 1], levels_[l]);
            factor_coarsest();
            refresh_components();
            hierarchy_built_ = true;
        }
    }

    /// Solve div(a grad p) = rhs; p doubles as the initial guess (warm start)
    /// and is returned with zero mean per connected component.
    PoissonStats solve(ScalarField& p, const ScalarField& rhs, double tol, int max_iters) {
        Level& L = levels_[0];
        const int nx = L.nx, ny = L.ny;
        const double vol = grid_.dx * grid_.dy;
        std::vector<double>&x = xwork_, &b = bwork_, &r = rwork_, &z = zwork_, &d = dwork_, &q = qwork_;
        x.assign(L.cells(), 0.0);
        b.assign(L.cells(), 0.0);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                // A p = -B with B = rhs*vol, so that A is positive semidefinite
                b[L.id(i, j)] = comp_[L.id(i, j)] >= 0 ? -rhs(i, j) * vol : 0.0;
                x[L.id(i, j)] = p(i, j);
            }

        PoissonStats st;
        st.compat_adjust = remove_component_means(b);
        remove_component_means(x);

        double bnorm = 0.0;
        for (double v : b) bnorm = std::max(bnorm, std::abs(v));
        if (bnorm == 0.0) {
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) p(i, j) = 0.0;
            st.converged = true;
            return st;
        }

        r.assign(L.cells(), 0.0);
        z.assign(L.cells(), 0.0);
        d.assign(L.cells(), 0.0);
        q.assign(L.cells(), 0.0);
        std::vector<double>& rprev = rprevwork_;
        rprev.assign(L.cells(), 0.0);

        L.residual(x, b, r);
        double rnorm = inf_norm(r);
        st.residual_history.push_back(rnorm / bnorm);
        double rho_prev = 0.0;
        int it = 0;
        while (rnorm > tol * bnorm && it < max_iters) {
            precondition(z, r);
            // Polak-Ribiere beta tolerates an inexact/stale preconditioner
            double rho = dot(r, z);
            if (it == 0) {
                d = z;
            } else {
                double num = rho;
                for (std::size_t k = 0; k < z.size(); ++k) num -= rprev[k] * z[k];
                const double beta = std::max(0.0, num / rho_prev);
                for (std::size_t k = 0; k < d.size(); ++k) d[k] = z[k] + beta * d[k];
            }
            rho_prev = rho;
            rprev = r;
            L.apply(d, q);
            const double dq = dot(d, q);
            if (dq <= 0.0) break;  // null-space direction; gauge already fixed
            // exact line search along d: with a nonlinear preconditioner
            // r'd != r'z, and using rho here can step uphill
            const double alpha = dot(r, d) / dq;
            for (std::size_t k = 0; k < x.size(); ++k) x[k] += alpha * d[k];
            L.residual(x, b, r);  // true residual, not the two-term recursion
            rnorm = inf_norm(r);
            st.residual_history.push_back(rnorm / bnorm);
            ++it;
        }
        remove_component_means(x);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) p(i, j) = x[L.id(i, j)];
        st.iters = it;
        st.rel_residual = rnorm / bnorm;
        st.converged = rnorm <= tol * bnorm;
        return st;
    }

    /// Conductance-connected component label per cell, -1 where isolated
    /// (coefficient ~ 0 on all faces).
    const std::vector<int>& components() const { return comp_; }
    int component_count() const { return ncomp_; }

private:
    struct Level {
        int nx, ny;
        bool five_point = false;  // level 0 has no diagonal couplings
        // signed 9-point stencil: sC on the diagonal, neighbors <= 0
        std::vector<double> sC, sE, sW, sN, sS, sNE, sNW, sSE, sSW, invC;
        std::vector<char> active;
        std::vector<double> pw, bw, rw, zw, qw, vw, uw;  // per-level cycle workspaces
        Level(int nx_, int ny_)
            : nx(nx_), ny(ny_),
              sC(std::size_t(nx_) * ny_, 0.0), sE(sC), sW(sC), sN(sC), sS(sC),
              sNE(sC), sNW(sC), sSE(sC), sSW(sC), invC(sC),
              active(std::size_t(nx_) * ny_, 0), pw(sC), bw(sC), rw(sC), zw(sC),
              qw(sC), vw(sC), uw(sC) {}
        std::size_t cells() const { return std::size_t(nx) * ny; }
        std::size_t id(int i, int j) const { return std::size_t(j) * nx + i; }

        void refresh_inv_diag() {
            for (std::size_t c = 0; c < cells(); ++c) invC[c] = 1.0 / sC[c];
        }

        double row_mul(const std::vector<double>& x, int i, int j) const {
            const std::size_t c = id(i, j);
            double acc = 0.0;
            const bool w = i > 0, e = i < nx - 1, s = j > 0, n = j < ny - 1;
            if (w) acc += sW[c] * x[c - 1];
            if (e) acc += sE[c] * x[c + 1];
            if (s) acc += sS[c] * x[c - nx];
            if (n) acc += sN[c] * x[c + nx];
            if (!five_point) {
                if (s && w) acc += sSW[c] * x[c - nx - 1];
                if (s && e) acc += sSE[c] * x[c - nx + 1];
                if (n && w) acc += sNW[c] * x[c + nx - 1];
                if (n && e) acc += sNE[c] * x[c + nx + 1];
            }
            return acc;
        }

        void apply(const std::vector<double>& x, std::vector<double>& q) const {
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    const std::size_t c = id(i, j);
                    q[c] = sC[c] * x[c] + row_mul(x, i, j);
                }
        }
        void residual(const std::vector<double>& x, const std::vector<double>& b,
                      std::vector<double>& r) const {
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    const std::size_t c = id(i, j);
                    r[c] = b[c] - sC[c] * x[c] - row_mul(x, i, j);
                }
        }
        void gs_forward(std::vector<double>& x, const std::vector<double>& b) const {
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    const std::size_t c = id(i, j);
                    x[c] = (b[c] - row_mul(x, i, j)) * invC[c];
                }
        }
        void gs_backward(std::vector<double>& x, const std::vector<double>& b) const {
            for (int j = ny - 1; j >= 0; --j)
                for (int i = nx - 1; i >= 0; --i) {
                    const std::size_t c = id(i, j);
                    x[c] = (b[c] - row_mul(x, i, j)) * invC[c];
                }
        }
    };

    // Coarse operator = R A P with aggregation transfers: P injects each
    // coarse value into the live cells of its 2x2 aggregate and R = P^T sums
    // their residuals, so A_coarse(agg f, agg f') accumulates A(f, f') over
    // live fine pairs.  Neighbors stay adjacent under halving, hence the
    // result is at most 9-point.  Because the entries are plain sums of a
    // symmetric M-matrix with zero row sums over the live subsystem, every
    // coarse level keeps those properties exactly.
    static void galerkin(const Level& F, Level& C) {
        // coarse activity: any live child
        std::fill(C.active.begin(), C.active.end(), 0);
        for (int j = 0; j < F.ny; ++j)
            for (int i = 0; i < F.nx; ++i)
                if (F.active[F.id(i, j)]) C.active[C.id(i / 2, j / 2)] = 1;

        auto zero = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
        zero(C.sC); zero(C.sE); zero(C.sW); zero(C.sN); zero(C.sS);
        zero(C.sNE); zero(C.sNW); zero(C.sSE); zero(C.sSW);

        auto scatter = [&C](int I, int J, int dI, int dJ, double v) {
            const std::size_t c = C.id(I, J);
            if (dI == 0 && dJ == 0) C.sC[c] += v;
            else if (dI == 1 && dJ == 0) C.sE[c] += v;
            else if (dI == -1 && dJ == 0) C.sW[c] += v;
            else if (dI == 0 && dJ == 1) C.sN[c] += v;
            else if (dI == 0 && dJ == -1) C.sS[c] += v;
            else if (dI == 1 && dJ == 1) C.sNE[c] += v;
            else if (dI == -1 && dJ == 1) C.sNW[c] += v;
            else if (dI == 1 && dJ == -1) C.sSE[c] += v;
            else C.sSW[c] += v;  // (-1,-1)
        };

        for (int j = 0; j < F.ny; ++j)
            for (int i = 0; i < F.nx; ++i) {
                const std::size_t c = F.id(i, j);
                if (!F.active[c]) continue;  // pinned rows stay out of the hierarchy
                const int I = i / 2, J = j / 2;
                C.sC[C.id(I, J)] += F.sC[c];
                // a nonzero coupling implies a live neighbor, so no activity
                // check is needed on the far end
                const bool w = i > 0, e = i < F.nx - 1, s = j > 0, n = j < F.ny - 1;
                if (e && F.sE[c] != 0.0) scatter(I, J, (i + 1) / 2 - I, 0, F.sE[c]);
                if (w && F.sW[c] != 0.0) scatter(I, J, (i - 1) / 2 - I, 0, F.sW[c]);
                if (n && F.sN[c] != 0.0) scatter(I, J, 0, (j + 1) / 2 - J, F.sN[c]);
                if (s && F.sS[c] != 0.0) scatter(I, J, 0, (j - 1) / 2 - J, F.sS[c]);
                if (!F.five_point) {
                    if (n && e && F.sNE[c] != 0.0)
                        scatter(I, J, (i + 1) / 2 - I, (j + 1) / 2 - J, F.sNE[c]);
                    if (n && w && F.sNW[c] != 0.0)
                        scatter(I, J, (i - 1) / 2 - I, (j + 1) / 2 - J, F.sNW[c]);
                    if (s && e && F.sSE[c] != 0.0)
                        scatter(I, J, (i + 1) / 2 - I, (j - 1) / 2 - J, F.sSE[c]);
                    if (s && w && F.sSW[c] != 0.0)
                        scatter(I, J, (i - 1) / 2 - I, (j - 1) / 2 - J, F.sSW[c]);
                }
            }
        for (std::size_t c = 0; c < C.cells(); ++c)
            if (C.sC[c] <= 0.0) C.sC[c] = 1.0;  // dead aggregates hold zero
        C.refresh_inv_diag();
    }

    void precondition(std::vector<double>& z, const std::vector<double>& r) {
        solve_level(0, z, r);
        remove_component_means(z);
    }

    // One K-cycle step for A_l x = b: forward Gauss-Seidel, aggregated
    // coarse correction, backward Gauss-Seidel.  The coarse system is not
    // visited once but solved with two recursive steps of preconditioned
    // steepest descent; the A-norm line search rescales each correction,
    // which is what compensates the stiffness of aggregated operators.
    // Work per call stays ~2x a plain V-cycle (levels shrink 4x, visits
    // grow 2x).
    void solve_level(std::size_t l, std::vector<double>& x, const std::vector<double>& b) {
        Level& L = levels_[l];
        std::fill(x.begin(), x.end(), 0.0);
        if (l + 1 == levels_.size()) {
            solve_coarsest(x, b);
            return;
        }
        // two sweeps each way: the second roughly halves the outer
        // iteration count on masked geometries, well worth its cost
        L.gs_forward(x, b);
        L.gs_forward(x, b);
        L.residual(x, b, L.rw);

        Level& C = levels_[l + 1];
        std::fill(C.bw.begin(), C.bw.end(), 0.0);
        for (int j = 0; j < L.ny; ++j)
            for (int i = 0; i < L.nx; ++i) {
                const std::size_t c = L.id(i, j);
                if (L.active[c]) C.bw[C.id(i / 2, j / 2)] += L.rw[c];
            }

        // Two flexible-CG steps on the coarse system (pw accumulates the
        // solution, bw degrades into the running residual; the recursive
        // call never touches either).  The A-norm line searches rescale
        // the corrections level by level, which is what makes aggregated
        // operators usable, and the second, conjugated direction is what
        // keeps heterogeneous masks convergent: one steplength cannot
        // serve several weakly coupled pockets at once.  Both steps run
        // unconditionally -- adaptive variants tried here made the
        // preconditioner vary between outer iterations, which the outer
        // recurrence repays with stagnation.  The last level takes the
        // child solve directly: it is exact there.
        std::fill(C.pw.begin(), C.pw.end(), 0.0);
        solve_level(l + 1, C.zw, C.bw);
        if (l + 2 == levels_.size()) {
            C.pw = C.zw;
        } else {
            C.apply(C.zw, C.qw);
            const double d1 = dot(C.zw, C.qw);
            if (d1 <= 0.0) {  // null-space direction; take it unscaled
                C.pw = C.zw;
            } else {
                const double a1 = dot(C.bw, C.zw) / d1;
                for (std::size_t k = 0; k < C.cells(); ++k) {
                    C.pw[k] = a1 * C.zw[k];
                    C.bw[k] -= a1 * C.qw[k];
                }
                solve_level(l + 1, C.vw, C.bw);
                C.apply(C.vw, C.uw);
                // A-orthogonalize the second direction against the first
                const double beta = dot(C.vw, C.qw) / d1;
                const double d2 = dot(C.vw, C.uw) - beta * beta * d1;
                if (d2 > 0.0) {
                    const double a2 = dot(C.bw, C.vw) / d2;
                    for (std::size_t k = 0; k < C.cells(); ++k)
                        C.pw[k] += a2 * (C.vw[k] - beta * C.zw[k]);
                }
            }
        }

        for (int j = 0; j < L.ny; ++j)
            for (int i = 0; i < L.nx; ++i) {
                const std::size_t c = L.id(i, j);
                if (L.active[c]) x[c] += C.pw[C.id(i / 2, j / 2)];
            }
        L.gs_backward(x, b);
        L.gs_backward(x, b);
    }

    // Dense LU of the coarsest operator (at most a few dozen cells), with a
    // tiny diagonal shift so the singular Neumann matrix factors; the
    // spurious constant it admits is harmless and removed with the gauge.
    void factor_coarsest() {
        const Level& L = levels_.back();
        const int n = int(L.cells());
        lu_.assign(std::size_t(n) * n, 0.0);
        double dmax = 0.0;
        for (int c = 0; c < n; ++c) dmax = std::max(dmax, std::abs(L.sC[c]));
        const double shift = 1e-10 * (dmax > 0.0 ? dmax : 1.0);
        for (int j = 0; j < L.ny; ++j)
            for (int i = 0; i < L.nx; ++i) {
                const int c = int(L.id(i, j));
                auto put = [&](int ii, int jj, double v) {
                    if (ii < 0 || ii >= L.nx || jj < 0 || jj >= L.ny) return;
                    lu_[std::size_t(c) * n + int(L.id(ii, jj))] = v;
                };
                lu_[std::size_t(c) * n + c] = L.sC[c] + shift;
                put(i + 1, j, L.sE[c]);
                put(i - 1, j, L.sW[c]);
                put(i, j + 1, L.sN[c]);
                put(i, j - 1, L.sS[c]);
                put(i + 1, j + 1, L.sNE[c]);
                put(i - 1, j + 1, L.sNW[c]);
                put(i + 1, j - 1, L.sSE[c]);
                put(i - 1, j - 1, L.sSW[c]);
            }
        // in-place Doolittle LU (no pivoting: rows are near diagonally
        // dominant; the shift keeps pivots away from zero)
        for (int k = 0; k < n; ++k) {
            double pivot = lu_[std::size_t(k) * n + k];
            if (std::abs(pivot) < shift) {
                pivot = pivot < 0.0 ? -shift : shift;
                lu_[std::size_t(k) * n + k] = pivot;
            }
            for (int r = k + 1; r < n; ++r) {
                const double f = lu_[std::size_t(r) * n + k] / pivot;
                lu_[std::size_t(r) * n + k] = f;
                if (f == 0.0) continue;
                for (int m = k + 1; m < n; ++m)
                    lu_[std::size_t(r) * n + m] -= f * lu_[std::size_t(k) * n + m];
            }
        }
    }

    void solve_coarsest(std::vector<double>& x, const std::vector<double>& b) const {
        const int n = int(levels_.back().cells());
        for (int r = 0; r < n; ++r) {
            double s = b[r];
            for (int m = 0; m < r; ++m) s -= lu_[std::size_t(r) * n + m] * x[m];
            x[r] = s;
        }
        for (int r = n - 1; r >= 0; --r) {
            double s = x[r];
            for (int m = r + 1; m < n; ++m) s -= lu_[std::size_t(r) * n + m] * x[m];
            x[r] = s / lu_[std::size_t(r) * n + r];
        }
    }

    void refresh_components() {
        const Level& L = levels_[0];
        // The zero/nonzero face pattern rarely changes between rebuilds; a
        // position-weighted checksum detects pattern changes cheaply.
        std::size_t nz = 0;
        for (std::size_t k = 0; k < L.cells(); ++k) {
            if (L.sE[k] < 0.0) nz += 2 * k + 1;
            if (L.sN[k] < 0.0) nz += 3 * k + 7;
        }
        if (nz == pattern_checksum_ && comp_valid_) return;
        pattern_checksum_ = nz;
        comp_valid_ = true;
        comp_.assign(L.cells(), -1);
        ncomp_ = 0;
        std::vector<std::size_t> stack;
        for (int j0 = 0; j0 < L.ny; ++j0)
            for (int i0 = 0; i0 < L.nx; ++i0) {
                const std::size_t c0 = L.id(i0, j0);
                if (comp_[c0] >= 0 || !L.active[c0]) continue;
                stack.clear();
                stack.push_back(c0);
                comp_[c0] = ncomp_;
                while (!stack.empty()) {
                    const std::size_t c = stack.back();
                    stack.pop_back();
                    const int i = int(c % L.nx), j = int(c / L.nx);
                    auto visit = [&](std::size_t nidx, double coupling) {
                        if (coupling >= 0.0) return;  // entries are <= 0
                        if (comp_[nidx] < 0) {
                            comp_[nidx] = ncomp_;
                            stack.push_back(nidx);
                        }
                    };
                    if (i > 0) visit(c - 1, L.sW[c]);
                    if (i < L.nx - 1) visit(c + 1, L.sE[c]);
                    if (j > 0) visit(c - L.nx, L.sS[c]);
                    if (j < L.ny - 1) visit(c + L.nx, L.sN[c]);
                }
                ++ncomp_;
            }
        comp_size_.assign(ncomp_, 0.0);
        for (std::size_t c = 0; c < comp_.size(); ++c)
            if (comp_[c] >= 0) comp_size_[comp_[c]] += 1.0;
    }

    double remove_component_means(std::vector<double>& v) const {
        if (ncomp_ == 0) return 0.0;
        std::vector<double> mean(ncomp_, 0.0);
        for (std::size_t c = 0; c < v.size(); ++c)
            if (comp_[c] >= 0) mean[comp_[c]] += v[c];
        double worst = 0.0;
        for (int k = 0; k < ncomp_; ++k) {
            mean[k] /= comp_size_[k];
            worst = std::max(worst, std::abs(mean[k]));
        }
        for (std::size_t c = 0; c < v.size(); ++c)
            if (comp_[c] >= 0) v[c] -= mean[comp_[c]];
            else v[c] = 0.0;
        return worst;
    }

    static double inf_norm(const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    static double dot(const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
        return s;
    }

    Grid2D grid_;
    std::vector<Level> levels_;
    std::vector<int> comp_;
    std::vector<double> comp_size_;
    std::vector<double> xwork_, bwork_, rwork_, zwork_, dwork_, qwork_, rprevwork_;
    std::vector<double> lu_;
    std::size_t pattern_checksum_ = std::size_t(-1);
    int ncomp_ = 0;
    bool comp_valid_ = false;
    bool hierarchy_built_ = false;
};

}  // namespace poredry
