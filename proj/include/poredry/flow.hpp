#pragma once
// Incompressible two-fluid flow through the static diffuse solid, by a
// Chorin-type fractional step on a collocated grid:
//
//   momentum   d_t(rho h u) = -div(rho h u (x) u) - h grad p
//                             + div(h mu grad u) + u div(mu grad h)
//                             + rho h g + h K
//   continuity 0 = div(h u)
//
// h is the fluid fraction of the solid mask; u div(mu grad h) is the
// diffuse no-slip drag, and K = -phi grad(Phi) the capillary body force.
// Density and viscosity interpolate linearly in the gas fraction phi.
//
// The predictor advances everything except the pressure term; the
// projection solves div((h/rho) grad p) = div(h u*) / dt with the same
// harmonic face conductances as the corrected fluxes, so the divergence of
// the corrected face field equals dt times the linear-solver residual
// identically.  Cells with h below h_min carry zero conductance and zero
// velocity: solid interiors decouple from the solve instead of surviving
// as near-singular modes.
//
// Body forces are re-expressed at faces during the projection (the cell
// kick the predictor applied is subtracted exactly and re-applied as face
// brackets g_n + (a_f/h_f)(Khat - dp/d) that the face pressure gradient can
// cancel identically).  With cell-centred forces and a 997/4.9 density
// ratio the projection leaves an O(1) unbalanced residue in the interface
// band every step, and parasitic currents around a static drop grow
// without bound; the face-bracket form is in exact equilibrium for any
// layered balanced state, so only the genuinely multidimensional residue
// survives.
//
// Three explicit-stability choices in the thin part of the wall band,
// where dividing the h-weighted balance by rho h amplifies everything:
//   - momentum advection is donor-cell upwind on the primitive velocity
//     (the conservative flux form pours momentum into near-empty cells),
//   - viscous face coefficients are harmonic means of h mu, bounding the
//     neighbour coupling by twice the cell's own h mu,
//   - the drag factor dt div(mu grad h) / (rho h) is clamped to [-0.9, 0]:
//     it is a wall friction, so the positive (self-amplifying) values it
//     takes where h falls off quadratically are a discretization artifact.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "poredry/grid.hpp"
#include "poredry/phase.hpp"
#include "poredry/poisson.hpp"
#include "poredry/stencil.hpp"

namespace poredry {

struct FluidProps {
    double rho1 = 1.0;  // gas (phi = 1)
    double rho2 = 1.0;  // solvent (phi = 0)
    double mu1 = 1.0;   // gas viscosity
    double mu2 = 1.0;   // solvent viscosity
    double air_density_factor = 4.0;  // stabilizing multiplier on rho1
    double g = 0.0;                   // gravity magnitude
    double gdir_x = 0.0, gdir_y = -1.0;

    double rho1_eff() const { return rho1 * air_density_factor; }
    double grav_x() const { return g * gdir_x; }
    double grav_y() const { return g * gdir_y; }
};

struct SolverSettings {
    double cfl = 0.3;
    double poisson_tol = 1e-8;  // relative residual of the projection
    int poisson_max_iters = 500;
    double h_min = 1e-6;     // below this cells are solid: u = 0, a = 0
    int rebuild_every = 25;  // steps between multigrid hierarchy refreshes
};

/// Ghost rules for the velocity components.  The default closed box is
/// no-slip: mirrored ghosts put u = 0 on every boundary face.
struct FlowBc {
    BoundaryRule ux = BoundaryRule::mirror();
    BoundaryRule uy = BoundaryRule::mirror();
};

struct FlowState {
    VectorField u;
    ScalarField p;
    // corrected face fluxes of h u (what the projection controls); x faces
    // are indexed i = 0..nx with i between cells i-1 and i, likewise y
    std::vector<double> fx, fy;

    explicit FlowState(const Grid2D& g)
        : u(g), p(g),
          fx(std::size_t(g.nx + 1) * g.ny, 0.0),
          fy(std::size_t(g.nx) * (g.ny + 1), 0.0) {}

    std::size_t fxi(int i, int j) const { return std::size_t(j) * (u.grid().nx + 1) + i; }
    std::size_t fyi(int i, int j) const { return std::size_t(j) * u.grid().nx + i; }
};

inline ScalarField mix_density(const ScalarField& phi, const FluidProps& fp) {
    ScalarField out(phi.grid);
    const double r1 = fp.rho1_eff();
    for (int j = 0; j < phi.grid.ny; ++j)
        for (int i = 0; i < phi.grid.nx; ++i) {
            const double c = std::clamp(phi(i, j), 0.0, 1.0);
            out(i, j) = c * r1 + (1.0 - c) * fp.rho2;
        }
    return out;
}

inline ScalarField mix_viscosity(const ScalarField& phi, const FluidProps& fp) {
    ScalarField out(phi.grid);
    for (int j = 0; j < phi.grid.ny; ++j)
        for (int i = 0; i < phi.grid.nx; ++i) {
            const double c = std::clamp(phi(i, j), 0.0, 1.0);
            out(i, j) = c * fp.mu1 + (1.0 - c) * fp.mu2;
        }
    return out;
}

/// Capillary potential rebuilt from the discrete curvature alone:
/// alpha (phi_nn - lap phi) = -alpha kappa |grad phi|, which equals the
/// thermodynamic potential beta psi' - alpha lap phi on maintained profiles
/// but without the beta-stiff well term, whose grid-scale wiggles (the
/// relaxation operator's curved-interface floor, amplified by 18 sigma/eps)
/// would otherwise drive parasitic currents.  The normal second derivative
/// is taken in its profile-compatible closed form (the relaxation's own
/// target), not as a Hessian projection: the projection's angular truncation
/// error at eps = 5 dx modulates the force around curved interfaces and
/// feeds a slow vortical spin-up, while the closed form is a smooth function
/// of phi alone and leaves the plain Laplacian as the only curvature sensor.
inline ScalarField curvature_potential(const PhaseState& s, const PhaseParams& p) {
    const Grid2D& g = s.phi.grid;
    ScalarField out(g);
    const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy);
    const double heq = std::sqrt(g.dx * g.dy);
    auto at = [&](int i, int j) {
        return s.phi(std::clamp(i, 0, g.nx - 1), std::clamp(j, 0, g.ny - 1));
    };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double pc = at(i, j);
            const double pxx = (at(i + 1, j) - 2.0 * pc + at(i - 1, j)) * ix2;
            const double pyy = (at(i, j + 1) - 2.0 * pc + at(i, j - 1)) * iy2;
            out(i, j) = p.alpha() *
                        (profile_second_difference(pc, heq, p.eps) - (pxx + pyy));
        }
    return out;
}

/// Capillary body force in potential form, K = -phi grad(Phi).
inline VectorField capillary_force(const PhaseState& s, const PhaseParams& p) {
    ScalarField Phi = chem_potential(s, p);
    apply_bc(Phi, BoundaryRule::zero_gradient());
    const Grid2D& g = s.phi.grid;
    VectorField K(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double c = s.phi(i, j);
            K.x(i, j) = -c * (Phi(i + 1, j) - Phi(i - 1, j)) / (2.0 * g.dx);
            K.y(i, j) = -c * (Phi(i, j + 1) - Phi(i, j - 1)) / (2.0 * g.dy);
        }
    return K;
}

/// Largest stable explicit step: advective, viscous, and capillary-wave
/// limits, scaled by the Courant factor.
inline double stable_dt(const FlowState& st, const PhaseParams& pp, const FluidProps& fp,
                        const SolverSettings& set) {
    const Grid2D& g = st.u.grid();
    const double dmin = std::min(g.dx, g.dy);
    double umax = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            umax = std::max(umax, std::hypot(st.u.x(i, j), st.u.y(i, j)));
    double dt = dmin * dmin * std::min(fp.rho1_eff(), fp.rho2) /
                (4.0 * std::max(fp.mu1, fp.mu2));
    if (umax > 0.0) dt = std::min(dt, dmin / umax);
    if (pp.sigma > 0.0)
        dt = std::min(dt, std::sqrt((fp.rho1_eff() + fp.rho2) * pp.eps * pp.eps * pp.eps /
                                    (4.0 * 3.14159265358979323846 * pp.sigma)));
    return set.cfl * dt;
}

/// Fractional-step flow solver.  Holds the projection solver (whose
/// multigrid hierarchy is refreshed every rebuild_every steps; staleness
/// only costs iterations, never accuracy) plus scratch fields.
class FlowSolver {
  public:
    explicit FlowSolver(const Grid2D& g, SolverSettings set = {}, FlowBc bc = {})
        : g_(g), set_(set), bc_(bc), psolver_(g), ustar_(g), rho_(g), mu_(g),
          acut_(g), rhs_(g), pot_(g), cx_(g), cy_(g) {}

    const SolverSettings& settings() const { return set_; }

    /// Explicit update of all momentum terms except -h grad p.
    const VectorField& predictor(FlowState& st, const PhaseState& ph, const PhaseParams& pp,
                                 const FluidProps& fp, double dt) {
        apply_bc(st.u.x, bc_.ux);
        apply_bc(st.u.y, bc_.uy);
        mix_fields(ph, fp);
        pot_ = curvature_potential(ph, pp);
        apply_bc(pot_, BoundaryRule::zero_gradient());
        const double idx2 = 1.0 / (g_.dx * g_.dx), idy2 = 1.0 / (g_.dy * g_.dy);
        for (int j = 0; j < g_.ny; ++j)
            for (int i = 0; i < g_.nx; ++i) {
                const double hc = ph.h(i, j);
                if (hc < set_.h_min) {
                    ustar_.x(i, j) = 0.0;
                    ustar_.y(i, j) = 0.0;
                    cx_(i, j) = 0.0;
                    cy_(i, j) = 0.0;
                    continue;
                }
                const double rc = rho_(i, j), mc = mu_(i, j);
                const double uxc = st.u.x(i, j), uyc = st.u.y(i, j);

                // donor-cell advection of the primitive velocity
                auto dX = [&](const ScalarField& f, double w) {
                    return w > 0.0 ? (f(i, j) - f(i - 1, j)) / g_.dx
                                   : (f(i + 1, j) - f(i, j)) / g_.dx;
                };
                auto dY = [&](const ScalarField& f, double w) {
                    return w > 0.0 ? (f(i, j) - f(i, j - 1)) / g_.dy
                                   : (f(i, j + 1) - f(i, j)) / g_.dy;
                };
                const double advx = uxc * dX(st.u.x, uxc) + uyc * dY(st.u.x, uyc);
                const double advy = uxc * dX(st.u.y, uxc) + uyc * dY(st.u.y, uyc);

                // viscous fluxes with harmonic h mu faces; mirrored ghosts
                // make this the wall shear on closed boundaries
                const double hmc = hc * mc;
                auto harm = [](double l, double r) {
                    const double s = l + r;
                    return s > 0.0 ? 2.0 * l * r / s : 0.0;
                };
                const double gE = harm(hmc, ph.h(i + 1, j) * mu_(i + 1, j));
                const double gW = harm(hmc, ph.h(i - 1, j) * mu_(i - 1, j));
                const double gN = harm(hmc, ph.h(i, j + 1) * mu_(i, j + 1));
                const double gS = harm(hmc, ph.h(i, j - 1) * mu_(i, j - 1));
                const double viscx =
                    (gE * (st.u.x(i + 1, j) - uxc) + gW * (st.u.x(i - 1, j) - uxc)) * idx2 +
                    (gN * (st.u.x(i, j + 1) - uxc) + gS * (st.u.x(i, j - 1) - uxc)) * idy2;
                const double viscy =
                    (gE * (st.u.y(i + 1, j) - uyc) + gW * (st.u.y(i - 1, j) - uyc)) * idx2 +
                    (gN * (st.u.y(i, j + 1) - uyc) + gS * (st.u.y(i, j - 1) - uyc)) * idy2;

                // diffuse no-slip drag u div(mu grad h), applied as a
                // multiplicative factor clamped to the damping side
                const double divmugh =
                    (0.5 * (mc + mu_(i + 1, j)) * (ph.h(i + 1, j) - hc) +
                     0.5 * (mc + mu_(i - 1, j)) * (ph.h(i - 1, j) - hc)) * idx2 +
                    (0.5 * (mc + mu_(i, j + 1)) * (ph.h(i, j + 1) - hc) +
                     0.5 * (mc + mu_(i, j - 1)) * (ph.h(i, j - 1) - hc)) * idy2;
                const double drag = std::clamp(dt * divmugh / (rc * hc), -0.9, 0.0);

                // cell body acceleration, kept for the projection's exact
                // swap to the face-bracket form
                cx_(i, j) = -st_phi(ph, i, j) * (pot_(i + 1, j) - pot_(i - 1, j)) /
                                (2.0 * g_.dx * rc) +
                            fp.grav_x();
                cy_(i, j) = -st_phi(ph, i, j) * (pot_(i, j + 1) - pot_(i, j - 1)) /
                                (2.0 * g_.dy * rc) +
                            fp.grav_y();

                ustar_.x(i, j) = uxc + dt * (-advx + viscx / (hc * rc) + cx_(i, j)) +
                                 uxc * drag;
                ustar_.y(i, j) = uyc + dt * (-advy + viscy / (hc * rc) + cy_(i, j)) +
                                 uyc * drag;
            }
        for (int j = 0; j < g_.ny; ++j)
            for (int i = 0; i < g_.nx; ++i)
                if (!std::isfinite(ustar_.x(i, j)) || !std::isfinite(ustar_.y(i, j)))
                    throw std::runtime_error("predictor: non-finite velocity at cell (" +
                                             std::to_string(i) + "," + std::to_string(j) + ")");
        return ustar_;
    }

    /// Projection right-hand side and solve; st.p is warm-started and comes
    /// back zero-mean per connected fluid component.
    PoissonStats pressure_solve(FlowState& st, const VectorField& us, const PhaseState& ph,
                                const FluidProps& fp, double dt) {
        mix_fields(ph, fp);
        build_coefficient(ph);
        const bool rebuild = !built_ || steps_since_rebuild_ >= set_.rebuild_every;
        psolver_.set_coefficient(acut_, rebuild);
        if (rebuild) {
            built_ = true;
            steps_since_rebuild_ = 0;
        }
        for (int j = 0; j < g_.ny; ++j)
            for (int i = 0; i < g_.nx; ++i) {
                const double fe = i + 1 < g_.nx ? fstar_x(us, ph, fp, dt, i, j) : 0.0;
                const double fw = i > 0 ? fstar_x(us, ph, fp, dt, i - 1, j) : 0.0;
                const double fn = j + 1 < g_.ny ? fstar_y(us, ph, fp, dt, i, j) : 0.0;
                const double fs = j > 0 ? fstar_y(us, ph, fp, dt, i, j - 1) : 0.0;
                rhs_(i, j) = ((fe - fw) / g_.dx + (fn - fs) / g_.dy) / dt;
            }
        PoissonStats stats =
            psolver_.solve(st.p, rhs_, set_.poisson_tol, set_.poisson_max_iters);
        ++steps_since_rebuild_;
        if (!stats.converged) {
            char buf[128];
            std::string hist;
            const std::size_t n = stats.residual_history.size();
            for (std::size_t k = n > 6 ? n - 6 : 0; k < n; ++k) {
                std::snprintf(buf, sizeof buf, " %.3e", stats.residual_history[k]);
                hist += buf;
            }
            std::snprintf(buf, sizeof buf, "pressure projection stalled at %.3e (tol %.0e) after %d iterations;",
                          stats.rel_residual, set_.poisson_tol, stats.iters);
            throw std::runtime_error(std::string(buf) + " trailing residuals:" + hist);
        }
        return stats;
    }

    /// Velocity and face-flux correction.  Requires the pressure from
    /// pressure_solve on the same u*.
    void correct(FlowState& st, const VectorField& us, const PhaseState& ph,
                 const FluidProps& fp, double dt) {
        mix_fields(ph, fp);
        build_coefficient(ph);
        // Cells take the mean of their face brackets; wall and solid faces
        // contribute nothing (the wall bears the force), and interior
        // brackets vanish identically in balanced states, so layered
        // equilibria stay at rest to the precision of the pressure solve.
        for (int j = 0; j < g_.ny; ++j)
            for (int i = 0; i < g_.nx; ++i) {
                if (ph.h(i, j) < set_.h_min) {
                    st.u.x(i, j) = 0.0;
                    st.u.y(i, j) = 0.0;
                    continue;
                }
                const double ax = face_accel_x(st, ph, fp, i - 1, j) +
                                  face_accel_x(st, ph, fp, i, j);
                const double ay = face_accel_y(st, ph, fp, i, j - 1) +
                                  face_accel_y(st, ph, fp, i, j);
                st.u.x(i, j) = us.x(i, j) + dt * (0.5 * ax - cx_(i, j));
                st.u.y(i, j) = us.y(i, j) + dt * (0.5 * ay - cy_(i, j));
            }
        for (int j = 0; j < g_.ny; ++j)
            for (int i = 0; i <= g_.nx; ++i) {
                double f = 0.0;
                if (i > 0 && i < g_.nx) {
                    const double af = harm2(acut_(i - 1, j), acut_(i, j));
                    f = fstar_x(us, ph, fp, dt, i - 1, j) -
                        dt * af * (st.p(i, j) - st.p(i - 1, j)) / g_.dx;
                }
                st.fx[st.fxi(i, j)] = f;
            }
        for (int j = 0; j <= g_.ny; ++j)
            for (int i = 0; i < g_.nx; ++i) {
                double f = 0.0;
                if (j > 0 && j < g_.ny) {
                    const double af = harm2(acut_(i, j - 1), acut_(i, j));
                    f = fstar_y(us, ph, fp, dt, i, j - 1) -
                        dt * af * (st.p(i, j) - st.p(i, j - 1)) / g_.dy;
                }
                st.fy[st.fyi(i, j)] = f;
            }
    }

    /// One full flow step: predictor, projection, correction.
    PoissonStats step(FlowState& st, const PhaseState& ph, const PhaseParams& pp,
                      const FluidProps& fp, double dt) {
        const VectorField& us = predictor(st, ph, pp, fp, dt);
        PoissonStats stats = pressure_solve(st, us, ph, fp, dt);
        correct(st, us, ph, fp, dt);
        return stats;
    }

    /// Largest cell imbalance of the corrected face fluxes, per unit volume.
    double max_weighted_divergence(const FlowState& st) const {
        double worst = 0.0;
        for (int j = 0; j < g_.ny; ++j)
            for (int i = 0; i < g_.nx; ++i) {
                const double d =
                    (st.fx[st.fxi(i + 1, j)] - st.fx[st.fxi(i, j)]) / g_.dx +
                    (st.fy[st.fyi(i, j + 1)] - st.fy[st.fyi(i, j)]) / g_.dy;
                worst = std::max(worst, std::abs(d));
            }
        return worst;
    }

  private:
    static double st_phi(const PhaseState& ph, int i, int j) {
        return std::clamp(ph.phi(i, j), 0.0, 1.0);
    }
    static double harm2(double l, double r) {
        const double s = l + r;
        return s > 0.0 ? 2.0 * l * r / s : 0.0;
    }
    /// Face capillary force density Phi_bar * dphi/dn: in one dimension any
    /// such product is a discrete gradient, so the face pressure difference
    /// cancels it exactly and balanced interfaces produce no flow.  Face
    /// values use fourth-order interpolation where the stencil fits; with
    /// the band profiles changing by O(1) per cell, the quadrature order
    /// directly sets the level of parasitic currents.
    double khat_x(const PhaseState& ph, int i, int j) const {
        return 0.5 * (pot_(i, j) + pot_(i + 1, j)) *
               (ph.phi(i + 1, j) - ph.phi(i, j)) / g_.dx;
    }
    double khat_y(const PhaseState& ph, int i, int j) const {
        return 0.5 * (pot_(i, j) + pot_(i, j + 1)) *
               (ph.phi(i, j + 1) - ph.phi(i, j)) / g_.dy;
    }
    /// Tentative flux of h u through the face between (i,j) and (i+1,j):
    /// the predictor's cell body kick is swapped for the face form.
    double fstar_x(const VectorField& us, const PhaseState& ph, const FluidProps& fp,
                   double dt, int i, int j) const {
        const double hf = hface(ph, i, j, i + 1, j);
        if (hf <= 0.0) return 0.0;
        const double af = harm2(acut_(i, j), acut_(i + 1, j));
        const double mean_us = 0.5 * (us.x(i, j) + us.x(i + 1, j));
        const double mean_c = 0.5 * (cx_(i, j) + cx_(i + 1, j));
        return hf * (mean_us - dt * mean_c) +
               dt * (hf * fp.grav_x() + af * khat_x(ph, i, j));
    }
    double fstar_y(const VectorField& us, const PhaseState& ph, const FluidProps& fp,
                   double dt, int i, int j) const {
        const double hf = hface(ph, i, j, i, j + 1);
        if (hf <= 0.0) return 0.0;
        const double af = harm2(acut_(i, j), acut_(i, j + 1));
        const double mean_us = 0.5 * (us.y(i, j) + us.y(i, j + 1));
        const double mean_c = 0.5 * (cy_(i, j) + cy_(i, j + 1));
        return hf * (mean_us - dt * mean_c) +
               dt * (hf * fp.grav_y() + af * khat_y(ph, i, j));
    }
    /// Acceleration bracket on the face between (i,j) and (i+1,j); zero on
    /// domain walls and solid faces.
    double face_accel_x(const FlowState& st, const PhaseState& ph, const FluidProps& fp,
                        int i, int j) const {
        if (i < 0 || i + 1 >= g_.nx) return 0.0;
        const double af = harm2(acut_(i, j), acut_(i + 1, j));
        if (af <= 0.0) return 0.0;
        const double hf = hface(ph, i, j, i + 1, j);
        return fp.grav_x() + (af / hf) * (khat_x(ph, i, j) -
                                          (st.p(i + 1, j) - st.p(i, j)) / g_.dx);
    }
    double face_accel_y(const FlowState& st, const PhaseState& ph, const FluidProps& fp,
                        int i, int j) const {
        if (j < 0 || j + 1 >= g_.ny) return 0.0;
        const double af = harm2(acut_(i, j), acut_(i, j + 1));
        if (af <= 0.0) return 0.0;
        const double hf = hface(ph, i, j, i, j + 1);
        return fp.grav_y() + (af / hf) * (khat_y(ph, i, j) -
                                          (st.p(i, j + 1) - st.p(i, j)) / g_.dy);
    }
    void mix_fields(const PhaseState& ph, const FluidProps& fp) {
        const double r1 = fp.rho1_eff();
        for (int j = 0; j < g_.ny; ++j)
            for (int i = 0; i < g_.nx; ++i) {
                const double c = st_phi(ph, i, j);
                rho_(i, j) = c * r1 + (1.0 - c) * fp.rho2;
                mu_(i, j) = c * fp.mu1 + (1.0 - c) * fp.mu2;
            }
        apply_bc(rho_, BoundaryRule::zero_gradient());
        apply_bc(mu_, BoundaryRule::zero_gradient());
    }
    void build_coefficient(const PhaseState& ph) {
        for (int j = 0; j < g_.ny; ++j)
            for (int i = 0; i < g_.nx; ++i) {
                const double h = ph.h(i, j);
                acut_(i, j) = h >= set_.h_min ? h / rho_(i, j) : 0.0;
            }
    }
    double hface(const PhaseState& ph, int ia, int ja, int ib, int jb) const {
        const double ha = ph.h(ia, ja), hb = ph.h(ib, jb);
        const double ca = ha >= set_.h_min ? ha : 0.0;
        const double cb = hb >= set_.h_min ? hb : 0.0;
        const double s = ca + cb;
        return s > 0.0 ? 2.0 * ca * cb / s : 0.0;
    }

    Grid2D g_;
    SolverSettings set_;
    FlowBc bc_;
    PoissonSolver psolver_;
    VectorField ustar_;
    ScalarField rho_, mu_, acut_, rhs_, pot_, cx_, cy_;
    bool built_ = false;
    int steps_since_rebuild_ = 0;
};

}  // namespace poredry
