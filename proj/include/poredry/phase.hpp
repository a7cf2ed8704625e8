#pragma once
// Two-fluid phase field with a static diffuse solid mask.
//
// phi is the gas fraction (1 = air, 0 = solvent); phif is the fluid fraction
// of the solid mask (1 = open pore space, 0 = electrode particle), fixed for
// the whole run.  The interface carries
//
//     psi(phi)  = phi^2 (1-phi)^2           double well
//     alpha     = sigma * eps               gradient energy coefficient
//     beta      = 18 sigma / eps            well height
//
// so the flat equilibrium profile is phi(x) = 1/(1 + exp(-6 x / eps)), its
// 10-90 thickness is 0.7324 eps, and integrating alpha |phi'|^2 across it
// recovers sigma exactly.
//
// The profile is maintained by pseudo-time relaxation of
//
//   h dphi/dtau = M [ alpha (div(h grad phi) - h |grad phi| div n)
//                     - h beta psi'(phi) + W dh(phi) ],
//
// which relaxes the profile along interface normals without moving the
// interface by curvature (a circle holds its area; plain Allen-Cahn shrinks
// it).  The two curvature terms are combined analytically into
// grad(h).grad(phi) + h phi_nn, with phi_nn the second derivative along the
// interface normal from the local Hessian: measured against the face-normal
// divergence form, it drifts a resolved circle's area slightly less and
// needs no wide stencils.
//
// The well derivative is evaluated through the equilibrium profile: for the
// logistic profile, phi one cell along the normal is a closed-form function
// of phi here, so the exact discrete second difference of the profile is a
// local function of phi (d2eq below).  Relaxing against alpha*d2eq instead
// of beta*psi' makes the sampled profile an exact discrete fixed point at
// any offset in 1D; the two agree as dx/eps -> 0.  With the raw psi' the
// interface at eps = 5 dx has no discrete rest state: pointwise residuals
// reach 16% of the well term, and their grid-angle modulation drives a
// perpetual anisotropic drift of curved interfaces (about +7e-6 relative
// area and +2e-6 radius spread per sweep for a 24-cell circle) whose
// capillary imbalance the flow solver then chases with permanent vortices.
//
// W is the wall wetting weight; it is peaked on the solid band and pulls
// phi toward the value matching the prescribed contact angle.  Cells with
// h below h_min are frozen so solid interiors stay inert.
//
// Evaporation enters separately as phi += dt * ve * |grad phi|, a uniform
// normal motion of the interface, clamped to [0,1].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "poredry/grid.hpp"
#include "poredry/stencil.hpp"

namespace poredry {

inline double well(double p) {
    const double q = 1.0 - p;
    return p * p * q * q;
}
inline double dwell(double p) { return 2.0 * p * (1.0 - p) * (1.0 - 2.0 * p); }

/// Exact discrete second difference of the equilibrium profile, as a local
/// function of phi: with q = exp(-6 h / eps), the logistic profile one step
/// h along its normal is phi/(phi + (1-phi) q).  Tends to the continuum
/// value 36 phi (1-phi)(1-2 phi) / eps^2 = (beta/alpha) psi'(phi) as
/// h/eps -> 0.
inline double profile_second_difference(double p, double h, double eps) {
    const double q = std::exp(-6.0 * h / eps);
    const double fw = p / (p + (1.0 - p) * q);
    const double bw = p / (p + (1.0 - p) / q);
    return (fw + bw - 2.0 * p) / (h * h);
}

/// Cubic interpolant: 0 -> 0, 1 -> 1 with flat ends.  Used both for the
/// fluid-fluid weight on phi and the fluid-solid weight on phif.
inline double interp_cubic(double x) { return x * x * (3.0 - 2.0 * x); }
inline double dinterp_cubic(double x) { return 6.0 * x * (1.0 - x); }

/// Flat-interface equilibrium profile centered at 0, gas side at x > 0.
inline double equilibrium_profile(double x, double eps) {
    return 1.0 / (1.0 + std::exp(-6.0 * x / eps));
}

/// Fluid fraction across the solid band; eta is the signed distance from the
/// nominal wall, positive into the solid, and the profile spans |eta| <
/// delta/2 (exactly 1 in the pore, exactly 0 inside the particle beyond it).
inline double solid_profile(double eta, double delta) {
    const double s = std::clamp(3.14159265358979323846 * eta / delta,
                                -1.5707963267948966, 1.5707963267948966);
    return 0.5 * (1.0 - std::sin(s));
}

struct PhaseParams {
    double sigma = 1.0;        // fluid-fluid surface tension
    double eps = 0.0;          // interface width scale; set to ~5 dx at setup
    double mobility = 1.81;    // relaxation mobility M
    double theta_deg = 90.0;   // wall contact angle, measured in the gas
    double h_min = 1e-6;       // below this fluid fraction cells are frozen

    // pseudo-time relaxation controls
    double pseudo_cfl = 0.1;        // fraction of the explicit stability step
    double pseudo_tol = 1e-6;       // stop when max |dphi| per sweep falls below
    int pseudo_max_iters = 200;
    // Re-profiling must not create or destroy fluid (only evaporation may);
    // each sweep's net phi production is subtracted back as a uniform normal
    // displacement, weighted by |grad phi| (a discrete Lagrange multiplier).
    // Without it the truncation drift slowly inflates curved interfaces.
    bool conserve_volume = true;

    BoundaryRule bc;  // phi ghost rule, zero-gradient by default

    double alpha() const { return sigma * eps; }
    double beta() const { return 18.0 * sigma / eps; }
    /// Wall energy difference sigma_gs - sigma_ls = sigma cos(theta); its
    /// sign decides which fluid the wall prefers.
    double wetting_coeff() const {
        return sigma * std::cos(theta_deg * 3.14159265358979323846 / 180.0);
    }
};

struct RelaxStats {
    int iters = 0;
    double last_delta = 0.0;  // max |dphi| of the final sweep
    bool converged = false;
};

/// Phase state plus everything derived from the static solid mask.  Call
/// refresh_solid_cache() once after filling phif (and after any change to
/// sigma, eps, or theta); the relaxation reads only the cached fields.
struct PhaseState {
    ScalarField phi;   // gas fraction
    ScalarField phif;  // fluid fraction of the solid mask (static)
    ScalarField h;     // interp_cubic(phif)
    ScalarField hx, hy;  // grad h, central
    ScalarField wetw;    // wetting weight: coeff * dh(phif) * |grad phif|

    explicit PhaseState(const Grid2D& g)
        : phi(g), phif(g, 1.0), h(g, 1.0), hx(g), hy(g), wetw(g) {}

    const Grid2D& grid() const { return phi.grid; }

    void refresh_solid_cache(const PhaseParams& p) {
        const Grid2D& g = phi.grid;
        const BoundaryRule zg = BoundaryRule::zero_gradient();
        apply_bc(phif, zg);
        const double cw = p.wetting_coeff();
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                h(i, j) = interp_cubic(std::clamp(phif(i, j), 0.0, 1.0));
        apply_bc(h, zg);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                hx(i, j) = (h(i + 1, j) - h(i - 1, j)) / (2.0 * g.dx);
                hy(i, j) = (h(i, j + 1) - h(i, j - 1)) / (2.0 * g.dy);
                const double gx = (phif(i + 1, j) - phif(i - 1, j)) / (2.0 * g.dx);
                const double gy = (phif(i, j + 1) - phif(i, j - 1)) / (2.0 * g.dy);
                // Wall-surface weight.  The raw |grad interp(phif)| measure
                // puts weight deep in the band where h ~ phif^2 is too small
                // to restore the wells: W outgrows h beta / 3 there and a
                // film of the preferred phase creeps along the wall forever.
                // Confining the weight to phif in [s0, 1] with a rescaled
                // cubic keeps its wall-normal integral exactly cw (Young's
                // angle is set by that integral, not the weight's shape)
                // while every loaded cell stays under the stability bound.
                const double s0 = 0.2;
                const double s = std::clamp((phif(i, j) - s0) / (1.0 - s0), 0.0, 1.0);
                wetw(i, j) = cw * dinterp_cubic(s) / (1.0 - s0) *
                             std::sqrt(gx * gx + gy * gy);
            }
    }

  private:
    // operator workspaces, kept to avoid per-call allocation
    std::vector<double> nxt_;
    std::vector<char> mask_, mask2_;
    std::vector<std::size_t> band_;
    friend RelaxStats relax_phase(PhaseState&, const PhaseParams&);
    friend void advect_phase(PhaseState&, const VectorField&, double);
    friend void evaporate_phase(PhaseState&, double, double, double);
};

/// Pseudo-time relaxation toward the equilibrium normal profile.  Jacobi
/// sweeps over a band around the interface (where phi(1-phi) is above
/// rounding); everything else has zero right-hand side and is skipped.
/// Deterministic: the band is built and swept in row order.
inline RelaxStats relax_phase(PhaseState& s, const PhaseParams& p) {
    const Grid2D& g = s.phi.grid;
    const int nx = g.nx, ny = g.ny;
    const double alpha = p.alpha(), beta = p.beta(), M = p.mobility;
    const double dmin = std::min(g.dx, g.dy);
    const double pdt =
        p.pseudo_cfl * std::min(dmin * dmin / (M * alpha), 1.0 / (M * beta));
    const double idx2 = 1.0 / (g.dx * g.dx), idy2 = 1.0 / (g.dy * g.dy);
    const double idx = 0.5 / g.dx, idy = 0.5 / g.dy, ixy = 0.25 / (g.dx * g.dy);
    // profile-compatible well derivative (see header comment)
    const double heq = std::sqrt(g.dx * g.dy), ih2 = 1.0 / (g.dx * g.dy);
    const double qeq = std::exp(-6.0 * heq / p.eps);
    auto d2eq = [qeq, ih2](double pc) {
        const double fw = pc / (pc + (1.0 - pc) * qeq);
        const double bw = pc / (pc + (1.0 - pc) / qeq);
        return (fw + bw - 2.0 * pc) * ih2;
    };

    // interface band: phi meaningfully between the wells or jumping to a
    // neighbor (a perfectly sharp 0/1 front sits exactly on the wells),
    // dilated twice so the profile can widen into its neighbors
    const std::size_t stride = std::size_t(nx + 2);
    apply_bc(s.phi, p.bc);
    s.mask_.assign(std::size_t(nx + 2) * (ny + 2), 0);
    s.mask2_.assign(s.mask_.size(), 0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const std::size_t c = s.phi.idx(i, j);
            const double pc = s.phi.v[c];
            const double jump =
                std::max(std::max(std::abs(s.phi.v[c + 1] - pc),
                                  std::abs(s.phi.v[c - 1] - pc)),
                         std::max(std::abs(s.phi.v[c + stride] - pc),
                                  std::abs(s.phi.v[c - stride] - pc)));
            s.mask_[c] = (pc * (1.0 - pc) > 1e-10) || jump > 0.3;
        }
    for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const std::size_t c = s.phi.idx(i, j);
                s.mask2_[c] = s.mask_[c] | s.mask_[c - 1] | s.mask_[c + 1] |
                              s.mask_[c - stride] | s.mask_[c + stride] |
                              s.mask_[c - stride - 1] | s.mask_[c - stride + 1] |
                              s.mask_[c + stride - 1] | s.mask_[c + stride + 1];
            }
        std::swap(s.mask_, s.mask2_);
    }
    s.band_.clear();
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const std::size_t c = s.phi.idx(i, j);
            if (s.mask_[c] && s.h.v[c] >= p.h_min) s.band_.push_back(c);
        }

    RelaxStats st;
    if (s.band_.empty()) {
        st.converged = true;
        return st;
    }

    s.nxt_ = s.phi.v;
    std::vector<double>& cur = s.phi.v;
    std::vector<double>& nxt = s.nxt_;
    std::vector<double> gmag(p.conserve_volume ? s.band_.size() : 0);
    for (int it = 0; it < p.pseudo_max_iters; ++it) {
        apply_bc(s.phi, p.bc);
        double delta = 0.0, produced = 0.0, gsum = 0.0;
        std::size_t k = 0;
        for (std::size_t c : s.band_) {
            const double pc = cur[c];
            const double pe = cur[c + 1], pw = cur[c - 1];
            const double pn = cur[c + stride], ps = cur[c - stride];
            const double gx = (pe - pw) * idx, gy = (pn - ps) * idy;
            const double g2 = gx * gx + gy * gy;
            double phi_nn = 0.0;
            if (g2 > 1e-24) {
                const double pxx = (pe - 2.0 * pc + pw) * idx2;
                const double pyy = (pn - 2.0 * pc + ps) * idy2;
                const double pxy = (cur[c + stride + 1] + cur[c - stride - 1] -
                                    cur[c + stride - 1] - cur[c - stride + 1]) * ixy;
                phi_nn = (gx * gx * pxx + 2.0 * gx * gy * pxy + gy * gy * pyy) / g2;
            }
            const double hc = s.h.v[c];
            const double rhs = M * (alpha * (s.hx.v[c] * gx + s.hy.v[c] * gy +
                                             hc * (phi_nn - d2eq(pc))) +
                                    s.wetw.v[c] * dinterp_cubic(pc));
            // The 1/h pseudo-time scaling is floored: it leaves the fixed
            // point (rhs = 0) alone but stops cells deep in the wall band,
            // where h is tiny, from taking arbitrarily amplified steps.
            const double cand =
                std::clamp(pc + pdt * rhs / std::max(hc, 0.1), 0.0, 1.0);
            nxt[c] = cand;
            delta = std::max(delta, std::abs(cand - pc));
            if (p.conserve_volume) {
                const double gm = std::sqrt(g2);
                gmag[k++] = gm;
                produced += cand - pc;
                gsum += gm;
            }
        }
        if (p.conserve_volume && gsum > 1e-12) {
            const double lambda = produced / gsum;
            k = 0;
            for (std::size_t c : s.band_) {
                const double fixed =
                    std::clamp(nxt[c] - lambda * gmag[k++], 0.0, 1.0);
                nxt[c] = fixed;
                delta = std::max(delta, std::abs(fixed - cur[c]));
            }
        }
        for (std::size_t c : s.band_) cur[c] = nxt[c];
        ++st.iters;
        st.last_delta = delta;
        if (delta < p.pseudo_tol) {
            st.converged = true;
            break;
        }
    }
    return st;
}

/// First-order upwind transport of phi by the cell-centered velocity.  The
/// caller is responsible for dt satisfying the CFL bound (stable_dt does);
/// a violated bound throws rather than silently wrecking the field.
inline void advect_phase(PhaseState& s, const VectorField& u, double dt) {
    const Grid2D& g = s.phi.grid;
    apply_bc(s.phi, BoundaryRule::zero_gradient());
    ScalarField& phi = s.phi;
    if (s.nxt_.size() != phi.v.size()) s.nxt_ = phi.v;
    std::vector<double>& nxt = s.nxt_;
    const std::size_t stride = std::size_t(g.nx + 2);
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t c = phi.idx(i, j);
            const double ux = u.x(i, j), uy = u.y(i, j);
            worst = std::max(worst, std::abs(ux) * dt / g.dx + std::abs(uy) * dt / g.dy);
            const double dpx = ux > 0.0 ? phi.v[c] - phi.v[c - 1] : phi.v[c + 1] - phi.v[c];
            const double dpy = uy > 0.0 ? phi.v[c] - phi.v[c - stride]
                                        : phi.v[c + stride] - phi.v[c];
            nxt[c] = phi.v[c] - dt * (ux * dpx / g.dx + uy * dpy / g.dy);
        }
    if (worst > 1.0)
        throw std::runtime_error("advect_phase: CFL " + std::to_string(worst) + " > 1");
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t c = phi.idx(i, j);
            phi.v[c] = nxt[c];
        }
}

/// Uniform normal interface motion from evaporation: phi += dt ve |grad phi|,
/// clamped to [0,1].  ve > 0 grows the gas phase.  Frozen below h_min.
inline void evaporate_phase(PhaseState& s, double ve, double dt, double h_min = 1e-6) {
    if (ve == 0.0 || dt == 0.0) return;
    const Grid2D& g = s.phi.grid;
    apply_bc(s.phi, BoundaryRule::zero_gradient());
    ScalarField& phi = s.phi;
    if (s.nxt_.size() != phi.v.size()) s.nxt_ = phi.v;
    std::vector<double>& nxt = s.nxt_;
    const std::size_t stride = std::size_t(g.nx + 2);
    const double idx = 0.5 / g.dx, idy = 0.5 / g.dy;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t c = phi.idx(i, j);
            if (s.h.v[c] < h_min) {
                nxt[c] = phi.v[c];
                continue;
            }
            const double gx = (phi.v[c + 1] - phi.v[c - 1]) * idx;
            const double gy = (phi.v[c + stride] - phi.v[c - stride]) * idy;
            nxt[c] = std::clamp(phi.v[c] + dt * ve * std::sqrt(gx * gx + gy * gy), 0.0, 1.0);
        }
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t c = phi.idx(i, j);
            phi.v[c] = nxt[c];
        }
}

/// Chemical potential of the fluid pair: beta psi'(phi) - alpha lap(phi).
/// The capillary body force in the momentum equation is -phi grad(Phi).
inline ScalarField chem_potential(const PhaseState& s, const PhaseParams& p) {
    ScalarField lap = laplace(s.phi, p.bc);
    ScalarField out(s.phi.grid);
    const double alpha = p.alpha(), beta = p.beta();
    for (int j = 0; j < s.phi.grid.ny; ++j)
        for (int i = 0; i < s.phi.grid.nx; ++i)
            out(i, j) = beta * dwell(s.phi(i, j)) - alpha * lap(i, j);
    return out;
}

}  // namespace poredry
