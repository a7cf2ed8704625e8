#pragma once
// Central-difference stencil operators on collocated fields.  All operators
// are pure: they read interior values only and evaluate ghost values on the
// fly from the boundary rule, so callers never need to sync ghost storage
// before using them.
//
// Note on operator pairing: laplace() is the compact 5-point stencil, while
// div(grad(.)) composes two central first derivatives and lands on the wide
// (2h-spaced) stencil.  The two agree to O(dx^2) but are intentionally
// distinct discrete operators; tests pin this down.

#include <algorithm>
#include <cmath>

#include "poredry/grid.hpp"

namespace poredry {

/// Ghost-aware sampling for i in [-1,nx], j in [-1,ny].  Corner ghosts
/// compose the x-edge rule first, then the y-edge rule.
inline double sample(const ScalarField& f, const BoundaryRule& bc, int i, int j) {
    const int nx = f.grid.nx, ny = f.grid.ny;
    int ci = i, cj = j;
    bool gx_lo = (i < 0), gx_hi = (i >= nx);
    bool gy_lo = (j < 0), gy_hi = (j >= ny);
    if (gx_lo) ci = 0;
    if (gx_hi) ci = nx - 1;
    if (gy_lo) cj = 0;
    if (gy_hi) cj = ny - 1;
    double val = f(ci, cj);
    if (gx_lo) val = ghost_value(bc.left, val);
    if (gx_hi) val = ghost_value(bc.right, val);
    if (gy_lo) val = ghost_value(bc.bottom, val);
    if (gy_hi) val = ghost_value(bc.top, val);
    return val;
}

/// Central-difference gradient.
inline VectorField grad(const ScalarField& f, const BoundaryRule& bc) {
    VectorField g(f.grid);
    const int nx = f.grid.nx, ny = f.grid.ny;
    const double ix = 0.5 / f.grid.dx, iy = 0.5 / f.grid.dy;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            g.x(i, j) = (sample(f, bc, i + 1, j) - sample(f, bc, i - 1, j)) * ix;
            g.y(i, j) = (sample(f, bc, i, j + 1) - sample(f, bc, i, j - 1)) * iy;
        }
    return g;
}

/// Central-difference divergence with per-component boundary rules.
inline ScalarField div(const VectorField& v, const BoundaryRule& bcx, const BoundaryRule& bcy) {
    ScalarField d(v.grid());
    const int nx = v.grid().nx, ny = v.grid().ny;
    const double ix = 0.5 / v.grid().dx, iy = 0.5 / v.grid().dy;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            d(i, j) = (sample(v.x, bcx, i + 1, j) - sample(v.x, bcx, i - 1, j)) * ix +
                      (sample(v.y, bcy, i, j + 1) - sample(v.y, bcy, i, j - 1)) * iy;
    return d;
}

inline ScalarField div(const VectorField& v, const BoundaryRule& bc) { return div(v, bc, bc); }

/// Compact 5-point Laplacian.
inline ScalarField laplace(const ScalarField& f, const BoundaryRule& bc) {
    ScalarField l(f.grid);
    const int nx = f.grid.nx, ny = f.grid.ny;
    const double ixx = 1.0 / (f.grid.dx * f.grid.dx), iyy = 1.0 / (f.grid.dy * f.grid.dy);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double c = f(i, j);
            l(i, j) = (sample(f, bc, i + 1, j) - 2.0 * c + sample(f, bc, i - 1, j)) * ixx +
                      (sample(f, bc, i, j + 1) - 2.0 * c + sample(f, bc, i, j - 1)) * iyy;
        }
    return l;
}

/// Pointwise gradient magnitude.
inline ScalarField grad_norm(const ScalarField& f, const BoundaryRule& bc) {
    ScalarField n(f.grid);
    const int nx = f.grid.nx, ny = f.grid.ny;
    const double ix = 0.5 / f.grid.dx, iy = 0.5 / f.grid.dy;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double gx = (sample(f, bc, i + 1, j) - sample(f, bc, i - 1, j)) * ix;
            const double gy = (sample(f, bc, i, j + 1) - sample(f, bc, i, j - 1)) * iy;
            n(i, j) = std::sqrt(gx * gx + gy * gy);
        }
    return n;
}

/// grad(f)/max(|grad(f)|, eps_reg): direction of steepest ascent of f.
inline VectorField unit_normal(const ScalarField& f, const BoundaryRule& bc,
                               double eps_reg = 1e-9) {
    VectorField n(f.grid);
    const int nx = f.grid.nx, ny = f.grid.ny;
    const double ix = 0.5 / f.grid.dx, iy = 0.5 / f.grid.dy;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double gx = (sample(f, bc, i + 1, j) - sample(f, bc, i - 1, j)) * ix;
            const double gy = (sample(f, bc, i, j + 1) - sample(f, bc, i, j - 1)) * iy;
            const double m = std::max(std::sqrt(gx * gx + gy * gy), eps_reg);
            n.x(i, j) = gx / m;
            n.y(i, j) = gy / m;
        }
    return n;
}

/// 3x3 binomial smoothing passes.  Used to mollify steep diffuse-interface
/// profiles before direction-sensitive operations (see curvature()).
inline ScalarField mollify(const ScalarField& f, const BoundaryRule& bc, int passes = 1) {
    ScalarField src = f;
    ScalarField dst(f.grid);
    for (int p = 0; p < passes; ++p) {
        for (int j = 0; j < f.grid.ny; ++j)
            for (int i = 0; i < f.grid.nx; ++i)
                dst(i, j) = (4.0 * sample(src, bc, i, j) +
                             2.0 * (sample(src, bc, i + 1, j) + sample(src, bc, i - 1, j) +
                                    sample(src, bc, i, j + 1) + sample(src, bc, i, j - 1)) +
                             sample(src, bc, i + 1, j + 1) + sample(src, bc, i + 1, j - 1) +
                             sample(src, bc, i - 1, j + 1) + sample(src, bc, i - 1, j - 1)) /
                            16.0;
        std::swap(src, dst);
    }
    return src;
}

/// Mean curvature of the level sets of f, positive where the f=1 region is
/// convex (a disk of f=1 in f=0 surroundings reports +1/R on its contour).
/// Normals are evaluated on cell faces and their divergence is negated to
/// get that orientation.  By default the normals come from a twice-mollified
/// copy of f: diffuse-interface profiles saturate within a few cells and the
/// raw face normals can mis-orient near grid-tangent contour segments.
inline ScalarField curvature(const ScalarField& f_in, const BoundaryRule& bc,
                             double eps_reg = 1e-9, int mollify_passes = 2) {
    const ScalarField f = mollify_passes > 0 ? mollify(f_in, bc, mollify_passes) : f_in;
    ScalarField k(f.grid);
    const int nx = f.grid.nx, ny = f.grid.ny;
    const double dx = f.grid.dx, dy = f.grid.dy;
    auto s = [&](int i, int j) { return sample(f, bc, i, j); };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            // face-normal x-component on the east/west faces
            auto face_x = [&](int ii) {  // face between (ii-1,j) and (ii,j)
                const double gx = (s(ii, j) - s(ii - 1, j)) / dx;
                const double gy = (s(ii, j + 1) + s(ii - 1, j + 1) - s(ii, j - 1) - s(ii - 1, j - 1)) / (4.0 * dy);
                return gx / std::max(std::sqrt(gx * gx + gy * gy), eps_reg);
            };
            auto face_y = [&](int jj) {  // face between (i,jj-1) and (i,jj)
                const double gy = (s(i, jj) - s(i, jj - 1)) / dy;
                const double gx = (s(i + 1, jj) + s(i + 1, jj - 1) - s(i - 1, jj) - s(i - 1, jj - 1)) / (4.0 * dx);
                return gy / std::max(std::sqrt(gx * gx + gy * gy), eps_reg);
            };
            const double divn = (face_x(i + 1) - face_x(i)) / dx + (face_y(j + 1) - face_y(j)) / dy;
            k(i, j) = -divn;
        }
    return k;
}

/// Cell-volume-weighted sum over the interior.  Row partials are accumulated
/// left to right and combined bottom to top, so the result is deterministic.
inline double integrate(const ScalarField& f) {
    double total = 0.0;
    for (int j = 0; j < f.grid.ny; ++j) {
        double row = 0.0;
        for (int i = 0; i < f.grid.nx; ++i) row += f(i, j);
        total += row;
    }
    return total * f.grid.dx * f.grid.dy;
}

inline double max_abs(const ScalarField& f) {
    double m = 0.0;
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) m = std::max(m, std::abs(f(i, j)));
    return m;
}

inline double min_value(const ScalarField& f) {
    double m = f(0, 0);
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) m = std::min(m, f(i, j));
    return m;
}

inline double max_value(const ScalarField& f) {
    double m = f(0, 0);
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) m = std::max(m, f(i, j));
    return m;
}

}  // namespace poredry
