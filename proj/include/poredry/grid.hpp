#pragma once
// Uniform collocated 2-D grid, scalar/vector fields with a one-cell ghost
// ring, and per-edge boundary rules.  Everything downstream (stencils, the
// flow solver, the phase solver) builds on these types.
//
// Conventions:
//   - cell (i,j) has its center at x = (i+0.5)*dx, y = (j+0.5)*dy
//   - i runs along x (fastest in memory), j along y; j=0 is the bottom row
//   - fields store (nx+2)*(ny+2) values; ghosts live at i,j = -1 and nx,ny
//     and are only meaningful after apply_bc()

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace poredry {

struct Grid2D {
    int nx = 0, ny = 0;      // interior cell counts
    double dx = 0.0, dy = 0.0;
    double lx = 0.0, ly = 0.0;

    Grid2D() = default;
    Grid2D(int nx_, int ny_, double dx_, double dy_, double lx_, double ly_)
        : nx(nx_), ny(ny_), dx(dx_), dy(dy_), lx(lx_), ly(ly_) {
        if (nx < 4 || ny < 4)
            throw std::invalid_argument("Grid2D: need at least 4 cells per direction, got " +
                                        std::to_string(nx) + "x" + std::to_string(ny));
        if (dx <= 0.0 || dy <= 0.0)
            throw std::invalid_argument("Grid2D: cell sizes must be positive");
        if (std::abs(lx - nx * dx) > 1e-12 * std::abs(lx) ||
            std::abs(ly - ny * dy) > 1e-12 * std::abs(ly))
            throw std::invalid_argument("Grid2D: extents inconsistent with nx*dx, ny*dy");
    }

    /// Build a grid over [0,lx] x [0,ly] with nx-by-ny cells.
    static Grid2D from_cells(int nx, int ny, double lx, double ly) {
        if (nx < 4 || ny < 4)
            throw std::invalid_argument("Grid2D: need at least 4 cells per direction");
        if (lx <= 0.0 || ly <= 0.0)
            throw std::invalid_argument("Grid2D: extents must be positive");
        return Grid2D(nx, ny, lx / nx, ly / ny, lx, ly);
    }

    double x(int i) const { return (i + 0.5) * dx; }
    double y(int j) const { return (j + 0.5) * dy; }
    std::size_t cells() const { return std::size_t(nx) * std::size_t(ny); }
    bool same_shape(const Grid2D& o) const {
        return nx == o.nx && ny == o.ny &&
               std::abs(dx - o.dx) <= 1e-14 * dx && std::abs(dy - o.dy) <= 1e-14 * dy;
    }
};

enum class BcKind : unsigned char {
    ZeroGradient,  // ghost = nearest interior value
    FixedValue,    // ghost = 2*value - interior  (boundary face takes `value`)
    Mirror         // ghost = -interior           (odd reflection, face value 0)
};

struct EdgeRule {
    BcKind kind = BcKind::ZeroGradient;
    double value = 0.0;
};

/// One rule per domain edge.  Ghost corners compose the x-edge rule first,
/// then the y-edge rule.
struct BoundaryRule {
    EdgeRule left, right, bottom, top;

    static BoundaryRule zero_gradient() { return {}; }
    static BoundaryRule mirror() {
        EdgeRule m{BcKind::Mirror, 0.0};
        return {m, m, m, m};
    }
    static BoundaryRule fixed_value(double c) {
        EdgeRule f{BcKind::FixedValue, c};
        return {f, f, f, f};
    }
};

inline double ghost_value(const EdgeRule& r, double interior) {
    switch (r.kind) {
        case BcKind::ZeroGradient: return interior;
        case BcKind::FixedValue:   return 2.0 * r.value - interior;
        case BcKind::Mirror:       return -interior;
    }
    return interior;
}

struct ScalarField {
    Grid2D grid;
    std::vector<double> v;  // (nx+2)*(ny+2), row-major, x fastest, ghost ring included

    ScalarField() = default;
    explicit ScalarField(const Grid2D& g, double init = 0.0)
        : grid(g), v(std::size_t(g.nx + 2) * std::size_t(g.ny + 2), init) {}

    int stride() const { return grid.nx + 2; }
    std::size_t idx(int i, int j) const {
        return std::size_t(j + 1) * std::size_t(grid.nx + 2) + std::size_t(i + 1);
    }
    /// Valid for i in [-1, nx], j in [-1, ny]; ghosts only after apply_bc().
    double& operator()(int i, int j) { return v[idx(i, j)]; }
    double operator()(int i, int j) const { return v[idx(i, j)]; }

    void fill(double c) {
        for (double& x : v) x = c;
    }
};

struct VectorField {
    ScalarField x, y;

    VectorField() = default;
    explicit VectorField(const Grid2D& g, double ix = 0.0, double iy = 0.0)
        : x(g, ix), y(g, iy) {}
    const Grid2D& grid() const { return x.grid; }
};

/// Fill the ghost ring of f from the boundary rule.  Edges first, then the
/// top/bottom pass also covers the four corners using the already-filled
/// side ghosts.
inline void apply_bc(ScalarField& f, const BoundaryRule& bc) {
    const int nx = f.grid.nx, ny = f.grid.ny;
    for (int j = 0; j < ny; ++j) {
        f(-1, j) = ghost_value(bc.left, f(0, j));
        f(nx, j) = ghost_value(bc.right, f(nx - 1, j));
    }
    for (int i = -1; i <= nx; ++i) {
        f(i, -1) = ghost_value(bc.bottom, f(i, 0));
        f(i, ny) = ghost_value(bc.top, f(i, ny - 1));
    }
}

inline void apply_bc(VectorField& u, const BoundaryRule& bx, const BoundaryRule& by) {
    apply_bc(u.x, bx);
    apply_bc(u.y, by);
}

}  // namespace poredry
