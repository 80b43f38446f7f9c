#ifndef HMAE_P1GRID_HPP
#define HMAE_P1GRID_HPP

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

// Two-chart discrete model of the Riemann sphere.  Chart Z carries the
// coordinate z, chart W carries w = 1/z.  Both grids cover the square
// [-R,R]^2 with an odd number of nodes per axis, so the origin is a node.
// The Fubini-Study form is normalised to total mass 1, which fixes the
// convention ddc = (1/4pi) * Laplacian as measures.

namespace hmae {

using cplx = std::complex<double>;

enum class Chart : std::uint8_t { Z = 0, W = 1 };

inline Chart other(Chart c) { return c == Chart::Z ? Chart::W : Chart::Z; }

struct ChartPoint {
    Chart chart;
    cplx coord;
};

// w = 1/z.  Throws std::domain_error when coord == 0 (the point is the
// other chart's infinity).
ChartPoint transition(const ChartPoint& p);

// Lebesgue density of omega_FS in the chart of p: (1/pi)(1+|c|^2)^-2.
double fs_density(const ChartPoint& p);

struct ChartGrid {
    Chart chart = Chart::Z;
    double half_width = 4.0;
    int n = 0;
    std::vector<double> values;       // row-major, index = j*n + i
    std::vector<std::uint8_t> mask;   // 1 = singular / undefined node

    ChartGrid() = default;
    ChartGrid(Chart c, double R, int nodes);

    double spacing() const { return 2.0 * half_width / (n - 1); }
    int idx(int i, int j) const { return j * n + i; }
    cplx node(int i, int j) const {
        const double h = spacing();
        return {-half_width + i * h, -half_width + j * h};
    }
    double& at(int i, int j) { return values[idx(i, j)]; }
    double at(int i, int j) const { return values[idx(i, j)]; }
    bool masked(int i, int j) const { return mask[idx(i, j)] != 0; }
    bool in_bounds(const cplx& c) const {
        return std::abs(c.real()) <= half_width && std::abs(c.imag()) <= half_width;
    }

    // Bilinear interpolation.  Returns false (and leaves out untouched)
    // if c is outside the grid or the stencil touches a masked node.
    bool interp(const cplx& c, double& out) const;

    std::size_t size() const { return values.size(); }
};

// A real-valued function on P^1 held on both chart grids.  Values at a
// point and its transition image must agree within consistency_tol on
// the overlap annulus.  atom_at_origin is declared bookkeeping for a
// logarithmic singularity at z = 0 (Lelong coefficient; the z-origin
// node is then masked).
struct GlobalFunction {
    ChartGrid z;
    ChartGrid w;
    double consistency_tol = 0.0;
    double atom_at_origin = 0.0;

    GlobalFunction() = default;
    GlobalFunction(int n, double R);

    const ChartGrid& grid(Chart c) const { return c == Chart::Z ? z : w; }
    ChartGrid& grid(Chart c) { return c == Chart::Z ? z : w; }

    // Largest |u(p) - u(1/p)| over overlap nodes (interpolating on the
    // image chart).  Masked nodes are skipped.
    double max_consistency_gap() const;

    // Evaluate at an arbitrary point of P^1 given in chart `c`; picks the
    // better chart for interpolation (|coord| <= 1 rule).
    bool value_at(const ChartPoint& p, double& out) const;
};

struct GlobalMask {
    int n = 0;
    std::vector<std::uint8_t> z;
    std::vector<std::uint8_t> w;

    GlobalMask() = default;
    explicit GlobalMask(int nodes, bool fill = false)
        : n(nodes),
          z(std::size_t(nodes) * nodes, fill ? 1 : 0),
          w(std::size_t(nodes) * nodes, fill ? 1 : 0) {}

    std::vector<std::uint8_t>& chart(Chart c) { return c == Chart::Z ? z : w; }
    const std::vector<std::uint8_t>& chart(Chart c) const { return c == Chart::Z ? z : w; }
    std::size_t count() const;
    bool empty_mask() const { return count() == 0; }
};

// Density of omega_FS + ddc u relative to Lebesgue measure per chart.
// Nodes where the 5-point stencil is unavailable (grid edge, masked
// input or masked neighbour) are masked in the output.
struct CurrentDensity {
    ChartGrid z;
    ChartGrid w;
    double atom_mass_at_origin = 0.0;

    const ChartGrid& grid(Chart c) const { return c == Chart::Z ? z : w; }
};

CurrentDensity ddc_density(const GlobalFunction& u);

// Evaluate a density field at an arbitrary point, expressed relative to
// Lebesgue measure of `target` chart coordinates (Jacobian |dz/dw|^2
// factors applied as needed).  Returns false near masked data.
bool density_at(const CurrentDensity& c, const ChartPoint& p, Chart target, double& out);

// Ownership rule for integration: chart Z owns |z| <= 1 (boundary circle
// included), chart W owns |w| < 1.  Every point of P^1 is counted once.
bool owns(Chart c, const cplx& coord);

// Integrates smooth density over the masked region plus declared atoms
// inside it.  Throws std::runtime_error naming the offending node if the
// region mask is not chart-consistent on the overlap.
double integrate(const CurrentDensity& c, const GlobalMask& region);

double integrate_all(const CurrentDensity& c);

// Chart-consistency of a region mask: a node and its transition image
// must agree, modulo a one-cell grace along the mask boundary.
bool mask_consistent(const GlobalMask& m, int n, double R, std::string* err = nullptr);

// Resolves a mask on the overlap by copying the owner chart's verdict
// into the other chart (nearest node).
void resolve_overlap(GlobalMask& m, int n, double R);

// --- grid dump format -----------------------------------------------------
// Self-describing binary: magic "P1GRIDv1", chart byte, R (f64), n (i64),
// mask count (i64), n*n row-major f64 values, then masked linear indices
// (i64).  Round-trips bit-exactly.
void dump_grid(const ChartGrid& g, const std::string& path);
ChartGrid load_grid(const std::string& path);
void export_csv(const ChartGrid& g, const std::string& path);

}  // namespace hmae

#endif
