#ifndef HMAE_PERRON_HPP
#define HMAE_PERRON_HPP

#include <vector>

#include "hmae/envelope.hpp"
#include "hmae/geodesic.hpp"
#include "hmae/p1grid.hpp"

// Independent oracle for the geodesic potential: the Perron envelope of
// omega-subharmonic functions u(zeta, tau) on P^1 x closed disc with
// u <= phi on |tau| = 1 and a logarithmic pole of coefficient 1 at the
// single point (zeta, tau) = (0, 0).  By S^1-invariance in tau the
// unknown lives on (zeta, rho = |tau|).  The pole is carried by the
// explicit global subsolution
//     G(zeta, rho) = ln((|zeta|^2 + rho^2) / (1 + |zeta|^2)),
// which vanishes on the boundary rho = 1; only the bounded remainder
// V = u - G is stored and interpolated.  The scheme iterates monotone
// min-updates with circle averages along a fixed set of complex lines,
// which characterises plurisubharmonicity.  Nothing here touches the
// obstacle-problem solver or the Legendre transform, so agreement with
// the transform is a genuine cross-check.

namespace hmae {

struct PerronOptions {
    int n_rho = 17;            // rho levels on [0,1], boundary included
    double radius_cells = 3.0; // largest circle radius as a multiple of h
    int radius_count = 1;      // radii spread uniformly in [h, radius_cells*h]
    int circle_samples = 8;
    // complex-line directions as ratios beta/alpha; 1e9 stands for the
    // pure tau line
    std::vector<cplx> line_ratios = {
        {0.0, 0.0}, {1e9, 0.0}, {1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
    double tol = 1e-6;
    long max_sweeps = 4000;
    double sync_radius = 2.0;
};

struct PerronOracle {
    std::vector<double> rho;       // ascending, last = 1
    int n = 0;
    double R = 0.0;
    std::vector<GlobalFunction> u; // one slab per rho level; the (0,0)
                                   // corner node is masked
    long sweeps = 0;
    double final_change = 0.0;
};

// phi fixes both the boundary data and the spatial resolution of the
// oracle grid (intended to be run at a coarser n than the main pipeline).
PerronOracle direct_perron_oracle(const GlobalFunction& phi, const PerronOptions& opt = {});

struct OracleComparison {
    double max_diff = 0.0;
    double exclude_radius = 0.0;  // z-chart nodes with |zeta| below this are
                                  // skipped (the log spike along the axis is
                                  // below the oracle's resolution)
    std::vector<double> s_values;
    std::vector<double> per_level;  // max diff per interior rho level
};

// Compares the oracle slabs with the Legendre transform of the envelope
// family, evaluated at the oracle's nodes and exact in s.  The default
// exclusion cylinder is where the axis cusp's influence on the circle
// averages has died out (it spreads 2-3 circle radii by harmonic
// measure; 0.9 covers the default radius_cells at n >= 33).
OracleComparison compare_with_legendre(const PerronOracle& oracle, const EnvelopeFamily& fam,
                                       double exclude_radius = 0.9);

}  // namespace hmae

#endif
