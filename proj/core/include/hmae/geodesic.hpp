#ifndef HMAE_GEODESIC_HPP
#define HMAE_GEODESIC_HPP

#include <cstddef>
#include <vector>

#include "hmae/conformal.hpp"
#include "hmae/envelope.hpp"
#include "hmae/p1grid.hpp"

// Legendre transform of the envelope family in t,
//   Phi~(z, s) = max_t { psi_t(z) - (1-t) s },   s = -ln|tau|^2,
// the S^1-invariant potential of the weak geodesic ray, together with the
// reconstruction of the fibre potentials Phi(., tau), the H-function
// H = dPhi~/ds = t* - 1, and the degeneracy diagnostics on the predicted
// region S.

namespace hmae {

// Uniform s-grid on [0, s_max] plus geometrically clustered points near 0
// (s = ds/2, ds/4, ...), sorted ascending, s = 0 included.
std::vector<double> make_s_grid(int uniform_points = 33, double s_max = 8.0,
                                int cluster_points = 8);

struct GeodesicSlice {
    double s = 0.0;
    GlobalFunction phi_tilde;
    ChartGrid tstar_z, tstar_w;  // maximising t per node
};

struct GeodesicSolution {
    std::vector<double> s_grid;
    std::vector<double> t_grid;
    std::vector<GeodesicSlice> slices;
};

// One slice at arbitrary s, exact in s (node-value max over the t-grid).
GlobalFunction legendre_slice(const EnvelopeFamily& fam, double s,
                              ChartGrid* tstar_z = nullptr, ChartGrid* tstar_w = nullptr);

GeodesicSolution legendre_build(const EnvelopeFamily& fam, const std::vector<double>& s_grid);

// psi_t off-grid through the regular part: t * zeta(p) + v(p).
bool envelope_value_at(const SingularEnvelope& e, const ChartPoint& p, double& out);

// Phi~ at an arbitrary point of P^1 and arbitrary s >= 0.
bool legendre_eval(const EnvelopeFamily& fam, const ChartPoint& p, double s, double& out,
                   double* tstar = nullptr);

struct InvertReport {
    double worst_gap = 0.0;  // |inf_s (Phi~ + (1-t) s) - psi_t|, sup over nodes
    double worst_t = 0.0;
};

// The inverse transform recovers each psi_t (psi is concave in t, so the
// double transform is exact up to t-grid resolution).
InvertReport legendre_invert_check(const GeodesicSolution& sol, const EnvelopeFamily& fam);

// Fibre potential Phi(., tau) for |tau| = tau_radius, via
//   Phi(z, tau) = Phi~(tau z, s) + ln(1+|tau z|^2) - ln|tau|^2 - ln(1+|z|^2).
GlobalFunction to_boundary_problem(const EnvelopeFamily& fam, double tau_radius);

// Density of omega + ddc Phi(., tau), pulled back from the slice density
// by z -> tau z (chain rule on node-level densities, so no second
// differences of interpolated values are taken).
CurrentDensity fibre_density(const EnvelopeFamily& fam, double tau_radius);

// H = dPhi~/ds in [-1, 0]; exact variant uses the active t (H = t* - 1),
// discrete variant uses nonuniform finite differences across slices.
GlobalFunction h_exact(const GeodesicSolution& sol, std::size_t slice);
GlobalFunction h_discrete(const GeodesicSolution& sol, std::size_t slice);

// Hele-Shaw domain read off the geodesic: {H + 1 < t} at the given slice.
GlobalMask omega_t_of_fibre(const GeodesicSolution& sol, std::size_t slice, double t);

struct MAResidual {
    ChartGrid z, w;              // R = U_zzbar * U_ss - |U_zs|^2 per node
    double max_abs = 0.0;        // over unmasked nodes with |coord| <= 1
    double mean_abs = 0.0;
};

// Discrete Monge-Ampere residual of U = Phi~ + local FS potential at an
// interior slice (needs both s-neighbours).
MAResidual ma_residual(const GeodesicSolution& sol, std::size_t slice);

struct DegeneracyOptions {
    double density_tol = 5e-3;   // |density| below this counts as degenerate
    double margin_cells = 3.0;   // erosion of the predicted region
    double min_s = 0.05;
    double max_s = 7.0;
    int boundary_samples = 4096;
};

struct SliceDegeneracy {
    double s = 0.0;
    double tau_radius = 0.0;
    std::size_t predicted_nodes = 0;
    std::size_t detected_in_predicted = 0;
    double coverage = 0.0;          // detected / predicted
    double max_density_on_S = 0.0;
    double closed_form_error = 0.0; // max |Phi(., tau) - zeta| on eroded S
    double min_density_in_A = 0.0;  // control: interior of A_tau stays positive
    double predicted_area = 0.0;    // FS area of the predicted region
};

struct DegeneracyReport {
    std::vector<SliceDegeneracy> slices;
};

DegeneracyReport degeneracy_report(const EnvelopeFamily& fam,
                                   const std::vector<double>& s_grid,
                                   const DegeneracyOptions& opt = {});

}  // namespace hmae

#endif
