#ifndef HMAE_HELESHAW_HPP
#define HMAE_HELESHAW_HPP

#include <vector>

#include "hmae/envelope.hpp"
#include "hmae/p1grid.hpp"

// The Hele-Shaw domains Omega_t = {psi_t < phi}: extraction from the
// solver's contact set, mass accounting against the current of phi,
// topology, and contour export.

namespace hmae {

struct TopologyInfo {
    int domain_components = 0;
    int complement_components = 0;
    bool contained_in_cz = false;  // misses the w-origin (z = infinity)
    bool simply_connected = false;
    bool applicable = true;  // false for the full-P^1 mask
};

// Complement of the contact set, isolated single nodes removed, overlap
// resolved by the ownership rule.
GlobalMask extract_domain(const SingularEnvelope& e, const GlobalFunction& phi);

double domain_mass(const GlobalMask& mask, const CurrentDensity& phi_density);

// First-order correction to domain_mass: contact nodes with free
// neighbours over-count the phi-measure by (phi - psi)/h^2 per free
// neighbour, which shorts the domain mass by (1/4pi) sum (phi - psi)
// over free-contact edges.  Adding it back restores mass = t up to
// O(h^2) + solver tolerance.
double contact_boundary_correction(const SingularEnvelope& e, const GlobalFunction& phi);

// Connected components by flood fill on the two chart lattices glued
// along the overlap.  Throws if the mask touches a chart-grid edge.
TopologyInfo topology(const GlobalMask& mask, int n, double R);

struct HeleShawFamily {
    std::vector<double> t_grid;
    std::vector<GlobalMask> domains;
    std::vector<double> masses;
    std::vector<TopologyInfo> components;
};

HeleShawFamily build_family(const EnvelopeFamily& envelopes, const GlobalFunction& phi);

struct NestingReport {
    bool ok = true;
    double worst_violation_cells = 0.0;  // distance (in cells) of a
                                         // non-nested node from the larger mask
};

// Omega_t subset Omega_t' for t <= t', up to a one-cell boundary discrepancy.
NestingReport nesting_check(const HeleShawFamily& f);

// Hausdorff distance between the complement of Omega_1 and the segment
// [-1,1] in the w-chart.
double omega1_complement_vs_segment(const GlobalMask& omega1, int n, double R);

struct Polyline {
    std::vector<cplx> pts;
};

// Marching squares level-set contours of (values - level) on one chart.
std::vector<Polyline> marching_squares(const ChartGrid& g, double level);

}  // namespace hmae

#endif
