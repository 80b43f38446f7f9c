#ifndef HMAE_POTENTIAL_HPP
#define HMAE_POTENTIAL_HPP

#include <string>
#include <vector>

#include "hmae/p1grid.hpp"

// Explicit boundary potential phi on P^1 with strictly positive curvature
// current and phi >= -ln(1+|w|^2) with equality exactly on the segment
// gamma = [-1,1] in the w-chart.

namespace hmae {

// alpha(t): zero for t <= 1, C^2, convex, non-decreasing, asymptotically
// linear with the given slope after a ramp of width `lambda`.  Built from
// a hat-function second derivative so the far-field growth stays mild
// enough for the constant selection to succeed.
struct BumpProfile {
    double lambda = 0.5;
    double slope = 1.0;
    double operator()(double t) const;
    double deriv(double t) const;
    double second_deriv(double t) const;
};

// Regularised maximum max_delta(a,b) = delta * max_reg(a/delta, b/delta)
// where max_reg(a,b) = (|a-b|_reg + a + b)/2 and |t|_reg is the even C^2
// convex spline equal to |t| for |t| >= 1 and (-t^4 + 6t^2 + 3)/8 inside.
struct RegMax {
    double delta = 0.1;
    static double abs_reg(double t);
    double operator()(double a, double b) const;
};

double u_value(const cplx& w, const BumpProfile& alpha);

struct ExampleConstants {
    double epsilon = 0.0;
    double C = 0.0;
    double delta = 0.1;
    double margin = 0.2;  // replaces the over-generous unit margins; see README
};

// Deterministic search: largest epsilon from a geometric ladder for which
//   eps*u >= ln(1+|w|^2) - C + margin   on D_2, and
//   eps*u <= ln(1+|w|^2) - C - margin   on D_4 \ D_3
// admit a common C (taken as the midpoint of the feasible interval).
// Throws std::runtime_error naming the violated node on failure.
ExampleConstants select_constants(const ChartGrid& wgrid, const BumpProfile& alpha,
                                  double delta = 0.1, double margin = 0.2);

// phi = max_delta(eps*u, ln(1+|w|^2) - C) - ln(1+|w|^2) on D_4, and the
// continuity-forced constant -C outside.
GlobalFunction build_phi(const ExampleConstants& c, int n, double R,
                         const BumpProfile& alpha);

double phi_value(const cplx& w, const ExampleConstants& c, const BumpProfile& alpha);

struct PotentialReport {
    double min_density = 0.0;          // over ddc_density(phi), must be > 0
    double equality_set_hausdorff = 0.0;  // contact nodes vs the segment
    double max_second_difference = 0.0;
    double consistency_gap = 0.0;
    bool inequality1_ok = false;  // on D_2, with the configured margin
    bool inequality2_ok = false;  // on D_4 \ D_3
    bool glue_region_exact = false;  // v == ln(1+|w|^2)-C node-exactly on D_4\D_3
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

PotentialReport validate_potential(const GlobalFunction& phi, const ExampleConstants& c,
                                   const BumpProfile& alpha);

}  // namespace hmae

#endif
