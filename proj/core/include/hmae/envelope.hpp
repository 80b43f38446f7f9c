#ifndef HMAE_ENVELOPE_HPP
#define HMAE_ENVELOPE_HPP

#include <optional>
#include <vector>

#include "hmae/p1grid.hpp"

// Singular envelopes psi_t: the largest omega-subharmonic function below
// phi with Lelong number >= t at z = 0.  Solved as an obstacle problem in
// the regular part v, with psi_t = t*zeta + v and zeta the Green-type
// potential ln(|z|^2/(1+|z|^2)).

namespace hmae {

// zeta as a GlobalFunction: singular (masked) at the z-chart origin,
// equal to -ln(1+|w|^2) on the w-chart; declared atom mass 1.
GlobalFunction green_potential(int n, double R);

double zeta_value(const ChartPoint& p);  // -inf at the z-origin

struct SingularEnvelope {
    double t = 0.0;
    GlobalFunction psi;      // t*zeta + v, masked at the z-origin for t > 0
    GlobalFunction v;        // regular part, finite everywhere
    GlobalMask contact;      // psi == phi within contact_tol
    long iterations = 0;
    double residual = 0.0;   // last sup-norm sweep change
    double contact_tol = 0.0;
    double fp_tol = 0.0;
};

struct EnvelopeSolverOptions {
    enum class Mode { Jacobi, RedBlackSOR };
    Mode mode = Mode::RedBlackSOR;  // Jacobi is the reference mode; SOR is
                                    // the flagged fast mode (also
                                    // deterministic across thread counts)
    double omega = 1.7;  // the cross-chart coupling turns unstable near 1.8
    double fp_tol_rel = 1e-8;
    long max_iter = 1'000'000;
    double contact_tol_factor = 10.0;
    double sync_radius = 2.0;  // each chart solves |coord| < sync_radius
    const GlobalFunction* warm_start = nullptr;  // previous psi, optional
    bool check_monotone = false;  // Jacobi from the obstacle: assert
                                  // non-increasing iterates every 100 sweeps
};

// Throws std::invalid_argument for t outside [0,1] and std::runtime_error
// on non-convergence.  t = 0 returns phi itself (no singularity).
SingularEnvelope solve_psi_t(const GlobalFunction& phi, double t,
                             const EnvelopeSolverOptions& opt = {});

// Lelong certificate: max |v| over the punctured disc 0 < |z| <= radius.
double lelong_check(const SingularEnvelope& e, double radius = 0.1);

// Independent atom estimate: flux of psi through the square |x|,|y| <= box
// minus the smooth ddc mass inside.  Should equal t.
double atom_mass_estimate(const GlobalFunction& psi, double box = 0.25);

struct MonotonicityReport {
    bool ok = true;
    double worst_gap = 0.0;
    double worst_t = 0.0, worst_t2 = 0.0;
    Chart worst_chart = Chart::Z;
    int worst_i = 0, worst_j = 0;
};

// psi_{t'} <= psi_t + tol for consecutive pairs of a t-sorted family.
MonotonicityReport monotonicity_check(const std::vector<SingularEnvelope>& family,
                                      double tol);

struct EnvelopeFamily {
    std::vector<double> t_grid;
    std::vector<SingularEnvelope> envs;  // same order as t_grid
};

// Uniform t-grid including both endpoints; with from = 0 the first
// envelope is phi itself.
std::vector<double> make_t_grid(int points, double from = 0.0, double to = 1.0);

// Uniform grid plus geometrically clustered points below t = 1
// (1 - dt/2, 1 - dt/4, ...).  The fibre measure degenerates on the
// boundary of the limit domain, so the absorbed volume 1 - t is
// super-linearly flat in the distance to it; uniform t-steps cannot
// localise the t -> 1 domains, the cluster can.
std::vector<double> make_t_grid_clustered(int points, int cluster_points);

EnvelopeFamily solve_family(const GlobalFunction& phi, const std::vector<double>& t_grid,
                            EnvelopeSolverOptions opt = {});

// Residual of the interior fixed-point characterisation: at non-contact
// nodes v should equal mean(neighbours) + h^2*pi*(1-t)*fs.
double fixed_point_residual(const SingularEnvelope& e, const GlobalFunction& phi);

}  // namespace hmae

#endif
