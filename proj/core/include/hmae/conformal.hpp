#ifndef HMAE_CONFORMAL_HPP
#define HMAE_CONFORMAL_HPP

#include <vector>

#include "hmae/p1grid.hpp"

// Closed-form Riemann map f(tau) = 2*tau/(1+tau^2) from the unit disc
// onto the doubly slit plane C \ ((-inf,-1] u [1,inf)), with f(0) = 0.
// 1/f is the Joukowski map, which is why the image avoids exactly the
// two real slits.  The disc images A_tau = f(D_r) and the region
// S = {(z,tau) : tau*z in the open complement of A_tau} drive the
// degeneracy prediction.

namespace hmae {

cplx riemann_map(const cplx& tau);  // throws std::domain_error for |tau| >= 1
cplx riemann_map_inverse(const cplx& z);

struct BiholReport {
    int collisions = 0;
    bool slits_avoided = true;
    bool winding_ok = true;
    bool ok() const { return collisions == 0 && slits_avoided && winding_ok; }
};

BiholReport verify_biholomorphism(int n_samples = 64);

// Boundary of A_r = f(D_r), sampled, with a hashed bin structure for
// fast point queries.
class DiscImage {
  public:
    DiscImage(double r, int boundary_samples = 4096);

    double radius() const { return r_; }
    const std::vector<cplx>& boundary() const { return boundary_; }

    // membership via the inverse branch |tau(p)| < r
    bool contains(const cplx& p) const;
    // independent parity test against the sampled boundary polyline
    bool contains_by_parity(const cplx& p) const;
    // true when p is at distance >= margin from the boundary polyline
    bool clear_of_boundary(const cplx& p, double margin) const;
    double boundary_distance(const cplx& p) const;

  private:
    double r_;
    std::vector<cplx> boundary_;
    // uniform bins over the boundary bounding box
    double bin_size_ = 0.0;
    double x0_ = 0.0, y0_ = 0.0;
    int bx_ = 0, by_ = 0;
    std::vector<std::vector<int>> bins_;  // segment indices
};

// Nodes of `grid` (in chart `chart`) whose image tau*z lies in the open
// complement of A_tau, eroded so that tau*z keeps distance
// margin_cells * h from the boundary polyline.  S depends only on
// (tau*z, |tau|), so tau is taken real = tau_radius.
std::vector<std::uint8_t> predicted_S_chart(const DiscImage& disc, const ChartGrid& grid,
                                            Chart chart, double margin_cells);

GlobalMask predicted_S_mask(double tau_radius, int n, double R, double margin_cells = 3.0,
                            int boundary_samples = 4096);

// Same predicate for a single point given in z-chart coordinates.
bool in_predicted_S(const DiscImage& disc, const cplx& z_times_tau, double margin);

}  // namespace hmae

#endif
