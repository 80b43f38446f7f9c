#include "hmae/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hmae {

std::vector<double> make_s_grid(int uniform_points, double s_max, int cluster_points) {
    if (uniform_points < 2 || s_max <= 0.0)
        throw std::invalid_argument("make_s_grid: need >= 2 points and s_max > 0");
    std::vector<double> s;
    const double ds = s_max / (uniform_points - 1);
    for (int k = 0; k < uniform_points; ++k) s.push_back(k * ds);
    double c = ds;
    for (int k = 0; k < cluster_points; ++k) {
        c *= 0.5;
        s.push_back(c);
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

GlobalFunction legendre_slice(const EnvelopeFamily& fam, double s, ChartGrid* tstar_z,
                              ChartGrid* tstar_w) {
    if (fam.envs.empty()) throw std::invalid_argument("legendre_slice: empty family");
    const ChartGrid& ref = fam.envs[0].psi.z;
    const int n = ref.n;
    const double R = ref.half_width;
    GlobalFunction out(n, R);
    double tol = 0.0;
    for (const auto& e : fam.envs) tol = std::max(tol, e.psi.consistency_tol);
    out.consistency_tol = tol;
    for (Chart c : {Chart::Z, Chart::W}) {
        ChartGrid& og = out.grid(c);
        ChartGrid* ts = (c == Chart::Z) ? tstar_z : tstar_w;
        if (ts) *ts = ChartGrid(c, R, n);
#pragma omp parallel for schedule(static)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int k = j * n + i;
                double best = -std::numeric_limits<double>::infinity();
                double bt = 0.0;
                for (std::size_t a = 0; a < fam.envs.size(); ++a) {
                    const SingularEnvelope& e = fam.envs[a];
                    const ChartGrid& pg = e.psi.grid(c);
                    if (pg.mask[k]) continue;
                    const double cand = pg.values[k] - (1.0 - e.t) * s;
                    if (cand > best) {
                        best = cand;
                        bt = e.t;
                    }
                }
                og.values[k] = best;
                if (ts) ts->values[k] = bt;
            }
    }
    return out;
}

GeodesicSolution legendre_build(const EnvelopeFamily& fam, const std::vector<double>& s_grid) {
    GeodesicSolution sol;
    sol.s_grid = s_grid;
    sol.t_grid = fam.t_grid;
    sol.slices.reserve(s_grid.size());
    for (double s : s_grid) {
        GeodesicSlice sl;
        sl.s = s;
        sl.phi_tilde = legendre_slice(fam, s, &sl.tstar_z, &sl.tstar_w);
        sol.slices.push_back(std::move(sl));
    }
    return sol;
}

bool envelope_value_at(const SingularEnvelope& e, const ChartPoint& p, double& out) {
    double v;
    if (e.t == 0.0) return e.psi.value_at(p, out);
    if (!e.v.value_at(p, v)) return false;
    out = e.t * zeta_value(p) + v;  // -inf exactly at the z-origin
    return true;
}

bool legendre_eval(const EnvelopeFamily& fam, const ChartPoint& p, double s, double& out,
                   double* tstar) {
    double best = -std::numeric_limits<double>::infinity();
    double bt = 0.0;
    bool any = false;
    for (const auto& e : fam.envs) {
        double v;
        if (!envelope_value_at(e, p, v)) continue;
        any = true;
        const double cand = v - (1.0 - e.t) * s;
        if (cand > best) {
            best = cand;
            bt = e.t;
        }
    }
    if (!any) return false;
    out = best;
    if (tstar) *tstar = bt;
    return true;
}

InvertReport legendre_invert_check(const GeodesicSolution& sol, const EnvelopeFamily& fam) {
    InvertReport rep;
    if (sol.slices.empty()) return rep;
    const int n = sol.slices[0].phi_tilde.z.n;
    for (std::size_t a = 0; a < fam.envs.size(); ++a) {
        const SingularEnvelope& e = fam.envs[a];
        double worst = 0.0;
        for (Chart c : {Chart::Z, Chart::W}) {
            const ChartGrid& pg = e.psi.grid(c);
            for (int k = 0; k < n * n; ++k) {
                if (pg.mask[k]) continue;
                double inf = std::numeric_limits<double>::infinity();
                for (const auto& sl : sol.slices)
                    inf = std::min(inf,
                                   sl.phi_tilde.grid(c).values[k] + (1.0 - e.t) * sl.s);
                worst = std::max(worst, std::abs(inf - pg.values[k]));
            }
        }
        if (worst > rep.worst_gap) {
            rep.worst_gap = worst;
            rep.worst_t = e.t;
        }
    }
    return rep;
}

GlobalFunction to_boundary_problem(const EnvelopeFamily& fam, double tau_radius) {
    if (!(tau_radius > 0.0 && tau_radius < 1.0))
        throw std::invalid_argument("to_boundary_problem: |tau| must be in (0,1)");
    const ChartGrid& ref = fam.envs.at(0).psi.z;
    const int n = ref.n;
    const double R = ref.half_width;
    const double r = tau_radius;
    const double s = -2.0 * std::log(r);
    GlobalFunction out(n, R);
    out.consistency_tol = 20.0 * ref.spacing() * ref.spacing();
    for (Chart c : {Chart::Z, Chart::W}) {
        ChartGrid& og = out.grid(c);
#pragma omp parallel for schedule(static)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int k = j * n + i;
                const cplx p = og.node(i, j);
                double base;
                bool ok;
                double corr;
                if (c == Chart::Z) {
                    const cplx m = r * p;
                    ok = legendre_eval(fam, {Chart::Z, m}, s, base);
                    corr = std::log1p(std::norm(m)) - std::log1p(std::norm(p)) + s;
                } else {
                    // tau*z in w-coordinates is p / r; the omega-potential
                    // difference collapses to ln((|p|^2+r^2)/(|p|^2+1))
                    ok = legendre_eval(fam, {Chart::W, p / r}, s, base);
                    corr = std::log((std::norm(p) + r * r) / (std::norm(p) + 1.0)) + s;
                }
                if (!ok) {
                    og.mask[k] = 1;
                    continue;
                }
                og.values[k] = base + corr;
            }
    }
    return out;
}

CurrentDensity fibre_density(const EnvelopeFamily& fam, double tau_radius) {
    if (!(tau_radius > 0.0 && tau_radius < 1.0))
        throw std::invalid_argument("fibre_density: |tau| must be in (0,1)");
    const ChartGrid& ref = fam.envs.at(0).psi.z;
    const int n = ref.n;
    const double R = ref.half_width;
    const double r = tau_radius;
    const double s = -2.0 * std::log(r);
    ChartGrid tsz(Chart::Z, R, n), tsw(Chart::W, R, n);
    const GlobalFunction slice = legendre_slice(fam, s, &tsz, &tsw);
    CurrentDensity D = ddc_density(slice);
    // The slice is t* zeta + regular.  The discrete Laplacian of the log
    // pole carries an O(h^2/|z|^4) defect which the chain-rule factor
    // 1/r^2 would amplify badly on the far region, so subtract the
    // discrete density of zeta itself (zero in the continuum away from
    // the pole) scaled by the active t.
    const CurrentDensity E = ddc_density(green_potential(n, R));
    for (Chart c : {Chart::Z, Chart::W}) {
        ChartGrid& dg = (c == Chart::Z) ? D.z : D.w;
        const ChartGrid& eg = (c == Chart::Z) ? E.z : E.w;
        const ChartGrid& ts = (c == Chart::Z) ? tsz : tsw;
        for (int k = 0; k < n * n; ++k) {
            if (eg.mask[k]) {
                dg.mask[k] = 1;
                continue;
            }
            if (!dg.mask[k]) dg.values[k] -= ts.values[k] * eg.values[k];
        }
    }
    CurrentDensity out;
    out.z = ChartGrid(Chart::Z, R, n);
    out.w = ChartGrid(Chart::W, R, n);
    for (Chart c : {Chart::Z, Chart::W}) {
        ChartGrid& og = (c == Chart::Z) ? out.z : out.w;
        // the fibre map z -> tau*z reads w -> w/tau in the other chart
        const double factor = (c == Chart::Z) ? r * r : 1.0 / (r * r);
#pragma omp parallel for schedule(static)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int k = j * n + i;
                const cplx p = og.node(i, j);
                const cplx m = (c == Chart::Z) ? r * p : p / r;
                double d;
                if (density_at(D, {c, m}, c, d))
                    og.values[k] = factor * d;
                else
                    og.mask[k] = 1;
            }
    }
    return out;
}

GlobalFunction h_exact(const GeodesicSolution& sol, std::size_t slice) {
    const GeodesicSlice& sl = sol.slices.at(slice);
    const int n = sl.phi_tilde.z.n;
    GlobalFunction h(n, sl.phi_tilde.z.half_width);
    for (int k = 0; k < n * n; ++k) {
        h.z.values[k] = sl.tstar_z.values[k] - 1.0;
        h.w.values[k] = sl.tstar_w.values[k] - 1.0;
    }
    h.consistency_tol = 1.0;  // t* jumps across free boundaries
    return h;
}

GlobalFunction h_discrete(const GeodesicSolution& sol, std::size_t slice) {
    if (slice == 0 || slice + 1 >= sol.slices.size())
        throw std::out_of_range("h_discrete: needs both s-neighbours");
    const GeodesicSlice& lo = sol.slices[slice - 1];
    const GeodesicSlice& mid = sol.slices[slice];
    const GeodesicSlice& hi = sol.slices[slice + 1];
    const double a = mid.s - lo.s, b = hi.s - mid.s;
    const int n = mid.phi_tilde.z.n;
    GlobalFunction h(n, mid.phi_tilde.z.half_width);
    h.consistency_tol = 1.0;
    for (Chart c : {Chart::Z, Chart::W}) {
        const auto& ul = lo.phi_tilde.grid(c).values;
        const auto& um = mid.phi_tilde.grid(c).values;
        const auto& uh = hi.phi_tilde.grid(c).values;
        auto& out = h.grid(c).values;
        for (int k = 0; k < n * n; ++k)
            out[k] = (a * a * uh[k] + (b * b - a * a) * um[k] - b * b * ul[k]) /
                     (a * b * (a + b));
    }
    return h;
}

GlobalMask omega_t_of_fibre(const GeodesicSolution& sol, std::size_t slice, double t) {
    const GeodesicSlice& sl = sol.slices.at(slice);
    const int n = sl.phi_tilde.z.n;
    GlobalMask m(n);
    for (int k = 0; k < n * n; ++k) {
        m.z[k] = sl.tstar_z.values[k] < t ? 1 : 0;
        m.w[k] = sl.tstar_w.values[k] < t ? 1 : 0;
    }
    return m;
}

MAResidual ma_residual(const GeodesicSolution& sol, std::size_t slice) {
    if (slice == 0 || slice + 1 >= sol.slices.size())
        throw std::out_of_range("ma_residual: needs both s-neighbours");
    const GeodesicSlice& lo = sol.slices[slice - 1];
    const GeodesicSlice& mid = sol.slices[slice];
    const GeodesicSlice& hi = sol.slices[slice + 1];
    const double a = mid.s - lo.s, b = hi.s - mid.s;
    const int n = mid.phi_tilde.z.n;
    const double R = mid.phi_tilde.z.half_width;
    const double h = mid.phi_tilde.z.spacing();
    MAResidual res;
    res.z = ChartGrid(Chart::Z, R, n);
    res.w = ChartGrid(Chart::W, R, n);
    // discrete defect of the log pole, subtracted from U_zzbar (see
    // fibre_density for the rationale)
    const CurrentDensity E = ddc_density(green_potential(n, R));
    double sum = 0.0;
    std::size_t cnt = 0;
    for (Chart c : {Chart::Z, Chart::W}) {
        const ChartGrid& eg = E.grid(c);
        const ChartGrid& ts = (c == Chart::Z) ? mid.tstar_z : mid.tstar_w;
        const auto& ul = lo.phi_tilde.grid(c).values;
        const auto& um = mid.phi_tilde.grid(c).values;
        const auto& uh = hi.phi_tilde.grid(c).values;
        ChartGrid& out = (c == Chart::Z) ? res.z : res.w;
        // U_s at every node first (the FS potential is s-independent)
        std::vector<double> us(std::size_t(n) * n);
        for (int k = 0; k < n * n; ++k)
            us[k] = (a * a * uh[k] + (b * b - a * a) * um[k] - b * b * ul[k]) /
                    (a * b * (a + b));
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int k = j * n + i;
                if (i == 0 || j == 0 || i == n - 1 || j == n - 1 || eg.mask[k]) {
                    out.mask[k] = 1;
                    continue;
                }
                auto fsp = [&](int ii, int jj) {
                    return std::log1p(std::norm(out.node(ii, jj)));
                };
                const double uc = um[k] + fsp(i, j);
                const double lap = um[k - 1] + fsp(i - 1, j) + um[k + 1] + fsp(i + 1, j) +
                                   um[k - n] + fsp(i, j - 1) + um[k + n] + fsp(i, j + 1) -
                                   4.0 * uc;
                const double uzz =
                    lap / (4.0 * h * h) - std::numbers::pi * ts.values[k] * eg.values[k];
                const double uss =
                    2.0 * (a * uh[k] - (a + b) * um[k] + b * ul[k]) / (a * b * (a + b));
                const double re = (us[k + 1] - us[k - 1]) / (4.0 * h);
                const double im = -(us[k + n] - us[k - n]) / (4.0 * h);
                const double r = uzz * uss - (re * re + im * im);
                out.values[k] = r;
                if (std::abs(out.node(i, j)) <= 1.0) {
                    res.max_abs = std::max(res.max_abs, std::abs(r));
                    sum += std::abs(r);
                    ++cnt;
                }
            }
    }
    res.mean_abs = cnt ? sum / double(cnt) : 0.0;
    return res;
}

DegeneracyReport degeneracy_report(const EnvelopeFamily& fam,
                                   const std::vector<double>& s_grid,
                                   const DegeneracyOptions& opt) {
    DegeneracyReport rep;
    const ChartGrid& ref = fam.envs.at(0).psi.z;
    const int n = ref.n;
    const double h = ref.spacing();
    for (double s : s_grid) {
        if (s < opt.min_s || s > opt.max_s) continue;
        const double r = std::exp(-0.5 * s);
        DiscImage disc(r, opt.boundary_samples);
        const double margin = opt.margin_cells * h;
        CurrentDensity fd = fibre_density(fam, r);
        GlobalFunction phi_fibre = to_boundary_problem(fam, r);
        SliceDegeneracy sd;
        sd.s = s;
        sd.tau_radius = r;
        sd.min_density_in_A = std::numeric_limits<double>::infinity();
        for (Chart c : {Chart::Z, Chart::W}) {
            const ChartGrid& grid = fd.grid(c);
            const ChartGrid& pf = phi_fibre.grid(c);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const cplx p = grid.node(i, j);
                    if (!owns(c, p)) continue;
                    const int k = j * n + i;
                    cplx m;  // tau*z in the z-plane
                    if (c == Chart::Z) {
                        m = r * p;
                    } else if (p == cplx(0.0, 0.0)) {
                        m = cplx(1e9, 0.0);  // z = infinity, far outside A_tau
                    } else {
                        m = r / p;
                    }
                    const bool in_S = in_predicted_S(disc, m, margin);
                    const bool in_A = disc.contains(m) && disc.clear_of_boundary(m, margin);
                    const bool have = grid.mask[k] == 0;
                    if (in_S) {
                        ++sd.predicted_nodes;
                        sd.predicted_area += fs_density({c, p}) * h * h;
                        if (have) {
                            const double d = grid.values[k];
                            sd.max_density_on_S =
                                std::max(sd.max_density_on_S, std::abs(d));
                            if (std::abs(d) <= opt.density_tol) ++sd.detected_in_predicted;
                        }
                        if (!pf.mask[k]) {
                            const double zeta = (c == Chart::Z)
                                                    ? std::log(std::norm(p)) -
                                                          std::log1p(std::norm(p))
                                                    : -std::log1p(std::norm(p));
                            sd.closed_form_error = std::max(
                                sd.closed_form_error, std::abs(pf.values[k] - zeta));
                        }
                    } else if (in_A && have) {
                        sd.min_density_in_A = std::min(sd.min_density_in_A, grid.values[k]);
                    }
                }
        }
        if (sd.predicted_nodes)
            sd.coverage = double(sd.detected_in_predicted) / double(sd.predicted_nodes);
        if (!std::isfinite(sd.min_density_in_A)) sd.min_density_in_A = 0.0;
        rep.slices.push_back(sd);
    }
    return rep;
}

}  // namespace hmae
