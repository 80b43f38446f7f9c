#include "hmae/perron.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hmae {

namespace {

struct State {
    int n = 0, nrho = 0;
    double R = 0.0, h = 0.0, drho = 0.0;
    double sigma2 = 0.0;  // pole floor (sub-cell smoothing scale squared)
    // V[chart][level][node]
    std::vector<std::vector<double>> v[2];

    // psh part of U in chart coordinates: ln(|zeta|^2 + rho^2) on Z
    // (floored near the corner pole), ln(1 + rho^2 |w|^2) on W
    double pshpart(Chart c, const cplx& p, double rho) const {
        if (c == Chart::Z) return std::log(std::max(std::norm(p) + rho * rho, sigma2));
        return std::log1p(rho * rho * std::norm(p));
    }

    double bilin(const std::vector<double>& a, const cplx& p) const {
        const double x = (p.real() + R) / h, y = (p.imag() + R) / h;
        int i = std::clamp(int(x), 0, n - 2), j = std::clamp(int(y), 0, n - 2);
        const double fx = std::clamp(x - i, 0.0, 1.0), fy = std::clamp(y - j, 0.0, 1.0);
        const std::size_t k = std::size_t(j) * n + i;
        const double lo = a[k] * (1 - fx) + a[k + 1] * fx;
        const double hi = a[k + n] * (1 - fx) + a[k + n + 1] * fx;
        return lo * (1 - fy) + hi * fy;
    }

    double v_interp(Chart c, const cplx& p, double rho) const {
        const double x = std::clamp(rho, 0.0, 1.0) * (nrho - 1);
        const int m = std::min(int(x), nrho - 2);
        const double f = x - m;
        const auto& lv = v[int(c)];
        return bilin(lv[m], p) * (1 - f) + bilin(lv[m + 1], p) * f;
    }

    // global value of u at a point given in chart c
    double u_at(Chart c, cplx p, double rho) const {
        if (std::abs(p) > 1.0) {
            p = 1.0 / p;
            c = other(c);
        }
        return pshpart(c, p, rho) - std::log1p(std::norm(p)) + v_interp(c, p, rho);
    }
};

}  // namespace

PerronOracle direct_perron_oracle(const GlobalFunction& phi, const PerronOptions& opt) {
    const int n = phi.z.n;
    const double R = phi.z.half_width;
    const double h = phi.z.spacing();
    if (opt.n_rho < 3) throw std::invalid_argument("direct_perron_oracle: n_rho too small");

    State st;
    st.n = n;
    st.nrho = opt.n_rho;
    st.R = R;
    st.h = h;
    st.drho = 1.0 / (opt.n_rho - 1);
    st.sigma2 = (h / 4.0) * (h / 4.0);

    // V = u - G; boundary level carries phi exactly, interior levels start
    // from a constant upper bound and only ever decrease
    double vmax = 0.0;
    for (Chart c : {Chart::Z, Chart::W})
        for (double x : phi.grid(c).values) vmax = std::max(vmax, x);
    const double init = vmax + 0.5;
    for (int c = 0; c < 2; ++c) {
        st.v[c].assign(opt.n_rho, std::vector<double>(std::size_t(n) * n, init));
        st.v[c][opt.n_rho - 1] = phi.grid(Chart(c)).values;
    }

    auto fsp = [](const cplx& p) { return std::log1p(std::norm(p)); };
    auto node = [&](int i, int j) { return cplx(-R + i * h, -R + j * h); };

    auto sync = [&]() {
        for (int c = 0; c < 2; ++c)
            for (int m = 0; m < opt.n_rho - 1; ++m)
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < n; ++i) {
                        const cplx p = node(i, j);
                        if (std::abs(p) < opt.sync_radius) continue;
                        const double rho = m * st.drho;
                        const double u = st.u_at(other(Chart(c)), 1.0 / p, rho);
                        st.v[c][m][std::size_t(j) * n + i] =
                            u - st.pshpart(Chart(c), p, rho) + fsp(p);
                    }
    };
    sync();

    // resolved directions (alpha real >= 0 by line symmetry)
    struct Dir {
        double alpha;
        cplx beta;
    };
    std::vector<Dir> dirs;
    for (const cplx& lam : opt.line_ratios) {
        if (lam.real() > 1e8) {
            dirs.push_back({0.0, cplx(1.0, 0.0)});
        } else {
            const double a = 1.0 / std::sqrt(1.0 + std::norm(lam));
            dirs.push_back({a, lam * a});
        }
    }

    const double eps0 = opt.radius_cells * h;
    std::vector<double> radii;
    if (opt.radius_count <= 1) {
        radii.push_back(eps0);
    } else {
        for (int q = 0; q < opt.radius_count; ++q)
            radii.push_back(h + (eps0 - h) * q / (opt.radius_count - 1));
    }
    const int K = opt.circle_samples;
    PerronOracle out;
    out.rho.resize(opt.n_rho);
    for (int m = 0; m < opt.n_rho; ++m) out.rho[m] = m * st.drho;
    out.n = n;
    out.R = R;

    std::vector<std::vector<double>> scratch[2];
    for (long sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        double change = 0.0;
        for (int c = 0; c < 2; ++c) scratch[c] = st.v[c];
        for (int c = 0; c < 2; ++c)
            for (int m = 0; m < opt.n_rho - 1; ++m) {
                const double rho = m * st.drho;
                auto& dst = scratch[c][m];
#pragma omp parallel for schedule(static) reduction(max : change)
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < n; ++i) {
                        const cplx p = node(i, j);
                        if (std::abs(p) >= opt.sync_radius) continue;
                        const std::size_t k = std::size_t(j) * n + i;
                        double best = st.v[c][m][k];
                        // several radii: large ones propagate information,
                        // small ones resolve sharp features (at the cost of
                        // a larger accumulated interpolation bias)
                        for (const Dir& d : dirs)
                          for (double eps : radii) {
                            const double bmag = std::abs(d.beta);
                            if (bmag > 0.0) {
                                eps = std::min(eps, (1.0 - rho) / bmag * 0.999);
                                // keep tau-circles from enclosing tau = 0:
                                // an enclosing circle averages ln at the
                                // circle radius instead of the centre, which
                                // unbinds the constraint and leaves the low
                                // rho levels stuck at their initial value
                                if (rho > 0.0) eps = std::min(eps, 0.9 * rho / bmag);
                            }
                            // same non-enclosure cap for the zeta pole on
                            // the z chart (the point p = 0 itself only has
                            // pure-tau candidates)
                            if (c == 0 && d.alpha > 0.0)
                                eps = std::min(eps, 0.9 * std::abs(p) / d.alpha);
                            if (eps < 1e-3 * h) continue;
                            double acc = 0.0;
                            for (int q = 0; q < K; ++q) {
                                const double th =
                                    2.0 * std::numbers::pi * (q + 0.5) / K;
                                const cplx e(std::cos(th), std::sin(th));
                                const cplx zp = p + eps * d.alpha * e;
                                const double rp = std::abs(rho + eps * d.beta * e);
                                acc += st.u_at(Chart(c), zp, rp) + fsp(zp);
                            }
                            // U(center) <= avg(U); U = pshpart - fsp + V + fsp
                            const double vc = acc / K - st.pshpart(Chart(c), p, rho);
                            best = std::min(best, vc);
                          }
                        change = std::max(change, st.v[c][m][k] - best);
                        dst[k] = best;
                    }
            }
        for (int c = 0; c < 2; ++c)
            for (int m = 0; m < opt.n_rho - 1; ++m) st.v[c][m] = scratch[c][m];
        sync();
        // the corner node (zeta, rho) = (0, 0) is the pole itself; V there
        // never receives a binding constraint, but its value anchors the
        // interpolation used by the low-rho axis circles, so extrapolate it
        // from the ring neighbours (the true V extends continuously)
        {
            const int mid = (n - 1) / 2;
            auto& lv = st.v[0][0];
            const std::size_t k0 = std::size_t(mid) * n + mid;
            lv[k0] = 0.25 * (lv[k0 - 1] + lv[k0 + 1] + lv[k0 - n] + lv[k0 + n]);
        }
        out.sweeps = sweep + 1;
        out.final_change = change;
        if (change < opt.tol) break;
    }

    out.u.reserve(opt.n_rho);
    for (int m = 0; m < opt.n_rho; ++m) {
        GlobalFunction g(n, R);
        g.consistency_tol = 50.0 * h * h + 1e-6;
        const double rho = m * st.drho;
        for (Chart c : {Chart::Z, Chart::W}) {
            ChartGrid& cg = g.grid(c);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const cplx p = node(i, j);
                    const std::size_t k = std::size_t(j) * n + i;
                    cg.values[k] =
                        st.pshpart(c, p, rho) - std::log1p(std::norm(p)) + st.v[int(c)][m][k];
                }
        }
        if (m == 0) {
            const int mid = (n - 1) / 2;
            g.z.mask[std::size_t(mid) * n + mid] = 1;  // the pole itself
            g.atom_at_origin = 1.0;
        }
        out.u.push_back(std::move(g));
    }
    return out;
}

OracleComparison compare_with_legendre(const PerronOracle& oracle, const EnvelopeFamily& fam,
                                       double exclude_radius) {
    OracleComparison cmp;
    cmp.exclude_radius = exclude_radius;
    const int n = oracle.n;
    const double R = oracle.R;
    const double h = 2.0 * R / (n - 1);
    for (std::size_t m = 1; m < oracle.rho.size(); ++m) {
        const double rho = oracle.rho[m];
        const double s = -2.0 * std::log(rho);
        double worst = 0.0;
        for (Chart c : {Chart::Z, Chart::W}) {
            const ChartGrid& g = oracle.u[m].grid(c);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const cplx p = cplx(-R + i * h, -R + j * h);
                    if (!owns(c, p) || g.masked(i, j)) continue;
                    // the envelope carries a log spike of strength t*(s)
                    // along the whole axis zeta = 0; circle averages cannot
                    // resolve it below the grid scale, so exclude a cylinder
                    // around the axis rather than a ball at the corner
                    if (c == Chart::Z && std::abs(p) < exclude_radius) continue;
                    double ref;
                    if (!legendre_eval(fam, {c, p}, s, ref)) continue;
                    worst = std::max(worst, std::abs(g.at(i, j) - ref));
                }
        }
        cmp.s_values.push_back(s);
        cmp.per_level.push_back(worst);
        cmp.max_diff = std::max(cmp.max_diff, worst);
    }
    return cmp;
}

}  // namespace hmae
