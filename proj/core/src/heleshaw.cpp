#include "hmae/heleshaw.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace hmae {

GlobalMask extract_domain(const SingularEnvelope& e, const GlobalFunction& phi) {
    const int n = phi.z.n;
    GlobalMask m(n);
    for (Chart c : {Chart::Z, Chart::W}) {
        const auto& contact = e.contact.chart(c);
        auto& out = m.chart(c);
        for (std::size_t k = 0; k < contact.size(); ++k) out[k] = contact[k] ? 0 : 1;
    }
    // drop isolated single-node islands
    for (Chart c : {Chart::Z, Chart::W}) {
        auto& out = m.chart(c);
        auto keep = out;
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                const int k = j * n + i;
                if (!out[k]) continue;
                if (!out[k - 1] && !out[k + 1] && !out[k - n] && !out[k + n]) keep[k] = 0;
            }
        out = std::move(keep);
    }
    resolve_overlap(m, n, phi.z.half_width);
    return m;
}

double domain_mass(const GlobalMask& mask, const CurrentDensity& phi_density) {
    return integrate(phi_density, mask);
}

double contact_boundary_correction(const SingularEnvelope& e, const GlobalFunction& phi) {
    const int n = phi.z.n;
    double sum = 0.0;
    for (Chart c : {Chart::Z, Chart::W}) {
        const ChartGrid& pg = phi.grid(c);
        const ChartGrid& sg = e.psi.grid(c);
        const auto& contact = e.contact.chart(c);
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                const int k = j * n + i;
                if (contact[k] || sg.mask[k] || !owns(c, pg.node(i, j))) continue;
                const double d = pg.values[k] - sg.values[k];
                if (!std::isfinite(d)) continue;
                const int nb[4] = {k - 1, k + 1, k - n, k + n};
                for (int q = 0; q < 4; ++q)
                    if (contact[nb[q]]) sum += d;
            }
    }
    return sum / (4.0 * std::numbers::pi);
}

namespace {

// glued lattice of owned nodes; ids: chart * n^2 + linear index
struct GluedGraph {
    int n;
    double R, h;
    const GlobalMask* mask;

    bool owned(Chart c, int i, int j) const {
        return owns(c, cplx(-R + i * h, -R + j * h));
    }
    bool in_mask(Chart c, int k) const { return mask->chart(c)[k] != 0; }

    template <typename F>
    void neighbours(Chart c, int i, int j, F&& f) const {
        static const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
            const int ii = i + di[d], jj = j + dj[d];
            if (ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
            if (owned(c, ii, jj)) {
                f(c, ii, jj);
            } else {
                const cplx p = cplx(-R + ii * h, -R + jj * h);
                if (p == cplx(0.0, 0.0)) continue;
                const cplx q = 1.0 / p;
                const int oi = int(std::lround((q.real() + R) / h));
                const int oj = int(std::lround((q.imag() + R) / h));
                if (oi < 0 || oj < 0 || oi >= n || oj >= n) continue;
                if (owned(other(c), oi, oj)) f(other(c), oi, oj);
            }
        }
    }
};

int count_components(const GluedGraph& g, bool in_mask_value) {
    const int n = g.n;
    std::vector<std::uint8_t> seen[2] = {
        std::vector<std::uint8_t>(std::size_t(n) * n, 0),
        std::vector<std::uint8_t>(std::size_t(n) * n, 0)};
    int comps = 0;
    for (Chart c : {Chart::Z, Chart::W})
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int k = j * n + i;
                if (seen[int(c)][k] || !g.owned(c, i, j)) continue;
                if (g.in_mask(c, k) != in_mask_value) continue;
                ++comps;
                std::queue<std::tuple<Chart, int, int>> bfs;
                bfs.emplace(c, i, j);
                seen[int(c)][k] = 1;
                while (!bfs.empty()) {
                    auto [cc, ci, cj] = bfs.front();
                    bfs.pop();
                    g.neighbours(cc, ci, cj, [&](Chart nc, int ni, int nj) {
                        const int nk = nj * n + ni;
                        if (seen[int(nc)][nk]) return;
                        if (g.in_mask(nc, nk) != in_mask_value) return;
                        seen[int(nc)][nk] = 1;
                        bfs.emplace(nc, ni, nj);
                    });
                }
            }
    return comps;
}

}  // namespace

TopologyInfo topology(const GlobalMask& mask, int n, double R) {
    if (n < 9) throw std::runtime_error("topology: resolution too small");
    GluedGraph g{n, R, 2.0 * R / (n - 1), &mask};
    TopologyInfo info;
    info.domain_components = count_components(g, true);
    info.complement_components = count_components(g, false);
    const int mid = (n - 1) / 2;
    info.contained_in_cz = mask.w[std::size_t(mid) * n + mid] == 0;
    info.applicable = info.complement_components > 0;
    info.simply_connected = info.applicable && info.contained_in_cz &&
                            info.domain_components == 1 && info.complement_components == 1;
    return info;
}

HeleShawFamily build_family(const EnvelopeFamily& envelopes, const GlobalFunction& phi) {
    HeleShawFamily f;
    const CurrentDensity dens = ddc_density(phi);
    for (std::size_t a = 0; a < envelopes.envs.size(); ++a) {
        const SingularEnvelope& e = envelopes.envs[a];
        if (e.t <= 0.0) continue;  // Omega_t defined for t in (0,1]
        f.t_grid.push_back(e.t);
        f.domains.push_back(extract_domain(e, phi));
        f.masses.push_back(domain_mass(f.domains.back(), dens) +
                           contact_boundary_correction(e, phi));
        f.components.push_back(topology(f.domains.back(), phi.z.n, phi.z.half_width));
    }
    return f;
}

NestingReport nesting_check(const HeleShawFamily& f) {
    NestingReport rep;
    if (f.domains.empty()) return rep;
    const int n = int(std::sqrt(double(f.domains[0].z.size())) + 0.5);
    for (std::size_t a = 0; a + 1 < f.domains.size(); ++a) {
        const GlobalMask& lo = f.domains[a];
        const GlobalMask& hi = f.domains[a + 1];
        for (Chart c : {Chart::Z, Chart::W}) {
            const auto& ml = lo.chart(c);
            const auto& mh = hi.chart(c);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const int k = j * n + i;
                    if (!ml[k] || mh[k]) continue;
                    // non-nested node: distance (cells) to the larger mask
                    double best = 1e9;
                    for (int dj = -2; dj <= 2; ++dj)
                        for (int di = -2; di <= 2; ++di) {
                            const int ii = i + di, jj = j + dj;
                            if (ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
                            if (mh[std::size_t(jj) * n + ii])
                                best = std::min(best, std::hypot(double(di), double(dj)));
                        }
                    rep.worst_violation_cells = std::max(rep.worst_violation_cells, best);
                }
        }
    }
    rep.ok = rep.worst_violation_cells <= 1.0 + 1e-9;
    return rep;
}

double omega1_complement_vs_segment(const GlobalMask& omega1, int n, double R) {
    const double h = 2.0 * R / (n - 1);
    auto seg_dist = [](const cplx& w) {
        const double dx = std::max(0.0, std::abs(w.real()) - 1.0);
        return std::hypot(dx, w.imag());
    };
    std::vector<cplx> complement_w;
    for (Chart c : {Chart::Z, Chart::W}) {
        const auto& m = omega1.chart(c);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const cplx p = cplx(-R + i * h, -R + j * h);
                if (!owns(c, p) || m[std::size_t(j) * n + i]) continue;
                if (c == Chart::W)
                    complement_w.push_back(p);
                else if (p != cplx(0.0, 0.0))
                    complement_w.push_back(1.0 / p);
            }
    }
    double haus = 0.0;
    for (const cplx& w : complement_w) haus = std::max(haus, seg_dist(w));
    for (double x = -1.0; x <= 1.0; x += h / 2.0) {
        double best = 1e9;
        for (const cplx& w : complement_w) best = std::min(best, std::abs(w - cplx(x, 0.0)));
        haus = std::max(haus, best);
    }
    return haus;
}

std::vector<Polyline> marching_squares(const ChartGrid& g, double level) {
    std::vector<Polyline> out;
    const int n = g.n;
    auto val = [&](int i, int j) { return g.at(i, j) - level; };
    auto lerp = [&](int i0, int j0, int i1, int j1) {
        const double a = val(i0, j0), b = val(i1, j1);
        const double t = (a == b) ? 0.5 : a / (a - b);
        return g.node(i0, j0) + t * (g.node(i1, j1) - g.node(i0, j0));
    };
    for (int j = 0; j < n - 1; ++j)
        for (int i = 0; i < n - 1; ++i) {
            if (g.masked(i, j) || g.masked(i + 1, j) || g.masked(i, j + 1) ||
                g.masked(i + 1, j + 1))
                continue;
            int code = 0;
            if (val(i, j) > 0) code |= 1;
            if (val(i + 1, j) > 0) code |= 2;
            if (val(i + 1, j + 1) > 0) code |= 4;
            if (val(i, j + 1) > 0) code |= 8;
            if (code == 0 || code == 15) continue;
            // edge crossings: bottom, right, top, left
            cplx eb = lerp(i, j, i + 1, j);
            cplx er = lerp(i + 1, j, i + 1, j + 1);
            cplx et = lerp(i, j + 1, i + 1, j + 1);
            cplx el = lerp(i, j, i, j + 1);
            auto seg = [&](cplx a, cplx b) { out.push_back({{a, b}}); };
            switch (code) {
                case 1: case 14: seg(el, eb); break;
                case 2: case 13: seg(eb, er); break;
                case 3: case 12: seg(el, er); break;
                case 4: case 11: seg(er, et); break;
                case 6: case 9:  seg(eb, et); break;
                case 7: case 8:  seg(el, et); break;
                case 5: case 10: {
                    const double center =
                        0.25 * (val(i, j) + val(i + 1, j) + val(i, j + 1) + val(i + 1, j + 1));
                    const bool same = (center > 0) == (code == 5);
                    if (same) { seg(el, et); seg(eb, er); }
                    else      { seg(el, eb); seg(er, et); }
                    break;
                }
            }
        }
    return out;
}

}  // namespace hmae
