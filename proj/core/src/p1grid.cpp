#include "hmae/p1grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace hmae {

ChartPoint transition(const ChartPoint& p) {
    if (p.coord == cplx(0.0, 0.0))
        throw std::domain_error("transition: point is the other chart's infinity");
    return {other(p.chart), 1.0 / p.coord};
}

double fs_density(const ChartPoint& p) {
    const double r2 = std::norm(p.coord);
    const double d = 1.0 + r2;
    return 1.0 / (std::numbers::pi * d * d);
}

ChartGrid::ChartGrid(Chart c, double R, int nodes)
    : chart(c), half_width(R), n(nodes),
      values(std::size_t(nodes) * nodes, 0.0),
      mask(std::size_t(nodes) * nodes, 0) {
    if (nodes < 3 || nodes % 2 == 0)
        throw std::invalid_argument("ChartGrid: node count must be odd and >= 3");
    if (R < 2.0)
        throw std::invalid_argument("ChartGrid: half_width must be >= 2 so charts overlap");
}

bool ChartGrid::interp(const cplx& c, double& out) const {
    const double h = spacing();
    const double x = (c.real() + half_width) / h;
    const double y = (c.imag() + half_width) / h;
    if (x < 0.0 || y < 0.0 || x > n - 1 || y > n - 1) return false;
    int i0 = std::min(int(x), n - 2);
    int j0 = std::min(int(y), n - 2);
    const double fx = x - i0, fy = y - j0;
    const int k = idx(i0, j0);
    if (mask[k] || mask[k + 1] || mask[k + n] || mask[k + n + 1]) return false;
    out = (1 - fx) * (1 - fy) * values[k] + fx * (1 - fy) * values[k + 1] +
          (1 - fx) * fy * values[k + n] + fx * fy * values[k + n + 1];
    return true;
}

GlobalFunction::GlobalFunction(int n, double R)
    : z(Chart::Z, R, n), w(Chart::W, R, n) {
    consistency_tol = 10.0 * z.spacing() * z.spacing();
}

double GlobalFunction::max_consistency_gap() const {
    double gap = 0.0;
    for (Chart c : {Chart::Z, Chart::W}) {
        const ChartGrid& g = grid(c);
        const ChartGrid& og = grid(other(c));
        const double R = g.half_width;
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) {
                if (g.masked(i, j)) continue;
                const cplx p = g.node(i, j);
                const double r = std::abs(p);
                if (r < 1.0 / R || r > R) continue;
                double v;
                if (!og.interp(1.0 / p, v)) continue;
                gap = std::max(gap, std::abs(v - g.at(i, j)));
            }
    }
    return gap;
}

bool GlobalFunction::value_at(const ChartPoint& p, double& out) const {
    cplx c = p.coord;
    Chart ch = p.chart;
    if (std::abs(c) > 1.0 && c != cplx(0.0, 0.0)) {
        c = 1.0 / c;
        ch = other(ch);
    }
    return grid(ch).interp(c, out);
}

std::size_t GlobalMask::count() const {
    std::size_t k = 0;
    for (auto b : z) k += b;
    for (auto b : w) k += b;
    return k;
}

CurrentDensity ddc_density(const GlobalFunction& u) {
    CurrentDensity out;
    out.atom_mass_at_origin = u.atom_at_origin;
    for (Chart c : {Chart::Z, Chart::W}) {
        const ChartGrid& g = u.grid(c);
        ChartGrid d(c, g.half_width, g.n);
        const double h = g.spacing();
        const double inv = 1.0 / (4.0 * std::numbers::pi * h * h);
        const int n = g.n;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int k = d.idx(i, j);
                if (i == 0 || j == 0 || i == n - 1 || j == n - 1 ||
                    g.mask[k] || g.mask[k - 1] || g.mask[k + 1] ||
                    g.mask[k - n] || g.mask[k + n]) {
                    d.mask[k] = 1;
                    d.values[k] = std::nan("");
                    continue;
                }
                const double lap = g.values[k - 1] + g.values[k + 1] +
                                   g.values[k - n] + g.values[k + n] - 4.0 * g.values[k];
                d.values[k] = fs_density({c, g.node(i, j)}) + inv * lap;
            }
        (c == Chart::Z ? out.z : out.w) = std::move(d);
    }
    return out;
}

bool density_at(const CurrentDensity& c, const ChartPoint& p, Chart target, double& out) {
    cplx q = p.coord;
    Chart src = p.chart;
    if (std::abs(q) > 1.0) {
        q = 1.0 / q;
        src = other(src);
    }
    double v;
    if (!c.grid(src).interp(q, v)) return false;
    if (src == target) {
        out = v;
        return true;
    }
    // density transforms with |d(src coord)/d(target coord)|^2, computed
    // via the target-chart coordinate of the point
    // target coord of the point: p given in p.chart; express in target.
    cplx tc = (p.chart == target) ? p.coord : 1.0 / p.coord;
    // src = other(target): src coord = 1/tc, d(src)/d(target) = -1/tc^2.
    const double jac = 1.0 / std::norm(tc * tc);
    out = v * jac;
    return true;
}

bool owns(Chart c, const cplx& coord) {
    const double r = std::abs(coord);
    return c == Chart::Z ? r <= 1.0 : r < 1.0;
}

bool mask_consistent(const GlobalMask& m, int n, double R, std::string* err) {
    const double h = 2.0 * R / (n - 1);
    auto node = [&](int i, int j) { return cplx(-R + i * h, -R + j * h); };
    auto nearest = [&](const cplx& c, int& i, int& j) {
        i = int(std::lround((c.real() + R) / h));
        j = int(std::lround((c.imag() + R) / h));
        return i >= 0 && j >= 0 && i < n && j < n;
    };
    for (Chart c : {Chart::Z, Chart::W}) {
        const auto& a = m.chart(c);
        const auto& b = m.chart(other(c));
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const cplx p = node(i, j);
                const double r = std::abs(p);
                if (r < 0.5 || r > 2.0) continue;
                int ii, jj;
                if (!nearest(1.0 / p, ii, jj)) continue;
                const std::uint8_t v = a[std::size_t(j) * n + i];
                if (b[std::size_t(jj) * n + ii] == v) continue;
                // one-cell grace along the mask boundary
                bool ok = false;
                for (int dj = -1; dj <= 1 && !ok; ++dj)
                    for (int di = -1; di <= 1 && !ok; ++di) {
                        int x = ii + di, y = jj + dj;
                        if (x < 0 || y < 0 || x >= n || y >= n) continue;
                        if (b[std::size_t(y) * n + x] == v) ok = true;
                    }
                if (!ok) {
                    if (err)
                        *err = "inconsistent mask at chart " +
                               std::string(c == Chart::Z ? "Z" : "W") + " node (" +
                               std::to_string(i) + "," + std::to_string(j) + ")";
                    return false;
                }
            }
    }
    return true;
}

void resolve_overlap(GlobalMask& m, int n, double R) {
    const double h = 2.0 * R / (n - 1);
    for (Chart c : {Chart::Z, Chart::W}) {
        auto& a = m.chart(c);
        const auto& b = m.chart(other(c));
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const cplx p = cplx(-R + i * h, -R + j * h);
                if (owns(c, p) || p == cplx(0.0, 0.0)) continue;
                const cplx q = 1.0 / p;
                int ii = int(std::lround((q.real() + R) / h));
                int jj = int(std::lround((q.imag() + R) / h));
                if (ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
                a[std::size_t(j) * n + i] = b[std::size_t(jj) * n + ii];
            }
    }
}

double integrate(const CurrentDensity& c, const GlobalMask& region) {
    const int n = c.z.n;
    std::string err;
    if (!mask_consistent(region, n, c.z.half_width, &err))
        throw std::runtime_error("integrate: " + err);
    double total = 0.0;
    for (Chart ch : {Chart::Z, Chart::W}) {
        const ChartGrid& g = c.grid(ch);
        const auto& msk = region.chart(ch);
        const double cell = g.spacing() * g.spacing();
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int k = g.idx(i, j);
                if (!msk[k] || g.mask[k]) continue;
                if (!owns(ch, g.node(i, j))) continue;
                total += g.values[k] * cell;
            }
    }
    // atom sits at the z-chart origin, owned by Z
    const int mid = (n - 1) / 2;
    if (region.z[std::size_t(mid) * n + mid]) total += c.atom_mass_at_origin;
    return total;
}

double integrate_all(const CurrentDensity& c) {
    return integrate(c, GlobalMask(c.z.n, true));
}

// --- IO -------------------------------------------------------------------

static constexpr char kMagic[8] = {'P', '1', 'G', 'R', 'I', 'D', 'v', '1'};

void dump_grid(const ChartGrid& g, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("dump_grid: cannot open " + path);
    f.write(kMagic, 8);
    const char chart = g.chart == Chart::Z ? 'Z' : 'W';
    f.write(&chart, 1);
    f.write(reinterpret_cast<const char*>(&g.half_width), 8);
    std::int64_t n = g.n;
    f.write(reinterpret_cast<const char*>(&n), 8);
    std::vector<std::int64_t> masked;
    for (std::size_t k = 0; k < g.mask.size(); ++k)
        if (g.mask[k]) masked.push_back(std::int64_t(k));
    std::int64_t mc = std::int64_t(masked.size());
    f.write(reinterpret_cast<const char*>(&mc), 8);
    f.write(reinterpret_cast<const char*>(g.values.data()),
            std::streamsize(g.values.size() * 8));
    f.write(reinterpret_cast<const char*>(masked.data()), std::streamsize(masked.size() * 8));
    if (!f) throw std::runtime_error("dump_grid: write failed for " + path);
}

ChartGrid load_grid(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_grid: cannot open " + path);
    char magic[8];
    f.read(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("load_grid: bad magic in " + path);
    char chart;
    double R;
    std::int64_t n, mc;
    f.read(&chart, 1);
    f.read(reinterpret_cast<char*>(&R), 8);
    f.read(reinterpret_cast<char*>(&n), 8);
    f.read(reinterpret_cast<char*>(&mc), 8);
    ChartGrid g(chart == 'Z' ? Chart::Z : Chart::W, R, int(n));
    f.read(reinterpret_cast<char*>(g.values.data()), std::streamsize(g.values.size() * 8));
    std::vector<std::int64_t> masked_idx(static_cast<std::size_t>(mc));
    f.read(reinterpret_cast<char*>(masked_idx.data()),
           std::streamsize(masked_idx.size() * 8));
    if (!f) throw std::runtime_error("load_grid: truncated file " + path);
    for (auto k : masked_idx) g.mask[std::size_t(k)] = 1;
    return g;
}

void export_csv(const ChartGrid& g, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("export_csv: cannot open " + path);
    f << "i,j,re,im,value\n";
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const cplx p = g.node(i, j);
            char buf[128];
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g\n", i, j, p.real(),
                          p.imag(), g.masked(i, j) ? std::nan("") : g.at(i, j));
            f << buf;
        }
}

}  // namespace hmae
