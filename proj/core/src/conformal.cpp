#include "hmae/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hmae {

cplx riemann_map(const cplx& tau) {
    if (std::abs(tau) >= 1.0)
        throw std::domain_error("riemann_map: |tau| must be < 1");
    return 2.0 * tau / (1.0 + tau * tau);
}

BiholReport verify_biholomorphism(int n_samples) {
    BiholReport rep;
    std::vector<cplx> images;
    images.reserve(std::size_t(n_samples) * n_samples);
    const double step = 2.0 / n_samples;
    for (int a = 0; a < n_samples; ++a)
        for (int b = 0; b < n_samples; ++b) {
            const cplx tau(-1.0 + (a + 0.5) * step, -1.0 + (b + 0.5) * step);
            if (std::abs(tau) >= 0.995) continue;
            const cplx z = riemann_map(tau);
            images.push_back(z);
            if (std::abs(z.real()) >= 1.0 && std::abs(z.imag()) <= 1e-9)
                rep.slits_avoided = false;
        }
    std::sort(images.begin(), images.end(), [](const cplx& a, const cplx& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (std::size_t k = 0; k + 1 < images.size(); ++k)
        if (std::abs(images[k] - images[k + 1]) < 1e-12) ++rep.collisions;

    // winding of f on |tau| = 0.9 about interior sample points
    const int m = 2048;
    std::vector<cplx> loop(m);
    for (int k = 0; k < m; ++k) {
        const double th = 2.0 * std::numbers::pi * k / m;
        loop[k] = riemann_map(0.9 * cplx(std::cos(th), std::sin(th)));
    }
    for (const cplx& p : {cplx(0.0, 0.0), riemann_map(cplx(0.3, 0.2)), riemann_map(cplx(-0.5, 0.4))}) {
        double angle = 0.0;
        for (int k = 0; k < m; ++k) {
            const cplx a = loop[k] - p, b = loop[(k + 1) % m] - p;
            angle += std::arg(b / a);
        }
        const long wind = std::lround(angle / (2.0 * std::numbers::pi));
        if (wind != 1) rep.winding_ok = false;
    }
    return rep;
}

DiscImage::DiscImage(double r, int boundary_samples) : r_(r) {
    if (!(r > 0.0 && r < 1.0))
        throw std::domain_error("DiscImage: radius must be in (0,1)");
    boundary_.resize(boundary_samples);
    double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
    for (int k = 0; k < boundary_samples; ++k) {
        const double th = 2.0 * std::numbers::pi * k / boundary_samples;
        boundary_[k] = riemann_map(r * cplx(std::cos(th), std::sin(th)));
        xmin = std::min(xmin, boundary_[k].real());
        xmax = std::max(xmax, boundary_[k].real());
        ymin = std::min(ymin, boundary_[k].imag());
        ymax = std::max(ymax, boundary_[k].imag());
    }
    // bins sized to the typical query margin scale
    bin_size_ = std::max((xmax - xmin), (ymax - ymin)) / 64.0 + 1e-12;
    x0_ = xmin - bin_size_;
    y0_ = ymin - bin_size_;
    bx_ = int((xmax - x0_) / bin_size_) + 2;
    by_ = int((ymax - y0_) / bin_size_) + 2;
    bins_.assign(std::size_t(bx_) * by_, {});
    for (int k = 0; k < boundary_samples; ++k) {
        const cplx a = boundary_[k], b = boundary_[(k + 1) % boundary_samples];
        const int ia0 = int((std::min(a.real(), b.real()) - x0_) / bin_size_);
        const int ia1 = int((std::max(a.real(), b.real()) - x0_) / bin_size_);
        const int ja0 = int((std::min(a.imag(), b.imag()) - y0_) / bin_size_);
        const int ja1 = int((std::max(a.imag(), b.imag()) - y0_) / bin_size_);
        for (int j = ja0; j <= ja1; ++j)
            for (int i = ia0; i <= ia1; ++i)
                if (i >= 0 && j >= 0 && i < bx_ && j < by_)
                    bins_[std::size_t(j) * bx_ + i].push_back(k);
    }
}

// Stable inverse branch of the map: tau = z / (1 + sqrt(1 - z^2)), the
// root of z*tau^2 - 2*tau + z = 0 inside the disc.
cplx riemann_map_inverse(const cplx& z) {
    if (z == cplx(0.0, 0.0)) return {0.0, 0.0};
    return z / (1.0 + std::sqrt(cplx(1.0, 0.0) - z * z));
}

bool DiscImage::contains(const cplx& p) const {
    return std::abs(riemann_map_inverse(p)) < r_;
}

// crossing-number parity against the sampled polyline; used to
// cross-check the inverse-branch containment test
bool DiscImage::contains_by_parity(const cplx& p) const {
    const int m = int(boundary_.size());
    bool inside = false;
    for (int k = 0; k < m; ++k) {
        const cplx a = boundary_[k], b = boundary_[(k + 1) % m];
        if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
            const double x = a.real() + (p.imag() - a.imag()) / (b.imag() - a.imag()) *
                                            (b.real() - a.real());
            if (x > p.real()) inside = !inside;
        }
    }
    return inside;
}

static double seg_distance(const cplx& p, const cplx& a, const cplx& b) {
    const cplx ab = b - a;
    const double l2 = std::norm(ab);
    double t = l2 == 0.0 ? 0.0 : ((p - a).real() * ab.real() + (p - a).imag() * ab.imag()) / l2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

bool DiscImage::clear_of_boundary(const cplx& p, double margin) const {
    const int reach = int(margin / bin_size_) + 1;
    const int ci = int((p.real() - x0_) / bin_size_);
    const int cj = int((p.imag() - y0_) / bin_size_);
    if (ci < -reach || cj < -reach || ci >= bx_ + reach || cj >= by_ + reach) return true;
    const int m = int(boundary_.size());
    for (int j = cj - reach; j <= cj + reach; ++j)
        for (int i = ci - reach; i <= ci + reach; ++i) {
            if (i < 0 || j < 0 || i >= bx_ || j >= by_) continue;
            for (int k : bins_[std::size_t(j) * bx_ + i])
                if (seg_distance(p, boundary_[k], boundary_[(k + 1) % m]) < margin)
                    return false;
        }
    return true;
}

double DiscImage::boundary_distance(const cplx& p) const {
    const int m = int(boundary_.size());
    double best = 1e300;
    for (int k = 0; k < m; ++k)
        best = std::min(best, seg_distance(p, boundary_[k], boundary_[(k + 1) % m]));
    return best;
}

bool in_predicted_S(const DiscImage& disc, const cplx& zt, double margin) {
    return !disc.contains(zt) && disc.clear_of_boundary(zt, margin);
}

std::vector<std::uint8_t> predicted_S_chart(const DiscImage& disc, const ChartGrid& grid,
                                            Chart chart, double margin_cells) {
    const int n = grid.n;
    const double margin = margin_cells * grid.spacing();
    const double r = disc.radius();
    std::vector<std::uint8_t> out(grid.size(), 0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const cplx c = grid.node(i, j);
            cplx zt;
            if (chart == Chart::Z) {
                zt = r * c;
            } else {
                if (c == cplx(0.0, 0.0)) {  // z = infinity, never in closure(A_tau)
                    out[grid.idx(i, j)] = 1;
                    continue;
                }
                zt = r / c;
            }
            if (in_predicted_S(disc, zt, margin)) out[grid.idx(i, j)] = 1;
        }
    return out;
}

GlobalMask predicted_S_mask(double tau_radius, int n, double R, double margin_cells,
                            int boundary_samples) {
    DiscImage disc(tau_radius, boundary_samples);
    GlobalMask m(n);
    ChartGrid gz(Chart::Z, R, n), gw(Chart::W, R, n);
    m.z = predicted_S_chart(disc, gz, Chart::Z, margin_cells);
    m.w = predicted_S_chart(disc, gw, Chart::W, margin_cells);
    return m;
}

}  // namespace hmae
