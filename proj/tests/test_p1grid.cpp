#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "hmae/p1grid.hpp"

using namespace hmae;

namespace {

// smooth global test function: 1/(1+|z|^2) in chart Z, |w|^2/(1+|w|^2)
// in chart W (equal under z = 1/w)
GlobalFunction smooth_global(int n, double R) {
    GlobalFunction u(n, R);
    u.consistency_tol = 1e-2;  // the gap is measured through bilinear
                               // interpolation, so it is O(h^2), not zero
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double z2 = std::norm(u.z.node(i, j));
            const double w2 = std::norm(u.w.node(i, j));
            u.z.at(i, j) = 1.0 / (1.0 + z2);
            u.w.at(i, j) = w2 / (1.0 + w2);
        }
    return u;
}

}  // namespace

TEST_CASE("chart transition is an involution away from the origin") {
    const ChartPoint p{Chart::Z, {0.5, -0.25}};
    const ChartPoint q = transition(p);
    CHECK(q.chart == Chart::W);
    const ChartPoint back = transition(q);
    CHECK(std::abs(back.coord - p.coord) < 1e-15);
    CHECK_THROWS_AS(transition({Chart::Z, {0.0, 0.0}}), std::domain_error);
}

TEST_CASE("fs density matches the closed form and integrates to one") {
    CHECK(fs_density({Chart::Z, {0.0, 0.0}}) == doctest::Approx(1.0 / std::numbers::pi));
    CHECK(fs_density({Chart::W, {1.0, 0.0}}) ==
          doctest::Approx(1.0 / (4.0 * std::numbers::pi)));

    const GlobalFunction zero(65, 4.0);
    const CurrentDensity d = ddc_density(zero);
    CHECK(integrate_all(d) == doctest::Approx(1.0).epsilon(2e-2));
}

TEST_CASE("ddc of a smooth global function does not change the total mass") {
    const GlobalFunction u = smooth_global(65, 4.0);
    CHECK(u.max_consistency_gap() < 1e-2);
    const CurrentDensity d = ddc_density(u);
    CHECK(integrate_all(d) == doctest::Approx(1.0).epsilon(2e-2));
}

TEST_CASE("discrete ddc matches the analytic laplacian of |z|^2") {
    // u = x^2 + y^2 has exact 5-point laplacian 4, so the density gains
    // 1/pi relative to fs on chart Z; probe a node well inside ownership
    const int n = 33;
    const double R = 4.0;
    GlobalFunction u(n, R);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            u.z.at(i, j) = std::norm(u.z.node(i, j));
            u.w.at(i, j) = 0.0;  // inconsistent on purpose; only chart Z probed
        }
    u.consistency_tol = 1e9;
    const CurrentDensity d = ddc_density(u);
    const int mid = (n - 1) / 2;
    const double expected =
        fs_density({Chart::Z, {0.0, 0.0}}) + 4.0 / (4.0 * std::numbers::pi);
    CHECK(d.z.at(mid, mid) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ownership covers the sphere exactly once on the overlap") {
    CHECK(owns(Chart::Z, {1.0, 0.0}));
    CHECK_FALSE(owns(Chart::W, {1.0, 0.0}));
    CHECK(owns(Chart::Z, {0.3, 0.4}));
    CHECK_FALSE(owns(Chart::Z, {0.8, 0.8}));
    CHECK(owns(Chart::W, {0.5, -0.5}));
    // every sample point is owned by exactly one chart after transition
    for (double x = -0.95; x < 1.0; x += 0.13)
        for (double y = -0.95; y < 1.0; y += 0.17) {
            const cplx p(x, y);
            if (p == cplx(0.0, 0.0)) continue;
            const cplx q = 1.0 / p;
            CHECK(int(owns(Chart::Z, p)) + int(owns(Chart::W, p)) +
                      int(owns(Chart::Z, q)) + int(owns(Chart::W, q)) ==
                  2);
        }
}

TEST_CASE("bilinear interpolation is exact on bilinear data") {
    const int n = 17;
    ChartGrid g(Chart::Z, 4.0, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const cplx p = g.node(i, j);
            g.at(i, j) = 2.0 + 0.5 * p.real() - 1.25 * p.imag() +
                         0.75 * p.real() * p.imag();
        }
    double out = 0.0;
    REQUIRE(g.interp({0.37, -1.21}, out));
    CHECK(out == doctest::Approx(2.0 + 0.5 * 0.37 - 1.25 * -1.21 +
                                 0.75 * 0.37 * -1.21).epsilon(1e-13));
    CHECK_FALSE(g.interp({5.0, 0.0}, out));
}

TEST_CASE("masked nodes block interpolation and integration skips atoms correctly") {
    const int n = 17;
    ChartGrid g(Chart::Z, 4.0, n);
    const int mid = (n - 1) / 2;
    g.mask[g.idx(mid, mid)] = 1;
    double out;
    CHECK_FALSE(g.interp({0.1, 0.1}, out));
    CHECK(g.interp({2.0, 2.0}, out));
}

TEST_CASE("grid dump round-trips bit-exactly") {
    const int n = 21;
    ChartGrid g(Chart::W, 4.0, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) g.at(i, j) = std::sin(i * 0.7 + j * 1.3) * 1e-7;
    g.mask[5] = 1;
    g.mask[n * n - 3] = 1;
    const std::string path =
        (std::filesystem::temp_directory_path() / "roundtrip_test.grid").string();
    dump_grid(g, path);
    const ChartGrid back = load_grid(path);
    std::remove(path.c_str());
    REQUIRE(back.n == g.n);
    CHECK(back.chart == g.chart);
    CHECK(back.half_width == g.half_width);
    CHECK(back.values == g.values);
    CHECK(back.mask == g.mask);
}

TEST_CASE("mask consistency accepts resolved masks and flags chart conflicts") {
    const int n = 33;
    const double R = 4.0;
    GlobalMask m(n);
    ChartGrid ref(Chart::Z, R, n);
    // a disc |zeta| < 1.5 marked in both charts consistently
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const cplx p = ref.node(i, j);
            m.z[ref.idx(i, j)] = std::abs(p) < 1.5 ? 1 : 0;
            m.w[ref.idx(i, j)] = (p != cplx(0.0, 0.0) && std::abs(1.0 / p) < 1.5) ? 1 : 0;
        }
    resolve_overlap(m, n, R);
    CHECK(mask_consistent(m, n, R));
}
