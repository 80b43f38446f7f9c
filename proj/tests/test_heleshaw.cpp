#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "hmae/heleshaw.hpp"

using namespace hmae;

namespace {

const HeleShawFamily& hs() {
    static const HeleShawFamily f = build_family(fixtures::family(), fixtures::phi());
    return f;
}

}  // namespace

TEST_CASE("domain masses track t") {
    // build_family already folds in the contact-boundary correction
    const HeleShawFamily& f = hs();
    REQUIRE(f.t_grid.size() == f.masses.size());
    for (std::size_t m = 0; m < f.t_grid.size(); ++m)
        CHECK(f.masses[m] == doctest::Approx(f.t_grid[m]).epsilon(0.08));
}

TEST_CASE("domains nest in t") {
    const NestingReport rep = nesting_check(hs());
    CHECK(rep.ok);
    CHECK(rep.worst_violation_cells <= 1.0);
}

TEST_CASE("interior domains are simply connected and miss infinity") {
    const HeleShawFamily& f = hs();
    for (std::size_t m = 1; m + 1 < f.t_grid.size(); ++m) {
        if (!f.components[m].applicable) continue;
        CHECK(f.components[m].domain_components == 1);
        CHECK(f.components[m].simply_connected);
        CHECK(f.components[m].contained_in_cz);
    }
}

TEST_CASE("complement of the final domain shrinks to the w-chart segment") {
    const HeleShawFamily& f = hs();
    const double h = 2.0 * fixtures::kR / (fixtures::kN - 1);
    CHECK(omega1_complement_vs_segment(f.domains.back(), fixtures::kN, fixtures::kR) <=
          2.0 * h);
}

TEST_CASE("marching squares recovers a circle") {
    const int n = 65;
    const double R = 4.0;
    ChartGrid g(Chart::Z, R, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) g.at(i, j) = std::abs(g.node(i, j));
    const std::vector<Polyline> cs = marching_squares(g, 2.0);
    std::size_t pts = 0;
    for (const Polyline& pl : cs)
        for (const cplx& p : pl.pts) {
            ++pts;
            CHECK(std::abs(p) == doctest::Approx(2.0).epsilon(2e-2));
        }
    CHECK(pts > 50);
}
