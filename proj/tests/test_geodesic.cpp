#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "hmae/geodesic.hpp"

using namespace hmae;

namespace {

const GeodesicSolution& sol() {
    static const GeodesicSolution s =
        legendre_build(fixtures::family(), make_s_grid(9, 4.0, 4));
    return s;
}

}  // namespace

TEST_CASE("s grid: sorted, starts at zero, clustered points halve") {
    const std::vector<double> s = make_s_grid(9, 4.0, 4);
    REQUIRE(s.size() == 13);
    CHECK(s.front() == 0.0);
    CHECK(s.back() == 4.0);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(s[1] == doctest::Approx(0.5 / 16.0));
    CHECK(s[2] == doctest::Approx(0.5 / 8.0));
}

TEST_CASE("slice at s = 0 is phi") {
    const GlobalFunction sl = legendre_slice(fixtures::family(), 0.0);
    const GlobalFunction& phi = fixtures::phi();
    for (Chart c : {Chart::Z, Chart::W}) {
        const ChartGrid& a = sl.grid(c);
        const ChartGrid& b = phi.grid(c);
        for (int j = 0; j < fixtures::kN; ++j)
            for (int i = 0; i < fixtures::kN; ++i) {
                const int k = j * fixtures::kN + i;
                if (a.mask[k] || b.mask[k] || !owns(c, a.node(i, j))) continue;
                CHECK(a.values[k] == doctest::Approx(b.values[k]).epsilon(1e-9));
            }
    }
}

TEST_CASE("slices dominate psi_1 and decrease in s") {
    const GeodesicSolution& g = sol();
    const ChartGrid& psi1 = fixtures::family().envs.back().psi.z;
    for (std::size_t m = 0; m < g.slices.size(); ++m) {
        const ChartGrid& a = g.slices[m].phi_tilde.z;
        for (std::size_t k = 0; k < a.values.size(); ++k) {
            if (a.mask[k] || psi1.mask[k]) continue;
            CHECK(a.values[k] >= psi1.values[k] - 1e-12);
            if (m > 0 && !g.slices[m - 1].phi_tilde.z.mask[k])
                CHECK(a.values[k] <= g.slices[m - 1].phi_tilde.z.values[k] + 1e-12);
        }
    }
}

TEST_CASE("active t is non-decreasing in s") {
    const GeodesicSolution& g = sol();
    for (std::size_t m = 1; m < g.slices.size(); ++m) {
        const ChartGrid& a = g.slices[m].tstar_z;
        const ChartGrid& b = g.slices[m - 1].tstar_z;
        for (std::size_t k = 0; k < a.values.size(); ++k)
            if (!a.mask[k] && !b.mask[k]) CHECK(a.values[k] >= b.values[k] - 1e-12);
    }
}

TEST_CASE("h functions live in [-1, 0] and agree between variants") {
    const GeodesicSolution& g = sol();
    const std::size_t mid = g.slices.size() / 2;
    const GlobalFunction he = h_exact(g, mid);
    const GlobalFunction hd = h_discrete(g, mid);
    for (std::size_t k = 0; k < he.z.values.size(); ++k) {
        if (he.z.mask[k]) continue;
        CHECK(he.z.values[k] >= -1.0 - 1e-12);
        CHECK(he.z.values[k] <= 1e-12);
        if (!hd.z.mask[k]) CHECK(std::abs(he.z.values[k] - hd.z.values[k]) <= 1.0);
    }
}

TEST_CASE("inverse transform recovers the envelopes") {
    const InvertReport rep = legendre_invert_check(sol(), fixtures::family());
    CHECK(rep.worst_gap <= 0.2);  // coarse 9-point fixture t-grid; the gap
                                  // scales with the t-spacing
}

TEST_CASE("point evaluation matches the node values") {
    const EnvelopeFamily& fam = fixtures::family();
    const ChartGrid& g = fam.envs[3].psi.z;
    const int i = 10, j = 20;
    double out = 0.0;
    REQUIRE(envelope_value_at(fam.envs[3], {Chart::Z, g.node(i, j)}, out));
    CHECK(out == doctest::Approx(g.at(i, j)).epsilon(1e-12));

    double val = 0.0, ts = 0.0;
    REQUIRE(legendre_eval(fam, {Chart::Z, g.node(i, j)}, 0.7, val, &ts));
    CHECK(ts >= 0.0);
    CHECK(ts <= 1.0);
}

TEST_CASE("fibre density carries positive partial mass") {
    // the masked pole neighbourhood and slit carry the rest of the unit
    // mass, so only the smooth remainder is integrated here
    const CurrentDensity d = fibre_density(fixtures::family(), 0.5);
    const double m = integrate_all(d);
    CHECK(m > 0.01);
    CHECK(m < 1.1);
}

TEST_CASE("hele-shaw domain read off the geodesic is monotone in t") {
    const GeodesicSolution& g = sol();
    const std::size_t mid = g.slices.size() / 2;
    const GlobalMask a = omega_t_of_fibre(g, mid, 0.4);
    const GlobalMask b = omega_t_of_fibre(g, mid, 0.9);
    for (std::size_t k = 0; k < a.z.size(); ++k)
        if (a.z[k]) CHECK(b.z[k]);
}

TEST_CASE("monge-ampere residual is small and detects perturbations") {
    GeodesicSolution g = sol();
    const std::size_t mid = g.slices.size() / 2;
    const MAResidual clean = ma_residual(g, mid);
    CHECK(clean.mean_abs <= 0.2);  // coarse fixture grid

    for (double& v : g.slices[mid].phi_tilde.z.values) v += 0.25;
    for (double& v : g.slices[mid].phi_tilde.w.values) v += 0.25;
    const MAResidual bent = ma_residual(g, mid);
    CHECK(bent.mean_abs > 3.0 * clean.mean_abs);
}

TEST_CASE("degeneracy report flags the predicted region on a mid slice") {
    DegeneracyOptions opt;
    opt.density_tol = 2e-2;       // coarse fixture grid
    opt.margin_cells = 2.0;
    opt.min_s = 1.0;
    opt.max_s = 1.5;
    const DegeneracyReport rep =
        degeneracy_report(fixtures::family(), {1.2}, opt);
    REQUIRE(rep.slices.size() == 1);
    CHECK(rep.slices[0].predicted_nodes > 0);
    CHECK(rep.slices[0].coverage >= 0.9);
    CHECK(rep.slices[0].predicted_area > 0.0);
    CHECK(rep.slices[0].min_density_in_A > 0.0);
}
