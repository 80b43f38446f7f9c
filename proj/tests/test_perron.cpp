#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "hmae/perron.hpp"

using namespace hmae;

namespace {

const PerronOracle& oracle() {
    static const PerronOracle o = [] {
        PerronOptions opt;
        opt.n_rho = 9;
        opt.max_sweeps = 2000;
        return direct_perron_oracle(fixtures::phi(), opt);
    }();
    return o;
}

}  // namespace

TEST_CASE("oracle converges and keeps the boundary slab at phi") {
    const PerronOracle& o = oracle();
    REQUIRE(!o.rho.empty());
    CHECK(o.rho.back() == 1.0);
    CHECK(o.final_change < 1e-5);
    const GlobalFunction& top = o.u.back();
    const GlobalFunction& phi = fixtures::phi();
    for (std::size_t k = 0; k < top.z.values.size(); ++k)
        if (!top.z.mask[k] && !phi.z.mask[k])
            CHECK(top.z.values[k] == doctest::Approx(phi.z.values[k]).epsilon(1e-10));
}

TEST_CASE("oracle slabs are monotone in rho") {
    // u is psh in tau and S^1-invariant, hence non-decreasing in rho.
    // Checked on owned nodes outside the axis cylinder, where the
    // circle-average scheme resolves the solution (the log cusp along
    // the axis and the exchange zone carry larger scheme error)
    const PerronOracle& o = oracle();
    const int n = fixtures::kN;
    for (std::size_t l = 1; l < o.u.size(); ++l) {
        const ChartGrid& a = o.u[l].z;
        const ChartGrid& b = o.u[l - 1].z;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int k = j * n + i;
                if (a.mask[k] || b.mask[k]) continue;
                const cplx p = a.node(i, j);
                if (!owns(Chart::Z, p) || std::abs(p) < 0.9) continue;
                // first-order kinks at the slit endpoints z = +-1 leave a
                // larger scheme error on the remaining annulus
                CHECK(a.values[k] >= b.values[k] - 2e-2);
            }
    }
}

TEST_CASE("oracle agrees with the legendre transform off the axis cylinder") {
    const OracleComparison cmp = compare_with_legendre(oracle(), fixtures::family());
    CHECK(cmp.exclude_radius == doctest::Approx(0.9));
    CHECK(cmp.max_diff <= 0.15);  // coarse fixture; the pipeline pins this
                                  // to 5e-2 at production resolution
    REQUIRE(!cmp.per_level.empty());
    for (double d : cmp.per_level) CHECK(d <= 0.15);
}
