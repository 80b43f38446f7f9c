#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "hmae/envelope.hpp"
#include "hmae/potential.hpp"

using namespace hmae;

TEST_CASE("regularised absolute value: C^2 spline properties") {
    CHECK(RegMax::abs_reg(0.0) == doctest::Approx(3.0 / 8.0));
    CHECK(RegMax::abs_reg(1.0) == doctest::Approx(1.0));
    CHECK(RegMax::abs_reg(-2.5) == doctest::Approx(2.5));
    CHECK(RegMax::abs_reg(0.4) == RegMax::abs_reg(-0.4));
    // dominates |t| and stays within the spline gap 3/8
    for (double t = -2.0; t <= 2.0; t += 0.01) {
        CHECK(RegMax::abs_reg(t) >= std::abs(t));
        CHECK(RegMax::abs_reg(t) <= std::abs(t) + 3.0 / 8.0);
    }
    // convexity via second differences
    const double d = 1e-3;
    for (double t = -1.5; t <= 1.5; t += 0.01) {
        const double s2 =
            RegMax::abs_reg(t - d) - 2.0 * RegMax::abs_reg(t) + RegMax::abs_reg(t + d);
        CHECK(s2 >= -1e-12);
    }
}

TEST_CASE("regularised max dominates max and is within 3 delta / 8") {
    RegMax m;
    m.delta = 0.2;
    for (double a = -1.0; a <= 1.0; a += 0.13)
        for (double b = -1.0; b <= 1.0; b += 0.17) {
            const double v = m(a, b);
            CHECK(v >= std::max(a, b) - 1e-15);
            CHECK(v <= std::max(a, b) + 3.0 * m.delta / 8.0 + 1e-15);
        }
    // exact max far from the diagonal
    CHECK(m(1.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("bump profile: flat below one, asymptotically linear, convex") {
    const BumpProfile a;
    CHECK(a(0.0) == 0.0);
    CHECK(a(1.0) == 0.0);
    CHECK(a.deriv(0.5) == 0.0);
    CHECK(a.second_deriv(0.5) == 0.0);
    // asymptotic slope
    CHECK(a.deriv(1.0 + a.lambda + 1.0) == doctest::Approx(a.slope));
    CHECK(a(10.0) - a(9.0) == doctest::Approx(a.slope).epsilon(1e-9));
    // derivative consistency by finite differences
    const double d = 1e-6;
    for (double t = 0.5; t < 3.0; t += 0.1) {
        CHECK(a.deriv(t) == doctest::Approx((a(t + d) - a(t - d)) / (2 * d)).epsilon(1e-4));
        CHECK(a.second_deriv(t) >= -1e-12);
    }
}

TEST_CASE("constant selection satisfies both margin inequalities") {
    const ExampleConstants c = fixtures::constants();
    const BumpProfile& a = fixtures::alpha();
    CHECK(c.epsilon > 0.0);
    for (double x = -2.0; x <= 2.0; x += 0.21)
        for (double y = -2.0; y <= 2.0; y += 0.23) {
            const cplx w(x, y);
            if (std::abs(w) > 2.0) continue;
            CHECK(c.epsilon * u_value(w, a) >=
                  std::log1p(std::norm(w)) - c.C + c.margin - 1e-12);
        }
    for (double x = -4.0; x <= 4.0; x += 0.17)
        for (double y = -4.0; y <= 4.0; y += 0.19) {
            const cplx w(x, y);
            if (std::abs(w) < 3.0 || std::abs(w) > 4.0) continue;
            CHECK(c.epsilon * u_value(w, a) <=
                  std::log1p(std::norm(w)) - c.C - c.margin + 1e-12);
        }
}

TEST_CASE("potential validates: positive curvature, contact on the segment") {
    const PotentialReport rep =
        validate_potential(fixtures::phi(), fixtures::constants(), fixtures::alpha());
    const double h = 2.0 * fixtures::kR / (fixtures::kN - 1);
    CHECK(rep.ok());
    CHECK(rep.min_density > 0.0);
    CHECK(rep.equality_set_hausdorff <= 2.0 * h);
    CHECK(rep.inequality1_ok);
    CHECK(rep.inequality2_ok);
    CHECK(rep.glue_region_exact);
}

TEST_CASE("phi dominates the green potential node-exactly") {
    const GlobalFunction& phi = fixtures::phi();
    const GlobalFunction zeta = green_potential(fixtures::kN, fixtures::kR);
    for (Chart c : {Chart::Z, Chart::W}) {
        const ChartGrid& p = phi.grid(c);
        const ChartGrid& z = zeta.grid(c);
        double worst = 0.0;
        for (std::size_t k = 0; k < p.values.size(); ++k) {
            if (p.mask[k] || z.mask[k]) continue;
            worst = std::min(worst, p.values[k] - z.values[k]);
        }
        CHECK(worst >= -1e-14);  // exact up to double rounding
    }
}

TEST_CASE("grid values agree with the pointwise evaluation") {
    const GlobalFunction& phi = fixtures::phi();
    const ChartGrid& wg = phi.w;
    for (int j = 3; j < fixtures::kN; j += 7)
        for (int i = 2; i < fixtures::kN; i += 5) {
            const double direct =
                phi_value(wg.node(i, j), fixtures::constants(), fixtures::alpha());
            CHECK(wg.at(i, j) == doctest::Approx(direct).epsilon(1e-13));
        }
}

TEST_CASE("constant selection fails loudly when the margin is impossible") {
    ChartGrid wg(Chart::W, fixtures::kR, 33);
    CHECK_THROWS_AS(select_constants(wg, fixtures::alpha(), 0.1, 50.0),
                    std::runtime_error);
}
