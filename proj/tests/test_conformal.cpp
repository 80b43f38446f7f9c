#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "hmae/conformal.hpp"

using namespace hmae;

TEST_CASE("riemann map round-trips and fixes the origin") {
    CHECK(std::abs(riemann_map({0.0, 0.0})) == 0.0);
    for (double r = 0.1; r < 0.95; r += 0.17)
        for (double a = 0.0; a < 6.2; a += 0.7) {
            const cplx tau = std::polar(r, a);
            const cplx z = riemann_map(tau);
            CHECK(std::abs(riemann_map_inverse(z) - tau) < 1e-12);
        }
    CHECK_THROWS_AS(riemann_map({1.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(riemann_map({0.8, 0.7}), std::domain_error);
}

TEST_CASE("image avoids the two real slits") {
    for (double r = 0.2; r < 0.95; r += 0.1)
        for (double a = 0.0; a < 6.3; a += 0.05) {
            const cplx z = riemann_map(std::polar(r, a));
            const bool on_slit = std::abs(z.imag()) < 1e-14 && std::abs(z.real()) >= 1.0;
            CHECK_FALSE(on_slit);
        }
    CHECK(verify_biholomorphism().ok());
}

TEST_CASE("disc image membership: inverse branch and parity agree") {
    const DiscImage disc(0.6);
    CHECK(disc.contains({0.0, 0.0}));
    CHECK_FALSE(disc.contains({5.0, 5.0}));
    for (double x = -2.0; x <= 2.0; x += 0.23)
        for (double y = -2.0; y <= 2.0; y += 0.29) {
            const cplx p(x, y);
            if (disc.boundary_distance(p) < 5e-2) continue;  // polyline tie zone
            CHECK(disc.contains(p) == disc.contains_by_parity(p));
        }
}

TEST_CASE("boundary distance is zero on the boundary and respects margins") {
    const DiscImage disc(0.5);
    const cplx b = disc.boundary()[disc.boundary().size() / 3];
    CHECK(disc.boundary_distance(b) < 1e-6);
    CHECK_FALSE(disc.clear_of_boundary(b, 0.01));
    CHECK(disc.clear_of_boundary({0.0, 0.0}, 0.1));
}

TEST_CASE("disc images grow with the radius") {
    const DiscImage small(0.3), big(0.7);
    for (const cplx& b : small.boundary()) CHECK(big.contains(b));
}

TEST_CASE("predicted region S excludes the disc image and its margin") {
    const double tau = 0.5;
    const DiscImage disc(tau);
    const int n = 33;
    const double R = 4.0;
    const GlobalMask S = predicted_S_mask(tau, n, R, 2.0);
    ChartGrid ref(Chart::Z, R, n);
    const double h = 2.0 * R / (n - 1);
    std::size_t count = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (!S.z[ref.idx(i, j)]) continue;
            ++count;
            const cplx p = tau * ref.node(i, j);
            CHECK_FALSE(disc.contains(p));
            CHECK(disc.boundary_distance(p) >= 2.0 * h - 1e-12);
            CHECK(in_predicted_S(disc, p, 2.0 * h - 1e-12));
        }
    CHECK(count > 0);
}
