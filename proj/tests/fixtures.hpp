#ifndef TESTS_FIXTURES_HPP
#define TESTS_FIXTURES_HPP

#include "hmae/envelope.hpp"
#include "hmae/potential.hpp"

// Shared small-scale objects, built once per test binary.  n = 49 keeps a
// full envelope family under a second while leaving room for the checks
// to be meaningful.

namespace fixtures {

inline constexpr int kN = 49;
inline constexpr double kR = 4.0;

inline const hmae::BumpProfile& alpha() {
    static const hmae::BumpProfile a;
    return a;
}

inline const hmae::ExampleConstants& constants() {
    static const hmae::ExampleConstants c = [] {
        hmae::ChartGrid wg(hmae::Chart::W, kR, kN);
        return hmae::select_constants(wg, alpha());
    }();
    return c;
}

inline const hmae::GlobalFunction& phi() {
    static const hmae::GlobalFunction p = hmae::build_phi(constants(), kN, kR, alpha());
    return p;
}

inline const hmae::EnvelopeFamily& family() {
    static const hmae::EnvelopeFamily f =
        hmae::solve_family(phi(), hmae::make_t_grid_clustered(9, 6), {});
    return f;
}

}  // namespace fixtures

#endif
