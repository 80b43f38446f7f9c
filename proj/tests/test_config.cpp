#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "hmae/config.hpp"

using namespace hmae;

TEST_CASE("defaults validate") {
    RunConfig c;
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("set parses and rejects unknown keys") {
    RunConfig c;
    c.set("n", "129");
    CHECK(c.n == 129);
    c.set("solver", "jacobi");
    CHECK(c.solver == "jacobi");
    c.set("fp_tol_rel", "1e-6");
    CHECK(c.fp_tol_rel == 1e-6);
    CHECK_THROWS_AS(c.set("no_such_key", "1"), std::invalid_argument);
    CHECK_THROWS_AS(c.set("n", "banana"), std::invalid_argument);
}

TEST_CASE("validation catches bad values") {
    RunConfig c;
    c.n = 64;  // must be odd
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = RunConfig{};
    c.solver = "magic";
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = RunConfig{};
    c.t_points = 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = RunConfig{};
    c.omega = 2.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = RunConfig{};
    c.t_cluster = -1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("hash is stable, ignores presentation keys, sees numeric keys") {
    RunConfig a, b;
    CHECK(a.hash() == b.hash());
    b.out_dir = "elsewhere";
    b.threads = 4;
    b.cache = false;
    CHECK(a.hash() == b.hash());  // execution-only keys excluded
    b.n = 129;
    CHECK(a.hash() != b.hash());
    RunConfig c;
    c.t_cluster = 0;
    CHECK(a.hash() != c.hash());
}

TEST_CASE("config file round-trip") {
    const char* path = "config_test_roundtrip.cfg";
    {
        std::ofstream f(path);
        f << "# comment line\n";
        f << "n = 65\n";
        f << "t_points=17\n";
        f << "solver = jacobi\n";
    }
    const RunConfig c = RunConfig::from_file(path);
    std::remove(path);
    CHECK(c.n == 65);
    CHECK(c.t_points == 17);
    CHECK(c.solver == "jacobi");
    CHECK(c.s_points == RunConfig{}.s_points);  // untouched keys keep defaults
}
