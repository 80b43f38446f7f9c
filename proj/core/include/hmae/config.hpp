#ifndef HMAE_CONFIG_HPP
#define HMAE_CONFIG_HPP

#include <cstdint>
#include <string>

// Flat run configuration: key = value pairs, '#' comments.  The canonical
// form (sorted keys, one per line) feeds an FNV-1a hash used to stamp
// cached stage outputs.

namespace hmae {

struct RunConfig {
    int n = 257;               // nodes per chart axis (odd)
    double half_width = 4.0;   // chart square [-R,R]^2
    int t_points = 65;
    int t_cluster = 12;        // extra t-points geometrically clustered at t = 1
    int s_points = 33;         // uniform part of the s-grid
    double s_max = 8.0;
    int s_cluster = 8;         // extra points clustered at s = 0
    std::string solver = "sor";  // "sor" | "jacobi"
    double omega = 1.7;
    double fp_tol_rel = 1e-8;
    long max_iter = 1000000;
    double delta = 0.1;        // smoothing width of the regularised max
    double margin = 0.2;       // slack in the constant-selection inequalities
    int oracle_n = 65;
    int oracle_rho = 17;
    long oracle_max_sweeps = 4000;
    double density_tol = 5e-3;
    double margin_cells = 3.0;
    int threads = 0;           // 0 = runtime default
    bool cache = true;
    std::string out_dir = "out";
    std::string stages = "all";

    static RunConfig from_file(const std::string& path);

    // Applies one assignment; throws std::invalid_argument on unknown keys
    // or unparseable values.
    void set(const std::string& key, const std::string& value);

    std::string canonical() const;
    std::uint64_t hash() const;

    void validate() const;  // throws std::invalid_argument
};

}  // namespace hmae

#endif
