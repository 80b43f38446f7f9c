#include "hmae/config.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hmae {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

template <typename T>
T parse_num(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    T out;
    std::string rest;
    in >> out;
    if (in.fail() || (in >> rest, !rest.empty()))
        throw std::invalid_argument("config: bad value for " + key + ": '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw std::invalid_argument("config: bad boolean for " + key + ": '" + value + "'");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "n") n = parse_num<int>(key, value);
    else if (key == "half_width") half_width = parse_num<double>(key, value);
    else if (key == "t_points") t_points = parse_num<int>(key, value);
    else if (key == "t_cluster") t_cluster = parse_num<int>(key, value);
    else if (key == "s_points") s_points = parse_num<int>(key, value);
    else if (key == "s_max") s_max = parse_num<double>(key, value);
    else if (key == "s_cluster") s_cluster = parse_num<int>(key, value);
    else if (key == "solver") solver = value;
    else if (key == "omega") omega = parse_num<double>(key, value);
    else if (key == "fp_tol_rel") fp_tol_rel = parse_num<double>(key, value);
    else if (key == "max_iter") max_iter = parse_num<long>(key, value);
    else if (key == "delta") delta = parse_num<double>(key, value);
    else if (key == "margin") margin = parse_num<double>(key, value);
    else if (key == "oracle_n") oracle_n = parse_num<int>(key, value);
    else if (key == "oracle_rho") oracle_rho = parse_num<int>(key, value);
    else if (key == "oracle_max_sweeps") oracle_max_sweeps = parse_num<long>(key, value);
    else if (key == "density_tol") density_tol = parse_num<double>(key, value);
    else if (key == "margin_cells") margin_cells = parse_num<double>(key, value);
    else if (key == "threads") threads = parse_num<int>(key, value);
    else if (key == "cache") cache = parse_bool(key, value);
    else if (key == "out_dir") out_dir = value;
    else if (key == "stages") stages = value;
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.resize(hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: " + path + ":" + std::to_string(lineno) +
                                        ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

std::string RunConfig::canonical() const {
    std::map<std::string, std::string> kv;
    auto num = [](auto x) {
        std::ostringstream o;
        o.precision(17);
        o << x;
        return o.str();
    };
    kv["n"] = num(n);
    kv["half_width"] = num(half_width);
    kv["t_points"] = num(t_points);
    kv["t_cluster"] = num(t_cluster);
    kv["s_points"] = num(s_points);
    kv["s_max"] = num(s_max);
    kv["s_cluster"] = num(s_cluster);
    kv["solver"] = solver;
    kv["omega"] = num(omega);
    kv["fp_tol_rel"] = num(fp_tol_rel);
    kv["max_iter"] = num(max_iter);
    kv["delta"] = num(delta);
    kv["margin"] = num(margin);
    kv["oracle_n"] = num(oracle_n);
    kv["oracle_rho"] = num(oracle_rho);
    kv["oracle_max_sweeps"] = num(oracle_max_sweeps);
    kv["density_tol"] = num(density_tol);
    kv["margin_cells"] = num(margin_cells);
    // bumped whenever a numerical scheme changes, so stale caches miss
    kv["scheme_rev"] = "3";
    // threads, cache, out_dir and stages do not affect the numbers
    std::ostringstream out;
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
    return out.str();
}

std::uint64_t RunConfig::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

void RunConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (n < 9 || n % 2 == 0) fail("n must be odd and >= 9");
    if (half_width < 2.0) fail("half_width must be >= 2");
    if (t_points < 2) fail("t_points must be >= 2");
    if (t_cluster < 0 || t_cluster > 30) fail("t_cluster must be in [0, 30]");
    if (s_points < 2 || s_max <= 0.0) fail("s grid needs >= 2 points and s_max > 0");
    if (s_cluster < 0) fail("s_cluster must be >= 0");
    if (solver != "sor" && solver != "jacobi") fail("solver must be 'sor' or 'jacobi'");
    if (!(omega > 0.0 && omega < 2.0)) fail("omega must be in (0,2)");
    if (fp_tol_rel <= 0.0) fail("fp_tol_rel must be positive");
    if (max_iter < 1) fail("max_iter must be >= 1");
    if (!(delta > 0.0)) fail("delta must be positive");
    if (!(margin > delta)) fail("margin must exceed delta");
    if (oracle_n < 9 || oracle_n % 2 == 0) fail("oracle_n must be odd and >= 9");
    if (oracle_rho < 3) fail("oracle_rho must be >= 3");
    if (density_tol <= 0.0) fail("density_tol must be positive");
    if (margin_cells < 0.0) fail("margin_cells must be >= 0");
    if (threads < 0) fail("threads must be >= 0");
}

}  // namespace hmae
