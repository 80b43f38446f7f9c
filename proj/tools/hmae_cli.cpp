#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hmae/config.hpp"
#include "hmae/p1grid.hpp"
#include "hmae/pipeline.hpp"

namespace {

hmae::RunConfig make_config(const std::string& config_path,
                            const std::vector<std::string>& sets) {
    hmae::RunConfig cfg;
    if (!config_path.empty()) cfg = hmae::RunConfig::from_file(config_path);
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for a degenerate geodesic ray on P^1"};
    app.require_subcommand(1);

    std::string config_path, out_dir, stages;
    std::vector<std::string> sets;
    int threads = -1;
    bool no_cache = false, quiet = false;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "flat key=value config file");
        cmd->add_option("--set", sets, "override a config key (key=value)")
            ->take_all();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--stages", stages, "comma list of stages, or 'all'");
        cmd->add_option("--threads", threads, "worker thread count (0 = default)");
        cmd->add_flag("--no-cache", no_cache, "ignore and skip the stage cache");
        cmd->add_flag("--quiet", quiet, "suppress progress output");
    };

    auto* run = app.add_subcommand("run", "execute the pipeline");
    add_common(run);
    auto* study = app.add_subcommand("study", "three-level grid refinement study");
    add_common(study);

    auto* report = app.add_subcommand("report", "summarise an existing report.json");
    std::string report_path = "out/report.json";
    report->add_option("path", report_path, "path to report.json");

    auto* exp = app.add_subcommand("export", "convert a binary grid dump to CSV");
    std::string grid_in, csv_out;
    exp->add_option("grid", grid_in, "input .grid file")->required();
    exp->add_option("csv", csv_out, "output .csv file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed() || study->parsed()) {
            hmae::RunConfig cfg = make_config(config_path, sets);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (!stages.empty()) cfg.stages = stages;
            if (threads >= 0) cfg.threads = threads;
            if (no_cache) cfg.cache = false;
            std::ostream* log = quiet ? nullptr : &std::cerr;
            if (run->parsed()) {
                const hmae::PipelineResult res = hmae::run_pipeline(cfg, log);
                for (const auto& f : res.failures) std::cerr << "FAIL: " << f << "\n";
                std::cout << res.report_json << "\n";
                return res.exit_code;
            }
            const hmae::ConvergenceStudy st = hmae::convergence_study(cfg, log);
            const std::string j = hmae::study_json(st);
            std::ofstream(cfg.out_dir + "/study.json") << j << "\n";
            std::cout << j << "\n";
            return st.ok ? 0 : 4;
        }
        if (report->parsed()) {
            std::ifstream in(report_path);
            if (!in) throw std::runtime_error("cannot open " + report_path);
            nlohmann::json j;
            in >> j;
            for (auto& [stage, body] : j.items()) {
                if (!body.is_object()) continue;
                std::cout << stage << ":\n";
                for (auto& [k, v] : body.items())
                    if (!v.is_array() && !v.is_object())
                        std::cout << "  " << k << " = " << v.dump() << "\n";
            }
            const auto& fails = j.value("failures", nlohmann::json::array());
            std::cout << (fails.empty() ? "status: ok" : "status: FAILED") << "\n";
            for (const auto& f : fails) std::cout << "  " << f.get<std::string>() << "\n";
            return fails.empty() ? 0 : 4;
        }
        if (exp->parsed()) {
            hmae::export_csv(hmae::load_grid(grid_in), csv_out);
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
