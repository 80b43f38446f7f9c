#ifndef HMAE_PIPELINE_HPP
#define HMAE_PIPELINE_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "hmae/config.hpp"

// Stage runner: potential -> envelopes -> hele-shaw -> conformal ->
// geodesic -> oracle -> report.  Numeric artifacts land in cfg.out_dir
// (grid dumps, CSV tables, report.json); the returned exit code follows
// the CLI convention:
//   0  success
//   2  configuration / usage error (thrown before any stage runs)
//   3  a solver failed to converge
//   4  a validation check failed (numbers produced, but out of spec)

namespace hmae {

struct PipelineResult {
    int exit_code = 0;
    std::string report_json;
    std::vector<std::string> failures;
};

PipelineResult run_pipeline(const RunConfig& cfg, std::ostream* log = nullptr);

// Three-level grid refinement (n, 2n-1, 4n-3) of the scalar error
// metrics; each metric must decrease with refinement, and the fitted
// tolerance for downstream checks is twice the finest-level error.
struct StudyMetric {
    std::string name;
    std::vector<double> errors;  // coarse -> fine
    bool decreasing = false;
    double fitted_tol = 0.0;
};

struct ConvergenceStudy {
    std::vector<int> levels;
    std::vector<StudyMetric> metrics;
    bool ok = false;
};

ConvergenceStudy convergence_study(const RunConfig& base, std::ostream* log = nullptr);

std::string study_json(const ConvergenceStudy& s);

}  // namespace hmae

#endif
