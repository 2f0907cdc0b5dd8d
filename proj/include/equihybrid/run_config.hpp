#pragma once

#include "equihybrid/core.hpp"
#include "equihybrid/problems.hpp"
#include "equihybrid/solvers.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace equihybrid {

/// Parsed INI file: ordered sections of key = value pairs. Supports
/// [section] headers, #/; comments, and blank lines. Duplicate keys within
/// a section and duplicate sections are ConfigurationErrors.
struct IniFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static IniFile parse(const std::string& text);
    static IniFile load(const std::string& path);
};

enum class Algorithm { mann, halpern, averaged, equilibrium_only, vi };

/// Everything needed to run one solve: the problem (or VI family), start
/// point, solver configuration, and output destinations.
struct RunSpec {
    Algorithm algorithm = Algorithm::mann;
    std::string problem_type;
    ProblemInstance problem;             // empty for algorithm == vi
    std::optional<AffineVIFamily> vi;    // set for algorithm == vi
    Point x0;
    SolverConfig solver;
    std::string trace_path;              // empty: no trace output
    std::string summary_path;            // empty: summary to stdout

    struct BenchOptions {
        std::vector<int> workers = {1, 2};
        int repeats = 3;
        std::vector<double> tols = {1e-5, 1e-6, 1e-8};
        std::string report_path;         // empty: report to stdout
    };
    BenchOptions bench;

    struct ValidateOptions {
        int samples = 200;
        std::uint64_t seed = 1;
    };
    ValidateOptions validate;
};

/// Builds a RunSpec from INI text. Unknown sections or keys (including keys
/// that do not apply to the selected problem type or algorithm) are
/// ConfigurationErrors, as are malformed or out-of-range values. The
/// EQUIHYBRID_WORKERS environment variable, when set, overrides the worker
/// count from the file.
RunSpec load_run_spec(const std::string& path);
RunSpec parse_run_spec(const std::string& text);

/// Dispatches the configured algorithm on the configured problem.
SolveResult execute_run(const RunSpec& spec);

/// The equilibrium-problem view of the configured problem (VI families are
/// embedded through their linearized bifunctions).
ProblemInstance problem_view(const RunSpec& spec);

}  // namespace equihybrid
