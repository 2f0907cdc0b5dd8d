#include "equihybrid/bench.hpp"
#include "equihybrid/run_config.hpp"
#include "equihybrid/solvers.hpp"
#include "equihybrid/trace_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNondeterministic = 4;

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw equihybrid::ConfigurationError("cannot open output file: " + path);
    os << text;
    if (!os) throw equihybrid::ConfigurationError("failed writing output file: " + path);
}

int cmd_run(const std::string& config_path, const std::string& trace_override,
            const std::string& summary_override) {
    equihybrid::RunSpec spec = equihybrid::load_run_spec(config_path);
    if (!trace_override.empty()) spec.trace_path = trace_override;
    if (!summary_override.empty()) spec.summary_path = summary_override;

    const equihybrid::SolveResult result = equihybrid::execute_run(spec);
    if (!spec.trace_path.empty())
        equihybrid::write_trace_csv_file(spec.trace_path, result.trace);
    const std::string summary = equihybrid::summary_json(result);
    if (!spec.summary_path.empty()) {
        write_text_file(spec.summary_path, summary + "\n");
        std::cout << "run: " << result.iterations << " iterations, stop_reason "
                  << equihybrid::to_string(result.stop_reason) << "\n";
    } else {
        std::cout << summary << "\n";
    }
    return result.stop_reason == equihybrid::StopReason::infeasible_cut ? kExitInfeasible
                                                                        : kExitOk;
}

int cmd_bench(const std::string& config_path, const std::vector<int>& workers_override,
              const std::string& report_override) {
    equihybrid::RunSpec spec = equihybrid::load_run_spec(config_path);
    if (!workers_override.empty()) spec.bench.workers = workers_override;
    if (!report_override.empty()) spec.bench.report_path = report_override;

    const equihybrid::BenchReport report = equihybrid::run_bench(spec);
    std::cout << report.render_text();
    if (!spec.bench.report_path.empty())
        write_text_file(spec.bench.report_path, report.render_csv());
    if (!report.deterministic) {
        std::cerr << "bench: determinism violation, traces differ across runs\n";
        return kExitNondeterministic;
    }
    if (report.stop_reason == equihybrid::StopReason::infeasible_cut) return kExitInfeasible;
    return kExitOk;
}

int cmd_validate(const std::string& config_path, int samples_override,
                 std::int64_t seed_override) {
    equihybrid::RunSpec spec = equihybrid::load_run_spec(config_path);
    if (samples_override > 0) spec.validate.samples = samples_override;
    if (seed_override >= 0) spec.validate.seed = static_cast<std::uint64_t>(seed_override);

    const equihybrid::ProblemInstance problem = equihybrid::problem_view(spec);
    const equihybrid::ValidationReport report = equihybrid::validate_problem(
        problem, spec.solver, spec.validate.samples, spec.validate.seed);
    std::cout << report.render();
    return report.pass ? kExitOk : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parallel hybrid extragradient solver for common equilibrium/fixed-point problems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string trace_override;
    std::string summary_override;
    CLI::App* run = app.add_subcommand("run", "solve the configured problem and write trace/summary");
    run->add_option("config", config_path, "INI config file")->required();
    run->add_option("--trace", trace_override, "override trace CSV path");
    run->add_option("--summary", summary_override, "override summary JSON path");

    std::vector<int> workers_override;
    std::string report_override;
    CLI::App* bench = app.add_subcommand("bench", "time the solve across worker counts");
    bench->add_option("config", config_path, "INI config file")->required();
    bench->add_option("--workers", workers_override, "worker counts to benchmark")
        ->delimiter(',');
    bench->add_option("--report", report_override, "override report CSV path");

    int samples_override = 0;
    std::int64_t seed_override = -1;
    CLI::App* validate = app.add_subcommand("validate", "sample-check the problem's oracle contracts");
    validate->add_option("config", config_path, "INI config file")->required();
    validate->add_option("--samples", samples_override, "number of sample points");
    validate->add_option("--seed", seed_override, "sampling seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, trace_override, summary_override);
        if (bench->parsed()) return cmd_bench(config_path, workers_override, report_override);
        if (validate->parsed()) return cmd_validate(config_path, samples_override, seed_override);
    } catch (const equihybrid::InfeasibilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
