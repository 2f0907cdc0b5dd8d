#pragma once

#include "equihybrid/run_config.hpp"
#include "equihybrid/solvers.hpp"

#include <string>
#include <vector>

namespace equihybrid {

struct BenchRow {
    double tol = 0.0;
    int workers = 1;
    double median_ms = 0.0;        // median over repeats of time-to-tol
    double serial_median_ms = 0.0; // same metric at workers = 1
    double speedup = 1.0;          // serial_median_ms / median_ms
    double efficiency = 1.0;       // speedup / workers
    int iterations_to_tol = 0;     // first iteration reaching the tolerance
};

struct BenchReport {
    std::vector<BenchRow> rows;
    bool deterministic = true;     // traces bitwise identical across all runs
    int solve_iterations = 0;
    StopReason stop_reason = StopReason::max_iter;
    unsigned hardware_threads = 0;
    std::string notes;

    std::string render_text() const;
    std::string render_csv() const;
};

/// Runs the configured solve `repeats` times per worker count, reports the
/// median time to reach each tolerance (dist_to_known when the problem has
/// a known solution, step residual otherwise), speedup and efficiency
/// against the workers = 1 median, and verifies that all traces agree
/// bitwise on every field except wall time. Timing covers the iteration
/// loop only (problem construction excluded). A determinism violation sets
/// deterministic = false and is detailed in `notes`.
BenchReport run_bench(const RunSpec& spec);

}  // namespace equihybrid
