#include "equihybrid/bench.hpp"

#include "equihybrid/trace_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace equihybrid {

namespace {

bool bits_equal(double a, double b) {
    return std::memcmp(&a, &b, sizeof(double)) == 0;
}

bool points_equal(const Point& a, const Point& b) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index k = 0; k < a.size(); ++k)
        if (!bits_equal(a[k], b[k])) return false;
    return true;
}

// Bitwise comparison of everything except wall time, which legitimately
// varies run to run.
bool traces_equal(const std::vector<TraceRecord>& a, const std::vector<TraceRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const TraceRecord& ra = a[i];
        const TraceRecord& rb = b[i];
        if (ra.n != rb.n) return false;
        if (!points_equal(ra.x, rb.x)) return false;
        if (!bits_equal(ra.step_residual, rb.step_residual)) return false;
        if (!bits_equal(ra.u_residual, rb.u_residual)) return false;
        if (ra.z_residuals.size() != rb.z_residuals.size()) return false;
        for (std::size_t k = 0; k < ra.z_residuals.size(); ++k)
            if (!bits_equal(ra.z_residuals[k], rb.z_residuals[k])) return false;
        if (ra.fixed_point_residuals.size() != rb.fixed_point_residuals.size()) return false;
        for (std::size_t k = 0; k < ra.fixed_point_residuals.size(); ++k)
            if (!bits_equal(ra.fixed_point_residuals[k], rb.fixed_point_residuals[k]))
                return false;
        if (ra.dist_to_known.has_value() != rb.dist_to_known.has_value()) return false;
        if (ra.dist_to_known && !bits_equal(*ra.dist_to_known, *rb.dist_to_known)) return false;
    }
    return true;
}

// Wall time at which the convergence metric (distance to the known solution
// when available, step residual otherwise) first reaches tol; -1 if never.
struct Crossing {
    double ms = -1.0;
    int iteration = -1;
};

Crossing time_to_tol(const std::vector<TraceRecord>& trace, double tol, bool use_dist) {
    for (const auto& r : trace) {
        const double metric = use_dist && r.dist_to_known ? *r.dist_to_known : r.step_residual;
        if (metric <= tol) return {r.wall_time_ms, r.n};
    }
    return {};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) return -1.0;
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string BenchReport::render_csv() const {
    std::ostringstream os;
    os << "tol,workers,median_ms,serial_median_ms,speedup,efficiency,iterations_to_tol\n";
    for (const auto& r : rows) {
        os << format_double(r.tol) << ',' << r.workers << ',' << format_double(r.median_ms)
           << ',' << format_double(r.serial_median_ms) << ',' << format_double(r.speedup) << ','
           << format_double(r.efficiency) << ',' << r.iterations_to_tol << '\n';
    }
    return os.str();
}

std::string BenchReport::render_text() const {
    std::ostringstream os;
    os << "benchmark: " << rows.size() << " row(s), hardware threads: " << hardware_threads
       << "\n";
    os << "determinism gate: "
       << (deterministic ? "passed (traces bitwise identical across runs and worker counts)"
                         : "FAILED")
       << "\n";
    os << "solve: " << solve_iterations << " iterations, stop_reason " << to_string(stop_reason)
       << "\n";
    if (!notes.empty()) os << notes << "\n";
    os << "  tol        workers  T_p(ms)      T_s(ms)      S_p      E_p      iters\n";
    for (const auto& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-9.3g  %-7d  %-11.4g  %-11.4g  %-7.4g  %-7.4g  %d\n",
                      r.tol, r.workers, r.median_ms, r.serial_median_ms, r.speedup,
                      r.efficiency, r.iterations_to_tol);
        os << buf;
    }
    return os.str();
}

BenchReport run_bench(const RunSpec& spec) {
    BenchReport report;
    report.hardware_threads = std::thread::hardware_concurrency();
    if (spec.bench.repeats < 1) throw ConfigurationError("bench: repeats must be at least 1");

    // Deduplicated worker counts, serial run always included as baseline.
    std::set<int> workers_set(spec.bench.workers.begin(), spec.bench.workers.end());
    workers_set.insert(1);
    for (int w : workers_set)
        if (w < 1) throw ConfigurationError("bench: worker counts must be at least 1");

    const bool use_dist = [&] {
        if (spec.algorithm == Algorithm::vi) return spec.vi && spec.vi->known_solution.size() > 0;
        return spec.problem.known_solution.has_value();
    }();

    std::vector<TraceRecord> reference_trace;
    bool have_reference = false;
    std::string first_mismatch;

    // times[w][tol index][repeat]
    std::map<int, std::vector<std::vector<double>>> times;
    std::map<int, std::vector<int>> iters;
    for (int w : workers_set) {
        times[w].assign(spec.bench.tols.size(), {});
        iters[w].assign(spec.bench.tols.size(), -1);
    }

    for (int w : workers_set) {
        for (int rep = 0; rep < spec.bench.repeats; ++rep) {
            RunSpec local = spec;
            local.solver.workers = w;
            SolveResult result = execute_run(local);
            if (!have_reference) {
                reference_trace = result.trace;
                have_reference = true;
                report.solve_iterations = result.iterations;
                report.stop_reason = result.stop_reason;
            } else if (report.deterministic && !traces_equal(reference_trace, result.trace)) {
                report.deterministic = false;
                first_mismatch = "trace mismatch at workers=" + std::to_string(w) +
                                 " repeat=" + std::to_string(rep + 1);
            }
            for (std::size_t t = 0; t < spec.bench.tols.size(); ++t) {
                const Crossing c = time_to_tol(result.trace, spec.bench.tols[t], use_dist);
                if (c.iteration < 0) continue;
                times[w][t].push_back(c.ms);
                iters[w][t] = c.iteration;
            }
        }
    }

    std::ostringstream notes;
    notes << "metric: " << (use_dist ? "distance to known solution" : "step residual")
          << "; timing starts at the first iteration (construction and I/O excluded); medians over "
          << spec.bench.repeats << " repeat(s)";
    if (!first_mismatch.empty()) notes << "; " << first_mismatch;

    for (std::size_t t = 0; t < spec.bench.tols.size(); ++t) {
        const double serial_median = median(times[1][t]);
        for (int w : workers_set) {
            if (times[w][t].empty()) {
                notes << "; tol " << format_double(spec.bench.tols[t]) << " never reached at workers="
                      << w;
                continue;
            }
            BenchRow row;
            row.tol = spec.bench.tols[t];
            row.workers = w;
            // The serial baseline is by definition the parallel time at w=1.
            row.median_ms = (w == 1) ? serial_median : median(times[w][t]);
            row.serial_median_ms = serial_median;
            row.speedup = (w == 1) ? 1.0 : serial_median / row.median_ms;
            row.efficiency = row.speedup / w;
            row.iterations_to_tol = iters[w][t];
            report.rows.push_back(row);
        }
    }
    report.notes = notes.str();
    return report;
}

}  // namespace equihybrid
