#pragma once

#include "equihybrid/core.hpp"
#include "equihybrid/solvers.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace equihybrid {

/// Shortest decimal representation that round-trips the exact double
/// (std::to_chars); "nan"/"inf"/"-inf" for non-finite values.
std::string format_double(double v);

/// Strict double parser (std::from_chars over the whole token).
double parse_double(const std::string& token);

inline constexpr const char* kTraceHeader =
    "n,step_residual,u_residual,max_z_residual,max_fixed_point_residual,"
    "dist_to_known,wall_time_ms";

/// Writes the iteration trace as CSV: LF line endings, UTF-8, one row per
/// record, header above. Vector-valued residuals are reduced to their max
/// (empty -> 0); dist_to_known is empty when unknown.
void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace);
void write_trace_csv_file(const std::string& path, const std::vector<TraceRecord>& trace);

/// Row as parsed back from the CSV (x itself is not serialized).
struct TraceRow {
    int n = 0;
    double step_residual = 0.0;
    double u_residual = 0.0;
    double max_z_residual = 0.0;
    double max_fixed_point_residual = 0.0;
    std::optional<double> dist_to_known;
    double wall_time_ms = 0.0;
};

std::vector<TraceRow> read_trace_csv(std::istream& is);
std::vector<TraceRow> read_trace_csv_file(const std::string& path);

/// JSON run summary: solution, iterations, stop_reason, final residuals,
/// dist_to_known if available, total wall time.
std::string summary_json(const SolveResult& result);

}  // namespace equihybrid
