#include "equihybrid/trace_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

namespace equihybrid {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
    if (token == "nan") return std::nan("");
    if (token == "inf") return std::numeric_limits<double>::infinity();
    if (token == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ConfigurationError("not a number: '" + token + "'");
    return v;
}

namespace {

double max_or_zero(const std::vector<double>& v) {
    double m = 0.0;
    for (double t : v) m = std::max(m, t);
    return m;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace) {
    os << kTraceHeader << '\n';
    for (const auto& r : trace) {
        os << r.n << ',' << format_double(r.step_residual) << ','
           << format_double(r.u_residual) << ',' << format_double(max_or_zero(r.z_residuals))
           << ',' << format_double(max_or_zero(r.fixed_point_residuals)) << ',';
        if (r.dist_to_known) os << format_double(*r.dist_to_known);
        os << ',' << format_double(r.wall_time_ms) << '\n';
    }
}

void write_trace_csv_file(const std::string& path, const std::vector<TraceRecord>& trace) {
    std::ofstream os(path, std::ios::binary);   // binary: keep LF on every platform
    if (!os) throw ConfigurationError("cannot open trace file for writing: " + path);
    write_trace_csv(os, trace);
    if (!os) throw ConfigurationError("failed writing trace file: " + path);
}

std::vector<TraceRow> read_trace_csv(std::istream& is) {
    std::vector<TraceRow> rows;
    std::string line;
    if (!std::getline(is, line)) throw ConfigurationError("trace CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceHeader) throw ConfigurationError("trace CSV: unexpected header: " + line);
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 7)
            throw ConfigurationError("trace CSV: expected 7 columns, got " +
                                     std::to_string(fields.size()));
        TraceRow r;
        r.n = static_cast<int>(parse_double(fields[0]));
        r.step_residual = parse_double(fields[1]);
        r.u_residual = parse_double(fields[2]);
        r.max_z_residual = parse_double(fields[3]);
        r.max_fixed_point_residual = parse_double(fields[4]);
        if (!fields[5].empty()) r.dist_to_known = parse_double(fields[5]);
        r.wall_time_ms = parse_double(fields[6]);
        rows.push_back(r);
    }
    return rows;
}

std::vector<TraceRow> read_trace_csv_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigurationError("cannot open trace file: " + path);
    return read_trace_csv(is);
}

std::string summary_json(const SolveResult& result) {
    nlohmann::json j;
    j["solution"] = std::vector<double>(result.solution.data(),
                                        result.solution.data() + result.solution.size());
    j["iterations"] = result.iterations;
    j["stop_reason"] = to_string(result.stop_reason);
    if (!result.trace.empty()) {
        const TraceRecord& last = result.trace.back();
        j["final_step_residual"] = last.step_residual;
        j["final_u_residual"] = last.u_residual;
        if (last.dist_to_known) j["dist_to_known"] = *last.dist_to_known;
        j["wall_time_ms"] = last.wall_time_ms;
    }
    return j.dump(2);
}

}  // namespace equihybrid
