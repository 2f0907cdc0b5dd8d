#include "equihybrid/run_config.hpp"

#include "equihybrid/trace_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace equihybrid {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

int parse_int(const std::string& token, const std::string& what) {
    int v = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ConfigurationError(what + ": not an integer: '" + token + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& token, const std::string& what) {
    std::uint64_t v = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ConfigurationError(what + ": not a nonnegative integer: '" + token + "'");
    return v;
}

bool parse_bool(const std::string& token, const std::string& what) {
    if (token == "true" || token == "1") return true;
    if (token == "false" || token == "0") return false;
    throw ConfigurationError(what + ": expected true/false, got '" + token + "'");
}

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == delim) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(trim(cur));
    return out;
}

double parse_num(const std::string& token, const std::string& what) {
    try {
        return parse_double(token);
    } catch (const ConfigurationError&) {
        throw ConfigurationError(what + ": not a number: '" + token + "'");
    }
}

// Scalar broadcast or exact-length comma list.
Point parse_vector(const std::string& token, int n, const std::string& what) {
    const auto parts = split(token, ',');
    if (parts.size() == 1) return Point::Constant(n, parse_num(parts[0], what));
    if (static_cast<int>(parts.size()) != n)
        throw ConfigurationError(what + ": expected 1 or " + std::to_string(n) +
                                 " comma-separated values");
    Point v(n);
    for (int k = 0; k < n; ++k) v[k] = parse_num(parts[static_cast<std::size_t>(k)], what);
    return v;
}

class SectionReader {
public:
    SectionReader(const IniFile& ini, std::string name)
        : name_(std::move(name)) {
        const auto it = ini.sections.find(name_);
        if (it != ini.sections.end()) entries_ = &it->second;
    }

    bool present() const { return entries_ != nullptr; }

    std::optional<std::string> get(const std::string& key) {
        seen_.insert(key);
        if (!entries_) return std::nullopt;
        const auto it = entries_->find(key);
        if (it == entries_->end()) return std::nullopt;
        return it->second;
    }

    std::string require(const std::string& key) {
        auto v = get(key);
        if (!v)
            throw ConfigurationError("[" + name_ + "] missing required key '" + key + "'");
        return *v;
    }

    /// Every key must have been consumed through get/require.
    void finish() const {
        if (!entries_) return;
        for (const auto& [key, value] : *entries_) {
            (void)value;
            if (!seen_.count(key))
                throw ConfigurationError("[" + name_ + "] unknown key '" + key + "'");
        }
    }

private:
    std::string name_;
    const std::map<std::string, std::string>* entries_ = nullptr;
    std::set<std::string> seen_;
};

AlphaSchedule parse_alpha(const std::string& token) {
    if (token == "harmonic") return AlphaSchedule::harmonic();
    const auto colon = token.find(':');
    if (colon != std::string::npos) {
        const std::string head = token.substr(0, colon);
        const double v = parse_num(token.substr(colon + 1), "alpha");
        if (head == "constant") return AlphaSchedule::constant(v);
        if (head == "geometric") return AlphaSchedule::geometric(v);
    }
    throw ConfigurationError(
        "alpha: expected 'harmonic', 'constant:<v>' or 'geometric:<r>', got '" + token + "'");
}

Algorithm parse_algorithm(const std::string& token) {
    if (token == "mann") return Algorithm::mann;
    if (token == "halpern") return Algorithm::halpern;
    if (token == "averaged") return Algorithm::averaged;
    if (token == "equilibrium_only") return Algorithm::equilibrium_only;
    if (token == "vi") return Algorithm::vi;
    throw ConfigurationError("algorithm: unknown value '" + token + "'");
}

AffineVIFamily build_affine_vi(int dim, int fields, std::uint64_t seed,
                               const Point& lo, const Point& hi, const Point& solution) {
    if (fields < 1) throw ConfigurationError("affine_vi: fields must be at least 1");
    std::mt19937_64 rng(seed);
    std::vector<Eigen::MatrixXd> Ms;
    Ms.reserve(static_cast<std::size_t>(fields));
    for (int i = 0; i < fields; ++i) {
        if (dim == 1) {
            // Positive scalar slope in [0.5, 2.5].
            Ms.push_back(Eigen::MatrixXd::Constant(1, 1, 0.5 + 2.0 * uniform_unit(rng)));
            continue;
        }
        Eigen::MatrixXd G(dim, dim), K(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) G(r, c) = 2.0 * uniform_unit(rng) - 1.0;
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) K(r, c) = 2.0 * uniform_unit(rng) - 1.0;
        // PSD part plus a skew part: monotone but not symmetric.
        Eigen::MatrixXd Mi = G.transpose() * G / dim + 0.1 * Eigen::MatrixXd::Identity(dim, dim) +
                             0.3 * (K - K.transpose());
        Ms.push_back(std::move(Mi));
    }
    return make_affine_vi(Ms, solution, FeasibleSet::box(lo, hi));
}

}  // namespace

IniFile IniFile::parse(const std::string& text) {
    IniFile ini;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigurationError("config line " + std::to_string(lineno) +
                                         ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigurationError("config line " + std::to_string(lineno) +
                                         ": empty section name");
            if (ini.sections.count(section))
                throw ConfigurationError("config: duplicate section [" + section + "]");
            ini.sections[section];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigurationError("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        if (section.empty())
            throw ConfigurationError("config line " + std::to_string(lineno) +
                                     ": key outside any section");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigurationError("config line " + std::to_string(lineno) + ": empty key");
        auto& sec = ini.sections[section];
        if (sec.count(key))
            throw ConfigurationError("config: duplicate key '" + key + "' in [" + section + "]");
        sec[key] = value;
    }
    return ini;
}

IniFile IniFile::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigurationError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse(buf.str());
}

RunSpec parse_run_spec(const std::string& text) {
    const IniFile ini = IniFile::parse(text);
    for (const auto& [name, entries] : ini.sections) {
        (void)entries;
        if (name != "problem" && name != "solver" && name != "output" && name != "bench" &&
            name != "validate")
            throw ConfigurationError("config: unknown section [" + name + "]");
    }

    RunSpec spec;

    SectionReader solver(ini, "solver");
    if (auto v = solver.get("algorithm")) spec.algorithm = parse_algorithm(*v);
    if (auto v = solver.get("rho")) spec.solver.rho = parse_num(*v, "rho");
    if (auto v = solver.get("alpha")) spec.solver.alpha = parse_alpha(*v);
    if (auto v = solver.get("tol_step")) spec.solver.tol_step = parse_num(*v, "tol_step");
    if (auto v = solver.get("max_iter")) spec.solver.max_iter = parse_int(*v, "max_iter");
    if (auto v = solver.get("workers")) spec.solver.workers = parse_int(*v, "workers");
    if (auto v = solver.get("prox_max_iters"))
        spec.solver.prox_inner.max_iters = parse_int(*v, "prox_max_iters");
    if (auto v = solver.get("prox_tol")) spec.solver.prox_inner.tol = parse_num(*v, "prox_tol");
    if (auto v = solver.get("proj_max_sweeps"))
        spec.solver.projection_inner.max_sweeps = parse_int(*v, "proj_max_sweeps");
    if (auto v = solver.get("proj_tol"))
        spec.solver.projection_inner.tol = parse_num(*v, "proj_tol");
    solver.finish();

    SectionReader problem(ini, "problem");
    if (!problem.present()) throw ConfigurationError("config: missing [problem] section");
    const std::string type = problem.require("type");
    spec.problem_type = type;

    if (type == "paper1d") {
        Scalar1DSpec s;
        s.n_bifunctions = parse_int(problem.require("bifunctions"), "bifunctions");
        s.n_maps = parse_int(problem.require("maps"), "maps");
        spec.problem = make_paper_1d(s);
        const double x0 = problem.get("x0") ? parse_num(*problem.get("x0"), "x0") : 1.0;
        spec.x0 = Point::Constant(1, x0);
    } else if (type == "cournot") {
        CournotSpec s;
        s.firms = parse_int(problem.require("firms"), "firms");
        if (s.firms < 1) throw ConfigurationError("cournot: firms must be at least 1");
        s.alpha = parse_vector(problem.require("alpha"), s.firms, "alpha");
        s.beta = parse_vector(problem.require("beta"), s.firms, "beta");
        const auto tq = problem.get("tax_quad");
        s.tax_quad = tq ? parse_vector(*tq, s.firms, "tax_quad") : Point::Zero(s.firms);
        const auto tl = problem.get("tax_lin");
        s.tax_lin = tl ? parse_vector(*tl, s.firms, "tax_lin") : Point::Zero(s.firms);
        s.box_lo = parse_vector(problem.require("box_lo"), s.firms, "box_lo");
        s.box_hi = parse_vector(problem.require("box_hi"), s.firms, "box_hi");
        if (auto v = problem.get("fee")) s.with_fee_map = parse_bool(*v, "fee");
        const auto fq = problem.get("fee_quad");
        s.fee_quad = fq ? parse_vector(*fq, s.firms, "fee_quad") : Point::Zero(s.firms);
        const auto fl = problem.get("fee_lin");
        s.fee_lin = fl ? parse_vector(*fl, s.firms, "fee_lin") : Point::Zero(s.firms);
        const auto fa = problem.get("fee_abs");
        s.fee_abs = fa ? parse_vector(*fa, s.firms, "fee_abs") : Point::Zero(s.firms);
        if (auto v = problem.get("prox_scale")) s.prox_scale = parse_num(*v, "prox_scale");
        if (auto v = problem.get("known_solution"))
            s.known_solution = parse_vector(*v, s.firms, "known_solution");
        spec.problem = make_cournot(s);
        spec.x0 = parse_vector(problem.require("x0"), s.firms, "x0");
    } else if (type == "affine_vi") {
        const int dim = parse_int(problem.require("dim"), "dim");
        if (dim < 1) throw ConfigurationError("affine_vi: dim must be positive");
        const int fields =
            problem.get("fields") ? parse_int(*problem.get("fields"), "fields") : 3;
        const std::uint64_t seed =
            problem.get("seed") ? parse_u64(*problem.get("seed"), "seed") : 1;
        const Point lo = parse_vector(problem.require("box_lo"), dim, "box_lo");
        const Point hi = parse_vector(problem.require("box_hi"), dim, "box_hi");
        const Point sol = parse_vector(problem.require("solution"), dim, "solution");
        spec.vi = build_affine_vi(dim, fields, seed, lo, hi, sol);
        spec.x0 = parse_vector(problem.require("x0"), dim, "x0");
        if (spec.algorithm != Algorithm::vi)
            throw ConfigurationError("affine_vi problems require algorithm = vi");
    } else if (type == "toy") {
        const int dim = problem.get("dim") ? parse_int(*problem.get("dim"), "dim") : 1;
        const double hw =
            problem.get("half_width") ? parse_num(*problem.get("half_width"), "half_width") : 1.0;
        spec.problem = make_toy(dim, hw);
        spec.x0 = problem.get("x0") ? parse_vector(*problem.get("x0"), dim, "x0")
                                    : Point::Zero(dim);
    } else {
        throw ConfigurationError("problem type must be paper1d, cournot, affine_vi or toy; got '" +
                                 type + "'");
    }
    problem.finish();
    if (spec.algorithm == Algorithm::vi && type != "affine_vi")
        throw ConfigurationError("algorithm = vi requires an affine_vi problem");

    SectionReader output(ini, "output");
    if (auto v = output.get("trace")) spec.trace_path = *v;
    if (auto v = output.get("summary")) spec.summary_path = *v;
    output.finish();

    SectionReader bench(ini, "bench");
    if (auto v = bench.get("workers")) {
        spec.bench.workers.clear();
        for (const auto& tok : split(*v, ','))
            spec.bench.workers.push_back(parse_int(tok, "bench workers"));
        if (spec.bench.workers.empty())
            throw ConfigurationError("bench workers: empty list");
    }
    if (auto v = bench.get("repeats")) spec.bench.repeats = parse_int(*v, "repeats");
    if (auto v = bench.get("tols")) {
        spec.bench.tols.clear();
        for (const auto& tok : split(*v, ','))
            spec.bench.tols.push_back(parse_num(tok, "bench tols"));
        if (spec.bench.tols.empty()) throw ConfigurationError("bench tols: empty list");
    }
    if (auto v = bench.get("report")) spec.bench.report_path = *v;
    bench.finish();

    SectionReader validate(ini, "validate");
    if (auto v = validate.get("samples")) spec.validate.samples = parse_int(*v, "samples");
    if (auto v = validate.get("seed")) spec.validate.seed = parse_u64(*v, "seed");
    validate.finish();

    if (const char* env = std::getenv("EQUIHYBRID_WORKERS")) {
        const int w = parse_int(env, "EQUIHYBRID_WORKERS");
        if (w < 1) throw ConfigurationError("EQUIHYBRID_WORKERS must be at least 1");
        spec.solver.workers = w;
    }
    return spec;
}

RunSpec load_run_spec(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigurationError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_run_spec(buf.str());
}

SolveResult execute_run(const RunSpec& spec) {
    switch (spec.algorithm) {
        case Algorithm::mann: return solve_mann(spec.problem, spec.x0, spec.solver);
        case Algorithm::halpern: return solve_halpern(spec.problem, spec.x0, spec.solver);
        case Algorithm::averaged: return solve_averaged(spec.problem, spec.x0, spec.solver);
        case Algorithm::equilibrium_only:
            return solve_equilibrium_only(spec.problem, spec.x0, spec.solver);
        case Algorithm::vi:
            if (!spec.vi) throw ConfigurationError("execute_run: vi algorithm without vi family");
            return solve_vi(spec.vi->fields, spec.vi->C, spec.vi->L, spec.x0, spec.solver,
                            spec.vi->known_solution);
    }
    throw ConfigurationError("execute_run: unknown algorithm");
}

ProblemInstance problem_view(const RunSpec& spec) {
    if (spec.algorithm == Algorithm::vi) {
        if (!spec.vi) throw ConfigurationError("problem_view: vi algorithm without vi family");
        return embed_vi(spec.vi->fields, spec.vi->C, spec.vi->L, spec.vi->known_solution);
    }
    return spec.problem;
}

}  // namespace equihybrid
