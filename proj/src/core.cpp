#include "equihybrid/core.hpp"

#include "equihybrid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

namespace equihybrid {

double HalfSpace::violation(const Point& v) const {
    const double norm = a.norm();
    if (norm == 0.0) return b >= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return (a.dot(v) - b) / norm;
}

FeasibleSet FeasibleSet::whole_space(int dim, double sample_extent) {
    if (dim <= 0) throw ConfigurationError("whole_space: dim must be positive");
    FeasibleSet s;
    s.dim = dim;
    s.kind = Kind::WholeSpace;
    s.project = [](const Point& v) { return v; };
    s.contains = [](const Point&) { return true; };
    s.sample_lo = Point::Constant(dim, -sample_extent);
    s.sample_hi = Point::Constant(dim, sample_extent);
    return s;
}

FeasibleSet FeasibleSet::box(const Point& lo, const Point& hi) {
    if (lo.size() == 0 || lo.size() != hi.size())
        throw ConfigurationError("box: lo/hi must be nonempty and equally sized");
    if ((lo.array() > hi.array()).any())
        throw ConfigurationError("box: lo must not exceed hi");
    FeasibleSet s;
    s.dim = static_cast<int>(lo.size());
    s.kind = Kind::Box;
    s.box_lo = lo;
    s.box_hi = hi;
    s.project = [lo, hi](const Point& v) -> Point {
        return v.cwiseMax(lo).cwiseMin(hi);
    };
    s.contains = [lo, hi](const Point& v) {
        return (v.array() >= lo.array()).all() && (v.array() <= hi.array()).all();
    };
    s.sample_lo = lo;
    s.sample_hi = hi;
    return s;
}

FeasibleSet FeasibleSet::ball(const Point& center, double radius) {
    if (center.size() == 0) throw ConfigurationError("ball: empty center");
    if (!(radius > 0.0)) throw ConfigurationError("ball: radius must be positive");
    FeasibleSet s;
    s.dim = static_cast<int>(center.size());
    s.kind = Kind::Ball;
    s.project = [center, radius](const Point& v) -> Point {
        const Point d = v - center;
        const double n = d.norm();
        if (n <= radius) return v;
        return center + (radius / n) * d;
    };
    s.contains = [center, radius](const Point& v) {
        return (v - center).norm() <= radius;
    };
    s.sample_lo = (center.array() - radius).matrix();
    s.sample_hi = (center.array() + radius).matrix();
    return s;
}

FeasibleSet FeasibleSet::halfspaces(int dim, std::vector<HalfSpace> cuts) {
    if (dim <= 0) throw ConfigurationError("halfspaces: dim must be positive");
    for (const auto& h : cuts) {
        if (h.a.size() != dim) throw ConfigurationError("halfspaces: cut dimension mismatch");
        if (h.is_empty()) throw ConfigurationError("halfspaces: empty halfspace (zero normal, b < 0)");
    }
    FeasibleSet s;
    s.dim = dim;
    s.kind = Kind::HalfspaceList;
    const FeasibleSet free_space = whole_space(dim);
    ProjectionBudget tight;
    tight.max_sweeps = 20000;
    tight.tol = 1e-14;
    s.project = [free_space, cuts, tight](const Point& v) -> Point {
        return project_intersection(free_space, cuts, v, tight).point;
    };
    s.contains = [cuts](const Point& v) {
        const double slack = 1e-12 * (1.0 + v.norm());
        for (const auto& h : cuts)
            if (h.violation(v) > slack) return false;
        return true;
    };
    s.sample_lo = Point::Constant(dim, -10.0);
    s.sample_hi = Point::Constant(dim, 10.0);
    return s;
}

FeasibleSet FeasibleSet::custom(int dim,
                                std::function<Point(const Point&)> project,
                                std::function<bool(const Point&)> contains,
                                const Point& sample_lo,
                                const Point& sample_hi) {
    if (dim <= 0) throw ConfigurationError("custom set: dim must be positive");
    if (!project || !contains) throw ConfigurationError("custom set: project/contains required");
    if (sample_lo.size() != dim || sample_hi.size() != dim)
        throw ConfigurationError("custom set: sample bounds dimension mismatch");
    FeasibleSet s;
    s.dim = dim;
    s.kind = Kind::Custom;
    s.project = std::move(project);
    s.contains = std::move(contains);
    s.sample_lo = sample_lo;
    s.sample_hi = sample_hi;
    return s;
}

AlphaSchedule AlphaSchedule::harmonic() {
    AlphaSchedule a;
    a.fn_ = [](int n) { return 1.0 / (n + 1); };
    a.vanishes_ = true;
    a.limsup_below_one_ = true;
    a.label_ = "harmonic";
    return a;
}

AlphaSchedule AlphaSchedule::constant(double v) {
    if (!(v > 0.0 && v < 1.0))
        throw ConfigurationError("constant alpha must lie in (0, 1)");
    AlphaSchedule a;
    a.fn_ = [v](int) { return v; };
    a.vanishes_ = false;
    a.limsup_below_one_ = true;
    a.label_ = "constant";
    return a;
}

AlphaSchedule AlphaSchedule::geometric(double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ConfigurationError("geometric alpha ratio must lie in (0, 1)");
    AlphaSchedule a;
    a.fn_ = [ratio](int n) { return std::pow(ratio, n); };
    a.vanishes_ = true;
    a.limsup_below_one_ = true;
    a.label_ = "geometric";
    return a;
}

AlphaSchedule AlphaSchedule::custom(std::function<double(int)> fn,
                                    bool vanishes,
                                    bool limsup_below_one,
                                    std::string label) {
    if (!fn) throw ConfigurationError("custom alpha: callable required");
    AlphaSchedule a;
    a.fn_ = std::move(fn);
    a.vanishes_ = vanishes;
    a.limsup_below_one_ = limsup_below_one;
    a.label_ = std::move(label);
    return a;
}

WeightSchedule WeightSchedule::uniform() { return WeightSchedule{}; }

WeightSchedule WeightSchedule::mann_like(AlphaSchedule alpha) {
    WeightSchedule w;
    w.fn_ = [alpha](int n, int m) {
        std::vector<double> out(static_cast<std::size_t>(m) + 1);
        const double a = alpha(n);
        out[0] = a;
        for (int j = 1; j <= m; ++j) out[static_cast<std::size_t>(j)] = (1.0 - a) / m;
        return out;
    };
    w.label_ = "mann_like";
    return w;
}

WeightSchedule WeightSchedule::custom(std::function<std::vector<double>(int, int)> fn,
                                      std::string label) {
    if (!fn) throw ConfigurationError("custom weights: callable required");
    WeightSchedule w;
    w.fn_ = std::move(fn);
    w.label_ = std::move(label);
    return w;
}

double default_rho(const ProblemInstance& problem) {
    double bound = std::numeric_limits<double>::infinity();
    for (const auto& f : problem.bifunctions) {
        if (f.c1 > 0.0) bound = std::min(bound, 1.0 / (2.0 * f.c1));
        if (f.c2 > 0.0) bound = std::min(bound, 1.0 / (2.0 * f.c2));
    }
    if (!std::isfinite(bound)) return 1.0;
    return 0.8 * bound;
}

double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace {

std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Point sample_in(const FeasibleSet& C, std::mt19937_64& rng) {
    Point v(C.dim);
    for (int k = 0; k < C.dim; ++k) {
        const double t = uniform_unit(rng);
        v[k] = C.sample_lo[k] + t * (C.sample_hi[k] - C.sample_lo[k]);
    }
    return C.project(v);
}

}  // namespace

std::string ValidationReport::render() const {
    std::ostringstream os;
    os << "validation: " << (pass ? "PASS" : "FAIL") << "\n";
    for (const auto& c : checks) {
        os << "  " << c.name << ": " << (c.pass ? "PASS" : "FAIL")
           << " worst=" << format_fixed(c.worst);
        if (!c.detail.empty()) os << " (" << c.detail << ")";
        os << "\n";
    }
    return os.str();
}

ValidationReport validate_problem(const ProblemInstance& problem,
                                  const SolverConfig& cfg,
                                  int samples,
                                  std::uint64_t seed) {
    if (problem.dim <= 0) throw ConfigurationError("validate: problem dim must be positive");
    if (problem.C.dim != problem.dim)
        throw ConfigurationError("validate: feasible set dimension mismatch");
    for (std::size_t i = 0; i < problem.bifunctions.size(); ++i) {
        if (problem.bifunctions[i].dim != problem.dim)
            throw ConfigurationError("validate: bifunction " + std::to_string(i) +
                                     " dimension mismatch");
        if (!problem.bifunctions[i].eval)
            throw ConfigurationError("validate: bifunction " + std::to_string(i) +
                                     " missing eval");
    }
    for (std::size_t j = 0; j < problem.maps.size(); ++j) {
        if (problem.maps[j].dim != problem.dim)
            throw ConfigurationError("validate: map " + std::to_string(j) +
                                     " dimension mismatch");
        if (!problem.maps[j].apply)
            throw ConfigurationError("validate: map " + std::to_string(j) + " missing apply");
    }
    if (problem.known_solution && problem.known_solution->size() != problem.dim)
        throw ConfigurationError("validate: known_solution dimension mismatch");
    if (problem.bifunctions.empty() && problem.maps.empty())
        throw ConfigurationError("validate: need at least one bifunction or map");
    if (samples <= 0) throw ConfigurationError("validate: samples must be positive");

    constexpr double kRel = 1e-9;
    ValidationReport report;
    report.checks.push_back({"dimensions", true, 0.0, ""});

    std::mt19937_64 rng(seed);
    std::vector<Point> xs, ys, zs;
    xs.reserve(static_cast<std::size_t>(samples));
    ys.reserve(static_cast<std::size_t>(samples));
    zs.reserve(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        xs.push_back(sample_in(problem.C, rng));
        ys.push_back(sample_in(problem.C, rng));
        zs.push_back(sample_in(problem.C, rng));
    }

    for (std::size_t i = 0; i < problem.bifunctions.size(); ++i) {
        const auto& f = problem.bifunctions[i];
        const std::string tag = "f[" + std::to_string(i) + "]";

        ValidationCheck diag{tag + ".diagonal_zero", true, 0.0, ""};
        ValidationCheck pseudo{tag + ".pseudomonotone", true, 0.0, ""};
        ValidationCheck lip{tag + ".lipschitz_type", true, 0.0,
                            "c1=" + format_fixed(f.c1) + " c2=" + format_fixed(f.c2)};
        for (int s = 0; s < samples; ++s) {
            const Point& x = xs[static_cast<std::size_t>(s)];
            const Point& y = ys[static_cast<std::size_t>(s)];
            const Point& z = zs[static_cast<std::size_t>(s)];
            const double fxy = f.eval(x, y);
            const double fyx = f.eval(y, x);
            const double fyz = f.eval(y, z);
            const double fxz = f.eval(x, z);
            const double scale = std::abs(fxy) + std::abs(fyx);

            const double dv = std::abs(f.eval(x, x));
            if (dv > kRel * (1.0 + scale)) diag.pass = false;
            diag.worst = std::max(diag.worst, dv);

            // f(x, y) >= 0 must force f(y, x) <= 0, up to sampling tolerance.
            const double thr = kRel * (1.0 + scale);
            if (fxy >= -thr && fyx > thr) {
                pseudo.pass = false;
                pseudo.worst = std::max(pseudo.worst, std::min(fxy + thr, fyx));
            }

            const double q1 = f.c1 * (x - y).squaredNorm();
            const double q2 = f.c2 * (y - z).squaredNorm();
            const double lhs = fxy + fyz;
            const double rhs = fxz - q1 - q2;
            const double lip_scale =
                std::abs(fxy) + std::abs(fyz) + std::abs(fxz) + q1 + q2;
            const double deficit = rhs - lhs;
            if (deficit > kRel * (1.0 + lip_scale)) lip.pass = false;
            lip.worst = std::max(lip.worst, std::max(0.0, deficit));
        }
        report.checks.push_back(std::move(diag));
        report.checks.push_back(std::move(pseudo));
        report.checks.push_back(std::move(lip));
    }

    for (std::size_t j = 0; j < problem.maps.size(); ++j) {
        const auto& S = problem.maps[j];
        const std::string tag = "S[" + std::to_string(j) + "]";

        ValidationCheck nonexp{tag + ".nonexpansive", true, 0.0, ""};
        ValidationCheck range{tag + ".range_in_C", true, 0.0, ""};
        for (int s = 0; s < samples; ++s) {
            const Point& x = xs[static_cast<std::size_t>(s)];
            const Point& y = ys[static_cast<std::size_t>(s)];
            const Point Sx = S.apply(x);
            const Point Sy = S.apply(y);
            const double gap = (Sx - Sy).norm() - (x - y).norm();
            if (gap > kRel * (1.0 + (x - y).norm())) nonexp.pass = false;
            nonexp.worst = std::max(nonexp.worst, std::max(0.0, gap));

            const double escape = (Sx - problem.C.project(Sx)).norm();
            if (escape > kRel * (1.0 + Sx.norm())) range.pass = false;
            range.worst = std::max(range.worst, escape);
        }
        report.checks.push_back(std::move(nonexp));
        report.checks.push_back(std::move(range));
    }

    if (!problem.bifunctions.empty()) {
        const double rho = cfg.rho.value_or(default_rho(problem));
        double bound = std::numeric_limits<double>::infinity();
        for (const auto& f : problem.bifunctions) {
            if (f.c1 > 0.0) bound = std::min(bound, 1.0 / (2.0 * f.c1));
            if (f.c2 > 0.0) bound = std::min(bound, 1.0 / (2.0 * f.c2));
        }
        ValidationCheck rb{"rho_bound", true, 0.0,
                           "rho=" + format_fixed(rho) + " bound=" + format_fixed(bound)};
        if (!(rho > 0.0) || rho >= bound) {
            rb.pass = false;
            rb.worst = rho - bound;
        }
        report.checks.push_back(std::move(rb));
    }

    report.pass = true;
    for (const auto& c : report.checks) report.pass = report.pass && c.pass;
    return report;
}

}  // namespace equihybrid
