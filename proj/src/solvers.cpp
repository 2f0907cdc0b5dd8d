#include "equihybrid/solvers.hpp"

#include "equihybrid/parallel.hpp"
#include "equihybrid/prox.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

namespace equihybrid {

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::step_tol: return "step_tol";
        case StopReason::fixed_point_exact: return "fixed_point_exact";
        case StopReason::max_iter: return "max_iter";
        case StopReason::infeasible_cut: return "infeasible_cut";
    }
    return "unknown";
}

namespace {

enum class Mode { mann, halpern, averaged, equilibrium_only };

// Residual threshold below which the iteration is declared exactly
// stationary; the Mann-type variants then carry a finite-termination
// certificate (the anchored variant never does and keeps iterating
// toward its step tolerance instead).
constexpr double kExactResidual = 1e-14;

double resolve_rho(const ProblemInstance& p, const SolverConfig& cfg) {
    const double rho = cfg.rho.value_or(default_rho(p));
    if (!(rho > 0.0)) throw ConfigurationError("solver: rho must be positive");
    double bound = std::numeric_limits<double>::infinity();
    for (const auto& f : p.bifunctions) {
        if (f.c1 > 0.0) bound = std::min(bound, 1.0 / (2.0 * f.c1));
        if (f.c2 > 0.0) bound = std::min(bound, 1.0 / (2.0 * f.c2));
    }
    if (rho >= bound)
        throw ConfigurationError("solver: rho violates the strict step bound rho < min(1/(2 c1), 1/(2 c2))");
    return rho;
}

void check_inputs(const ProblemInstance& p, const Point& x0, const SolverConfig& cfg, Mode mode) {
    if (p.dim <= 0) throw ConfigurationError("solver: problem dim must be positive");
    if (p.C.dim != p.dim) throw ConfigurationError("solver: feasible set dimension mismatch");
    if (!p.C.project || !p.C.contains)
        throw ConfigurationError("solver: feasible set lacks project/contains");
    for (const auto& f : p.bifunctions)
        if (f.dim != p.dim) throw ConfigurationError("solver: bifunction dimension mismatch");
    for (const auto& S : p.maps) {
        if (S.dim != p.dim) throw ConfigurationError("solver: map dimension mismatch");
        if (!S.apply) throw ConfigurationError("solver: map missing apply");
    }
    if (p.bifunctions.empty() && p.maps.empty())
        throw ConfigurationError("solver: need at least one bifunction or map");
    if (p.known_solution && p.known_solution->size() != p.dim)
        throw ConfigurationError("solver: known_solution dimension mismatch");
    if (x0.size() != p.dim) throw ConfigurationError("solver: x0 dimension mismatch");
    const double escape = (x0 - p.C.project(x0)).norm();
    if (escape > 1e-12 * (1.0 + x0.norm()))
        throw ConfigurationError("solver: x0 must lie in the feasible set");
    if (!(cfg.tol_step > 0.0)) throw ConfigurationError("solver: tol_step must be positive");
    if (cfg.max_iter < 1) throw ConfigurationError("solver: max_iter must be at least 1");
    if (cfg.workers < 1) throw ConfigurationError("solver: workers must be at least 1");

    switch (mode) {
        case Mode::mann:
            if (!cfg.alpha.limsup_below_one())
                throw ConfigurationError(
                    "solve_mann: alpha schedule must stay bounded away from 1");
            break;
        case Mode::halpern:
            if (!cfg.alpha.vanishes())
                throw ConfigurationError("solve_halpern: alpha schedule must vanish");
            break;
        case Mode::averaged:
            break;
        case Mode::equilibrium_only:
            if (!p.maps.empty())
                throw ConfigurationError("solve_equilibrium_only: problem must have no maps");
            if (p.bifunctions.empty())
                throw ConfigurationError("solve_equilibrium_only: needs at least one bifunction");
            break;
    }
}

std::vector<double> resolve_weights(const SolverConfig& cfg, int n, int M) {
    const WeightSchedule w = cfg.weights.value_or(WeightSchedule::uniform());
    std::vector<double> weights = w(n, M);
    if (static_cast<int>(weights.size()) != M + 1)
        throw ConfigurationError("solve_averaged: weight schedule must return M+1 entries");
    double sum = 0.0;
    for (double v : weights) {
        if (!(v >= 0.0 && v <= 1.0))
            throw ConfigurationError("solve_averaged: weights must lie in [0, 1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw ConfigurationError("solve_averaged: weights must sum to 1");
    return weights;
}

struct StageA {
    Point y;
    Point z;
};

struct StageB {
    Point value;        // relaxed/anchored u_j, or S_j(zbar) for averaged
    double fp_residual; // ||S_j(x) - x||
};

SolveResult run_engine(const ProblemInstance& p,
                       const Point& x0,
                       const SolverConfig& cfg,
                       Mode mode) {
    check_inputs(p, x0, cfg, mode);
    const int N = static_cast<int>(p.bifunctions.size());
    const int M = static_cast<int>(p.maps.size());
    const double rho = p.bifunctions.empty() ? 0.0 : resolve_rho(p, cfg);
    const ParallelPlan plan{cfg.workers};

    SolveResult result;
    Point x = x0;
    result.solution = x;

    const auto t0 = std::chrono::steady_clock::now();
    for (int n = 1; n <= cfg.max_iter; ++n) {
        double alpha = 0.0;
        std::vector<double> weights;
        if (mode == Mode::mann || mode == Mode::halpern) {
            alpha = cfg.alpha(n);
            if (!(alpha > 0.0 && alpha < 1.0))
                throw ConfigurationError("solver: alpha_n must lie in (0, 1)");
        } else if (mode == Mode::averaged) {
            weights = resolve_weights(cfg, n, M);
        }

        // Steps 1-3: per-bifunction extragradient pairs, then the component
        // farthest from the current iterate.
        std::vector<StageA> stage_a;
        if (N > 0) {
            stage_a = parallel_map(
                p.bifunctions,
                [&](std::size_t, const BifunctionOracle& f) {
                    ExtragradientPair pair =
                        extragradient_pair(f, x, rho, p.C, cfg.prox_inner);
                    return StageA{std::move(pair.first.y), std::move(pair.second.y)};
                },
                plan);
        }
        std::vector<double> z_residuals(static_cast<std::size_t>(N));
        Point zbar = x;
        if (N > 0) {
            std::vector<Point> zs(static_cast<std::size_t>(N));
            for (int i = 0; i < N; ++i) {
                zs[static_cast<std::size_t>(i)] = stage_a[static_cast<std::size_t>(i)].z;
                z_residuals[static_cast<std::size_t>(i)] =
                    (stage_a[static_cast<std::size_t>(i)].z - x).norm();
            }
            zbar = farthest_from(zs, x).point;
        }

        // Steps 4-5: per-map combinations and the farthest combined point.
        // With no maps the selected equilibrium point itself drives the cuts.
        std::vector<StageB> stage_b;
        if (M > 0) {
            stage_b = parallel_map(
                p.maps,
                [&](std::size_t j, const NonexpansiveMap& S) {
                    Point Sz = S.apply(zbar);
                    const double fp = (S.apply(x) - x).norm();
                    // The two-statement accumulation matches the weighted-sum
                    // code path coefficient for coefficient, so an averaged run
                    // with weights (alpha, 1 - alpha) reproduces these iterates
                    // bitwise.
                    Point value;
                    switch (mode) {
                        case Mode::mann:
                            value = alpha * x;
                            value += (1.0 - alpha) * Sz;
                            break;
                        case Mode::halpern:
                            value = alpha * x0;
                            value += (1.0 - alpha) * Sz;
                            break;
                        default:
                            value = std::move(Sz);
                            break;
                    }
                    (void)j;
                    return StageB{std::move(value), fp};
                },
                plan);
        }
        std::vector<double> fp_residuals(static_cast<std::size_t>(M));
        for (int j = 0; j < M; ++j)
            fp_residuals[static_cast<std::size_t>(j)] = stage_b[static_cast<std::size_t>(j)].fp_residual;

        Point ubar;
        if (M == 0) {
            ubar = zbar;
        } else if (mode == Mode::averaged) {
            ubar = weights[0] * x;
            for (int j = 1; j <= M; ++j)
                ubar += weights[static_cast<std::size_t>(j)] *
                        stage_b[static_cast<std::size_t>(j - 1)].value;
        } else {
            std::vector<Point> us(static_cast<std::size_t>(M));
            for (int j = 0; j < M; ++j) us[static_cast<std::size_t>(j)] = stage_b[static_cast<std::size_t>(j)].value;
            ubar = farthest_from(us, x).point;
        }

        // Steps 6-7: progress + anchor cuts, then project the start point
        // onto their intersection with C.
        const HalfSpace progress = (mode == Mode::halpern)
                                       ? halpern_cut(x0, x, ubar, alpha)
                                       : mann_cut(x, ubar);
        const HalfSpace anchor = anchor_cut(x0, x);

        Point x_next;
        try {
            x_next = project_intersection(p.C, {progress, anchor}, x0,
                                          cfg.projection_inner)
                         .point;
        } catch (const InfeasibilityError&) {
            result.stop_reason = StopReason::infeasible_cut;
            result.solution = x;
            result.iterations = n - 1;
            return result;
        }

        const double step_residual = (x_next - x).norm();
        const double u_residual = (ubar - x).norm();
        const double wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();

        TraceRecord rec;
        rec.n = n;
        rec.x = x_next;
        rec.step_residual = step_residual;
        rec.u_residual = u_residual;
        rec.z_residuals = z_residuals;
        rec.fixed_point_residuals = fp_residuals;
        if (p.known_solution) rec.dist_to_known = (x_next - *p.known_solution).norm();
        rec.wall_time_ms = wall_ms;
        result.trace.push_back(std::move(rec));

        if (cfg.record_details) {
            IterationDetail d;
            d.n = n;
            d.alpha = (mode == Mode::averaged && !weights.empty()) ? weights[0] : alpha;
            d.x = x;
            d.y.reserve(stage_a.size());
            d.z.reserve(stage_a.size());
            for (auto& sa : stage_a) {
                d.y.push_back(sa.y);
                d.z.push_back(sa.z);
            }
            d.zbar = zbar;
            d.u.reserve(stage_b.size());
            for (auto& sb : stage_b) d.u.push_back(sb.value);
            d.ubar = ubar;
            d.progress_cut = progress;
            d.anchor = anchor;
            d.x_next = x_next;
            result.details.push_back(std::move(d));
        }

        result.iterations = n;
        const double worst = std::max(step_residual, u_residual);
        if (mode != Mode::halpern && worst <= kExactResidual) {
            result.stop_reason = StopReason::fixed_point_exact;
            result.solution = std::move(x_next);
            return result;
        }
        if (step_residual <= cfg.tol_step && u_residual <= cfg.tol_step) {
            result.stop_reason = StopReason::step_tol;
            result.solution = std::move(x_next);
            return result;
        }
        x = std::move(x_next);
    }
    result.stop_reason = StopReason::max_iter;
    result.solution = std::move(x);
    return result;
}

}  // namespace

SolveResult solve_mann(const ProblemInstance& problem, const Point& x0, const SolverConfig& cfg) {
    return run_engine(problem, x0, cfg, Mode::mann);
}

SolveResult solve_halpern(const ProblemInstance& problem, const Point& x0, const SolverConfig& cfg) {
    return run_engine(problem, x0, cfg, Mode::halpern);
}

SolveResult solve_averaged(const ProblemInstance& problem, const Point& x0, const SolverConfig& cfg) {
    return run_engine(problem, x0, cfg, Mode::averaged);
}

SolveResult solve_equilibrium_only(const ProblemInstance& problem,
                                   const Point& x0,
                                   const SolverConfig& cfg) {
    return run_engine(problem, x0, cfg, Mode::equilibrium_only);
}

ProblemInstance embed_vi(const std::vector<VectorField>& fields,
                         const FeasibleSet& C,
                         double L,
                         const std::optional<Point>& known_solution) {
    if (fields.empty()) throw ConfigurationError("embed_vi: need at least one field");
    if (!(L > 0.0)) throw ConfigurationError("embed_vi: L must be positive");
    for (const auto& A : fields) {
        if (A.dim != C.dim) throw ConfigurationError("embed_vi: field dimension mismatch");
        if (!A.apply) throw ConfigurationError("embed_vi: field missing apply");
    }
    // The linearized bifunction <A_i(w), y - w> turns both projected forward
    // steps into the two anchored prox solves.
    ProblemInstance p;
    p.dim = C.dim;
    p.C = C;
    p.known_solution = known_solution;
    p.bifunctions.reserve(fields.size());
    for (const auto& A : fields) {
        BifunctionOracle f;
        f.dim = C.dim;
        f.c1 = L / 2.0;
        f.c2 = L / 2.0;
        f.eval = [A](const Point& xx, const Point& yy) { return A.apply(xx).dot(yy - xx); };
        f.prox_closed = [A](const Point& w, const Point& anchor, double rho,
                            const FeasibleSet& set) {
            return set.project(anchor - rho * A.apply(w));
        };
        p.bifunctions.push_back(std::move(f));
    }
    return p;
}

SolveResult solve_vi(const std::vector<VectorField>& fields,
                     const FeasibleSet& C,
                     double L,
                     const Point& x0,
                     const SolverConfig& cfg,
                     const std::optional<Point>& known_solution) {
    if (cfg.rho && !(*cfg.rho < 1.0 / L))
        throw ConfigurationError("solve_vi: requires rho < 1/L strictly");
    return run_engine(embed_vi(fields, C, L, known_solution), x0, cfg,
                      Mode::equilibrium_only);
}

}  // namespace equihybrid
