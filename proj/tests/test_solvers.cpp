#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "equihybrid/core.hpp"
#include "equihybrid/problems.hpp"
#include "equihybrid/solvers.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

using namespace equihybrid;

namespace {

Point pt1(double a) {
    Point p(1);
    p << a;
    return p;
}

bool bits_equal(const Point& a, const Point& b) {
    if (a.size() != b.size()) return false;
    return std::memcmp(a.data(), b.data(), sizeof(double) * std::size_t(a.size())) == 0;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// ---------------------------------------------------------------------------
// Plain-double reference implementations of the scalar benchmark dynamics.
// Written independently of the library: scalar arithmetic, explicit selection
// loops, and the one-dimensional form of the cut projection (nearest point of
// [0,1] intersected with "v <= boundary" constraints, seen from x0 = 1).
// ---------------------------------------------------------------------------

double margin_fn(double x, double xi) {
    if (x <= xi) return 0.0;
    const double d = x - xi;
    return std::exp(d) + std::sin(d) - 1.0;
}

double map_fn(double x, int j) {
    return std::pow(x, double(j)) * std::pow(std::sin(x), double(j - 1)) / (2.0 * j - 1.0);
}

struct RefRun {
    std::vector<double> xs;   // x after each iteration
    int iterations = 0;
    bool exact_stop = false;
    bool tol_stop = false;
};

enum class RefKind { mann, halpern, averaged };

RefRun reference_scalar(RefKind kind, int N, int M, double rho, double tol, int max_iter,
                        double geo_alpha = 0.0) {
    RefRun run;
    const double x0 = 1.0;
    double x = x0;
    for (int n = 1; n <= max_iter; ++n) {
        const double alpha = geo_alpha > 0.0 ? std::pow(geo_alpha, n) : 1.0 / (n + 1);

        double zbar = x;
        double best = -1.0;
        for (int i = 1; i <= N; ++i) {
            const double xi = double(i) / (N + 1);
            const double y = clamp01(x - rho * margin_fn(x, xi));
            const double z = clamp01(x - rho * margin_fn(y, xi));
            const double d = std::abs(z - x);
            if (d > best) {
                best = d;
                zbar = z;
            }
        }

        double ubar = zbar;
        if (M > 0) {
            if (kind == RefKind::averaged) {
                const double w = 1.0 / (M + 1);
                ubar = w * x;
                for (int j = 1; j <= M; ++j) ubar += w * map_fn(zbar, j);
            } else {
                best = -1.0;
                for (int j = 1; j <= M; ++j) {
                    const double s = map_fn(zbar, j);
                    const double u =
                        (kind == RefKind::halpern) ? alpha * x0 + (1.0 - alpha) * s
                                                   : alpha * x + (1.0 - alpha) * s;
                    const double d = std::abs(u - x);
                    if (d > best) {
                        best = d;
                        ubar = u;
                    }
                }
            }
        }

        // Constraint boundaries (all upper bounds in these dynamics).
        const double inf = std::numeric_limits<double>::infinity();
        double progress = inf;
        if (kind == RefKind::halpern) {
            const double a = 2.0 * (alpha * (x0 - ubar) + (1.0 - alpha) * (x - ubar));
            const double b = alpha * (x0 - ubar) * (x0 + ubar) +
                             (1.0 - alpha) * (x - ubar) * (x + ubar);
            if (a > 0.0) progress = b / a;
            REQUIRE(a >= 0.0);
        } else if (ubar != x) {
            progress = 0.5 * (x + ubar);
            REQUIRE(ubar < x);
        }
        const double anchor = (x == x0) ? inf : x;
        const double xn1 = std::min({1.0, progress, anchor});
        REQUIRE(xn1 >= 0.0);

        run.xs.push_back(xn1);
        run.iterations = n;
        const double step_res = std::abs(xn1 - x);
        const double u_res = std::abs(ubar - x);
        if (kind != RefKind::halpern && std::max(step_res, u_res) <= 1e-14) {
            run.exact_stop = true;
            return run;
        }
        if (step_res <= tol && u_res <= tol) {
            run.tol_stop = true;
            return run;
        }
        x = xn1;
    }
    return run;
}

// Classical single-field hybrid-extragradient reference for a scalar affine
// field m (x - xstar) on [0, hi], started at x0 > xstar.
RefRun reference_vi_scalar(const std::vector<double>& slopes, double xstar, double hi,
                           double x0, double rho, double tol, int max_iter) {
    RefRun run;
    auto clamp = [hi](double v) { return std::clamp(v, 0.0, hi); };
    double x = x0;
    for (int n = 1; n <= max_iter; ++n) {
        double zbar = x;
        double best = -1.0;
        for (double m : slopes) {
            const double y = clamp(x - rho * m * (x - xstar));
            const double z = clamp(x - rho * m * (y - xstar));
            const double d = std::abs(z - x);
            if (d > best) {
                best = d;
                zbar = z;
            }
        }
        const double inf = std::numeric_limits<double>::infinity();
        const double progress = (zbar == x) ? inf : 0.5 * (x + zbar);
        if (zbar != x) REQUIRE(zbar < x);
        const double anchor = (x == x0) ? inf : x;
        const double xn1 = std::min({hi, progress, anchor});
        run.xs.push_back(xn1);
        run.iterations = n;
        const double step_res = std::abs(xn1 - x);
        const double u_res = std::abs(zbar - x);
        if (std::max(step_res, u_res) <= 1e-14) {
            run.exact_stop = true;
            return run;
        }
        if (step_res <= tol && u_res <= tol) {
            run.tol_stop = true;
            return run;
        }
        x = xn1;
    }
    return run;
}

void compare_with_reference(const SolveResult& got, const RefRun& ref, double per_step_tol) {
    REQUIRE(got.iterations == ref.iterations);
    REQUIRE(got.trace.size() == std::size_t(ref.iterations));
    for (int k = 0; k < ref.iterations; ++k) {
        const double lib = got.trace[std::size_t(k)].x[0];
        const double want = ref.xs[std::size_t(k)];
        CHECK(std::abs(lib - want) <= per_step_tol);
    }
    CHECK(std::abs(got.solution[0] - ref.xs.back()) <= per_step_tol);
}

}   // namespace

// ---------------------------------------------------------------------------
// Trivial fixed-point instances.
// ---------------------------------------------------------------------------

TEST_CASE("toy instance certifies its fixed point in one iteration") {
    const auto p = make_toy(2);
    Point x0(2);
    x0 << 0.3, -0.5;
    SolverConfig cfg;

    const auto mann = solve_mann(p, x0, cfg);
    CHECK(mann.iterations == 1);
    CHECK(mann.stop_reason == StopReason::fixed_point_exact);
    CHECK(bits_equal(mann.solution, x0));
    CHECK(mann.trace.size() == 1);

    const auto avg = solve_averaged(p, x0, cfg);
    CHECK(avg.iterations == 1);
    CHECK(avg.stop_reason == StopReason::fixed_point_exact);

    // The anchored variant never claims the exact certificate.
    cfg.alpha = AlphaSchedule::harmonic();
    const auto hal = solve_halpern(p, x0, cfg);
    CHECK(hal.iterations == 1);
    CHECK(hal.stop_reason == StopReason::step_tol);
    CHECK(bits_equal(hal.solution, x0));
}

// ---------------------------------------------------------------------------
// Scalar benchmark family vs. the plain-double references.
// ---------------------------------------------------------------------------

TEST_CASE("relaxation-mode iterates match the scalar reference step for step") {
    Scalar1DSpec s;
    s.n_bifunctions = 5;
    s.n_maps = 5;
    const auto p = make_paper_1d(s);
    SolverConfig cfg;
    cfg.rho = 0.2;
    cfg.tol_step = 1e-7;
    cfg.max_iter = 300;

    const auto got = solve_mann(p, pt1(1.0), cfg);
    const auto ref = reference_scalar(RefKind::mann, 5, 5, 0.2, 1e-7, 300);
    CHECK(ref.tol_stop);
    CHECK(got.stop_reason == StopReason::step_tol);
    compare_with_reference(got, ref, 1e-12);

    // The family's common solution is 0; the run must approach it.
    REQUIRE(p.known_solution.has_value());
    CHECK(std::abs(got.solution[0]) <= 1e-5);
    REQUIRE(got.trace.back().dist_to_known.has_value());
    CHECK(*got.trace.back().dist_to_known == doctest::Approx(std::abs(got.solution[0])));
}

TEST_CASE("anchored-mode iterates match the scalar reference step for step") {
    Scalar1DSpec s;
    s.n_bifunctions = 5;
    s.n_maps = 5;
    const auto p = make_paper_1d(s);
    SolverConfig cfg;
    cfg.rho = 0.2;
    cfg.tol_step = 1e-7;
    cfg.max_iter = 300;

    // A geometrically vanishing anchor weight: the harmonic default leaves a
    // slowly decaying pull toward x0 that needs far more than 300 iterations
    // to pass a 1e-7 residual test.
    cfg.alpha = AlphaSchedule::geometric(0.5);

    const auto got = solve_halpern(p, pt1(1.0), cfg);
    const auto ref = reference_scalar(RefKind::halpern, 5, 5, 0.2, 1e-7, 300, 0.5);
    CHECK(ref.tol_stop);
    CHECK(got.stop_reason == StopReason::step_tol);
    compare_with_reference(got, ref, 1e-12);
    CHECK(std::abs(got.solution[0]) <= 1e-4);
}

TEST_CASE("averaged-mode iterates match the scalar reference step for step") {
    Scalar1DSpec s;
    s.n_bifunctions = 4;
    s.n_maps = 3;
    const auto p = make_paper_1d(s);
    SolverConfig cfg;
    cfg.rho = 0.2;
    cfg.tol_step = 1e-7;
    cfg.max_iter = 300;

    const auto got = solve_averaged(p, pt1(1.0), cfg);
    const auto ref = reference_scalar(RefKind::averaged, 4, 3, 0.2, 1e-7, 300);
    compare_with_reference(got, ref, 1e-12);
}

TEST_CASE("averaged with one map and weights (alpha, 1-alpha) reproduces the relaxation mode") {
    Scalar1DSpec s;
    s.n_bifunctions = 3;
    s.n_maps = 1;
    const auto p = make_paper_1d(s);
    SolverConfig cfg;
    cfg.rho = 0.2;
    cfg.tol_step = 1e-8;
    cfg.max_iter = 200;

    const auto mann = solve_mann(p, pt1(1.0), cfg);

    SolverConfig cfg_avg = cfg;
    cfg_avg.weights = WeightSchedule::mann_like(cfg.alpha);
    const auto avg = solve_averaged(p, pt1(1.0), cfg_avg);

    REQUIRE(avg.iterations == mann.iterations);
    CHECK(avg.stop_reason == mann.stop_reason);
    for (std::size_t k = 0; k < avg.trace.size(); ++k) {
        CHECK(bits_equal(avg.trace[k].x, mann.trace[k].x));
        CHECK(avg.trace[k].step_residual == mann.trace[k].step_residual);
        CHECK(avg.trace[k].u_residual == mann.trace[k].u_residual);
    }
    CHECK(bits_equal(avg.solution, mann.solution));
}

TEST_CASE("equilibrium-only mode converges to the nearest solution-set point") {
    // With N = 4 bifunctions the solution set is [0, 1/5]; started from 1 the
    // anchored projection machinery must land on its rightmost point 0.2.
    Scalar1DSpec s;
    s.n_bifunctions = 4;
    s.n_maps = 0;
    const auto p = make_paper_1d(s);
    SolverConfig cfg;
    cfg.rho = 0.2;
    cfg.tol_step = 1e-8;
    cfg.max_iter = 500;
    const auto got = solve_equilibrium_only(p, pt1(1.0), cfg);
    CHECK(got.stop_reason == StopReason::step_tol);
    CHECK(got.solution[0] == doctest::Approx(0.2).epsilon(1e-5));

    // Maps present: mode rejected.
    Scalar1DSpec sm;
    sm.n_bifunctions = 1;
    sm.n_maps = 1;
    const auto pm = make_paper_1d(sm);
    CHECK_THROWS_AS(solve_equilibrium_only(pm, pt1(1.0), cfg), ConfigurationError);
}

TEST_CASE("no-map problems drive the cuts with the selected equilibrium point") {
    Scalar1DSpec s;
    s.n_bifunctions = 3;
    s.n_maps = 0;
    const auto p = make_paper_1d(s);
    SolverConfig cfg;
    cfg.rho = 0.2;
    cfg.max_iter = 40;
    cfg.tol_step = 1e-12;
    cfg.record_details = true;
    const auto got = solve_mann(p, pt1(1.0), cfg);
    REQUIRE_FALSE(got.details.empty());
    for (const auto& d : got.details) CHECK(bits_equal(d.ubar, d.zbar));
}

// ---------------------------------------------------------------------------
// Pure fixed-point problems (no bifunctions).
// ---------------------------------------------------------------------------

TEST_CASE("map-only problems are driven to the common fixed point") {
    ProblemInstance p;
    p.dim = 2;
    p.C = FeasibleSet::box(Point::Constant(2, -1.0), Point::Constant(2, 1.0));
    NonexpansiveMap S;
    S.dim = 2;
    S.apply = [](const Point& x) { return Point(0.5 * x); };
    p.maps.push_back(S);
    p.known_solution = Point::Zero(2);

    Point x0(2);
    x0 << 0.9, -0.7;
    SolverConfig cfg;
    // The planar anchored projections zigzag, so convergence is slow; pick a
    // tolerance the run reaches in a few thousand iterations. The stopping
    // rule itself bounds the answer: here u_res = (1 - alpha)|x|/2 >= |x|/4,
    // so stopping at 1e-4 forces |x| <= 4e-4 and the final step adds <= 1e-4.
    cfg.tol_step = 1e-4;
    cfg.max_iter = 5000;
    const auto got = solve_mann(p, x0, cfg);
    CHECK(got.solution.norm() <= 1e-3);
    CHECK(got.stop_reason == StopReason::step_tol);
    // dist_to_known recorded and decreasing overall.
    REQUIRE(got.trace.front().dist_to_known.has_value());
    CHECK(*got.trace.back().dist_to_known < *got.trace.front().dist_to_known);
}

// ---------------------------------------------------------------------------
// Per-iteration invariants on a known-solution instance.
// ---------------------------------------------------------------------------

TEST_CASE("per-iteration invariants hold along the relaxation-mode run") {
    Scalar1DSpec s;
    s.n_bifunctions = 3;
    s.n_maps = 3;
    const auto p = make_paper_1d(s);
    const double rho = 0.2;
    SolverConfig cfg;
    cfg.rho = rho;
    cfg.tol_step = 1e-10;
    cfg.max_iter = 200;
    cfg.record_details = true;
    const auto got = solve_mann(p, pt1(1.0), cfg);
    REQUIRE(got.details.size() == std::size_t(got.iterations));

    const Point xstar = *p.known_solution;
    const Point x0 = pt1(1.0);
    double prev_anchor_dist = 0.0;
    for (std::size_t k = 0; k < got.details.size(); ++k) {
        const auto& d = got.details[k];

        // Distance to the solution never grows through the combination step.
        CHECK((d.ubar - xstar).norm() <= (d.x - xstar).norm() + 1e-10);

        // Both cuts contain the solution.
        CHECK(d.progress_cut.violation(xstar) <= 1e-10);
        CHECK(d.anchor.violation(xstar) <= 1e-10);

        // The new iterate satisfies both cuts and stays feasible.
        CHECK(d.progress_cut.violation(d.x_next) <= 1e-8);
        CHECK(d.anchor.violation(d.x_next) <= 1e-8);
        CHECK(p.C.contains(d.x_next));

        // Anchor distances are monotonically nondecreasing.
        const double anchor_dist = (d.x_next - x0).norm();
        CHECK(anchor_dist >= prev_anchor_dist - 1e-10);
        prev_anchor_dist = anchor_dist;

        // Extragradient contraction with the declared constants
        // (c1 = c2 = 2): ||z - x*||^2 <= ||x - x*||^2
        //   - (1 - 2 rho c1)||y - x||^2 - (1 - 2 rho c2)||z - y||^2.
        for (std::size_t i = 0; i < d.z.size(); ++i) {
            const double lhs = (d.z[i] - xstar).squaredNorm();
            const double rhs = (d.x - xstar).squaredNorm() -
                               (1.0 - 2.0 * rho * 2.0) * (d.y[i] - d.x).squaredNorm() -
                               (1.0 - 2.0 * rho * 2.0) * (d.z[i] - d.y[i]).squaredNorm();
            CHECK(lhs <= rhs + 1e-10);
        }
    }

    // Residual families all dip below 1e-4 over the run.
    double min_step = 1e300, min_u = 1e300, min_z = 1e300, min_fp = 1e300;
    for (const auto& r : got.trace) {
        min_step = std::min(min_step, r.step_residual);
        min_u = std::min(min_u, r.u_residual);
        double zs = 0.0, fs = 0.0;
        for (double v : r.z_residuals) zs = std::max(zs, v);
        for (double v : r.fixed_point_residuals) fs = std::max(fs, v);
        min_z = std::min(min_z, zs);
        min_fp = std::min(min_fp, fs);
    }
    CHECK(min_step <= 1e-4);
    CHECK(min_u <= 1e-4);
    CHECK(min_z <= 1e-4);
    CHECK(min_fp <= 1e-4);
}

// ---------------------------------------------------------------------------
// Configuration rejection.
// ---------------------------------------------------------------------------

TEST_CASE("solver rejects invalid configuration") {
    Scalar1DSpec s;
    s.n_bifunctions = 2;
    s.n_maps = 2;
    const auto p = make_paper_1d(s);
    SolverConfig cfg;

    SUBCASE("rho at the bound") {
        cfg.rho = 0.25;
        CHECK_THROWS_WITH_AS(solve_mann(p, pt1(1.0), cfg),
                             doctest::Contains("bound"), ConfigurationError);
    }
    SUBCASE("rho above the bound") {
        cfg.rho = 0.3;
        CHECK_THROWS_AS(solve_mann(p, pt1(1.0), cfg), ConfigurationError);
    }
    SUBCASE("negative rho") {
        cfg.rho = -0.1;
        CHECK_THROWS_AS(solve_mann(p, pt1(1.0), cfg), ConfigurationError);
    }
    SUBCASE("x0 outside the feasible set") {
        CHECK_THROWS_AS(solve_mann(p, pt1(1.5), cfg), ConfigurationError);
    }
    SUBCASE("x0 dimension mismatch") {
        Point bad(2);
        bad << 0.5, 0.5;
        CHECK_THROWS_AS(solve_mann(p, bad, cfg), ConfigurationError);
    }
    SUBCASE("nonpositive tolerance") {
        cfg.tol_step = 0.0;
        CHECK_THROWS_AS(solve_mann(p, pt1(1.0), cfg), ConfigurationError);
    }
    SUBCASE("nonpositive iteration budget") {
        cfg.max_iter = 0;
        CHECK_THROWS_AS(solve_mann(p, pt1(1.0), cfg), ConfigurationError);
    }
    SUBCASE("nonpositive workers") {
        cfg.workers = 0;
        CHECK_THROWS_AS(solve_mann(p, pt1(1.0), cfg), ConfigurationError);
    }
    SUBCASE("anchored mode requires a vanishing schedule") {
        cfg.alpha = AlphaSchedule::constant(0.5);
        CHECK_THROWS_AS(solve_halpern(p, pt1(1.0), cfg), ConfigurationError);
    }
    SUBCASE("relaxation mode accepts a constant schedule") {
        cfg.alpha = AlphaSchedule::constant(0.5);
        cfg.max_iter = 50;
        CHECK_NOTHROW(solve_mann(p, pt1(1.0), cfg));
    }
    SUBCASE("relaxation mode requires limsup below one") {
        cfg.alpha = AlphaSchedule::custom([](int n) { return 1.0 - 1.0 / (n + 1); },
                                          false, false, "to-one");
        CHECK_THROWS_AS(solve_mann(p, pt1(1.0), cfg), ConfigurationError);
    }
    SUBCASE("alpha values outside (0,1) are rejected at runtime") {
        cfg.alpha = AlphaSchedule::custom([](int) { return 1.2; }, true, true, "bad");
        CHECK_THROWS_AS(solve_mann(p, pt1(1.0), cfg), ConfigurationError);
    }
    SUBCASE("weights must sum to one") {
        cfg.weights = WeightSchedule::custom(
            [](int, int m) { return std::vector<double>(std::size_t(m) + 1, 0.45); },
            "short");
        CHECK_THROWS_AS(solve_averaged(p, pt1(1.0), cfg), ConfigurationError);
    }
    SUBCASE("weights must have M+1 entries") {
        cfg.weights = WeightSchedule::custom(
            [](int, int) { return std::vector<double>{1.0}; }, "wrong-size");
        CHECK_THROWS_AS(solve_averaged(p, pt1(1.0), cfg), ConfigurationError);
    }
    SUBCASE("empty problem") {
        ProblemInstance empty;
        empty.dim = 1;
        empty.C = FeasibleSet::box(pt1(0.0), pt1(1.0));
        CHECK_THROWS_AS(solve_mann(empty, pt1(0.5), cfg), ConfigurationError);
    }
}

// ---------------------------------------------------------------------------
// Infeasible-cut stop.
// ---------------------------------------------------------------------------

TEST_CASE("a misbehaving oracle that escapes C yields the infeasible-cut stop") {
    // prox values far outside C produce a progress cut disjoint from C; the
    // solver must report infeasible_cut and return the last consistent
    // iterate instead of looping or fabricating a point.
    ProblemInstance p;
    p.dim = 1;
    p.C = FeasibleSet::box(pt1(0.0), pt1(1.0));
    BifunctionOracle f;
    f.dim = 1;
    f.c1 = 1.0;
    f.c2 = 1.0;
    f.eval = [](const Point&, const Point&) { return 0.0; };
    f.prox_closed = [](const Point&, const Point&, double, const FeasibleSet&) {
        return Point::Constant(1, -5.0);
    };
    p.bifunctions.push_back(f);

    SolverConfig cfg;
    cfg.rho = 0.1;
    const auto got = solve_mann(p, pt1(1.0), cfg);
    CHECK(got.stop_reason == StopReason::infeasible_cut);
    CHECK(got.iterations == 0);
    CHECK(got.solution[0] == 1.0);
    CHECK(got.trace.empty());
}

// ---------------------------------------------------------------------------
// Worker-count determinism at the solver level.
// ---------------------------------------------------------------------------

TEST_CASE("solver traces are bitwise identical across worker counts") {
    Scalar1DSpec s;
    s.n_bifunctions = 6;
    s.n_maps = 4;
    const auto p = make_paper_1d(s);
    SolverConfig cfg;
    cfg.rho = 0.2;
    cfg.tol_step = 1e-8;
    cfg.max_iter = 120;

    const auto base = solve_mann(p, pt1(1.0), cfg);
    for (int workers : {2, 3, 8}) {
        SolverConfig cw = cfg;
        cw.workers = workers;
        const auto got = solve_mann(p, pt1(1.0), cw);
        REQUIRE(got.iterations == base.iterations);
        CHECK(got.stop_reason == base.stop_reason);
        for (std::size_t k = 0; k < got.trace.size(); ++k) {
            CHECK(bits_equal(got.trace[k].x, base.trace[k].x));
            CHECK(got.trace[k].step_residual == base.trace[k].step_residual);
            CHECK(got.trace[k].u_residual == base.trace[k].u_residual);
            CHECK(got.trace[k].z_residuals == base.trace[k].z_residuals);
            CHECK(got.trace[k].fixed_point_residuals ==
                  base.trace[k].fixed_point_residuals);
        }
        CHECK(bits_equal(got.solution, base.solution));
    }
}

// ---------------------------------------------------------------------------
// Trace contract.
// ---------------------------------------------------------------------------

TEST_CASE("trace length equals iterations and records are well formed") {
    Scalar1DSpec s;
    s.n_bifunctions = 2;
    s.n_maps = 2;
    const auto p = make_paper_1d(s);
    SolverConfig cfg;
    cfg.rho = 0.2;
    cfg.tol_step = 1e-9;
    cfg.max_iter = 64;
    const auto got = solve_mann(p, pt1(1.0), cfg);
    REQUIRE(got.trace.size() == std::size_t(got.iterations));
    double prev_wall = 0.0;
    for (std::size_t k = 0; k < got.trace.size(); ++k) {
        const auto& r = got.trace[k];
        CHECK(r.n == int(k) + 1);
        CHECK(r.z_residuals.size() == 2);
        CHECK(r.fixed_point_residuals.size() == 2);
        CHECK(std::isfinite(r.step_residual));
        CHECK(r.wall_time_ms >= prev_wall);
        prev_wall = r.wall_time_ms;
        REQUIRE(r.dist_to_known.has_value());
        CHECK(*r.dist_to_known == doctest::Approx(std::abs(r.x[0])).epsilon(1e-15));
    }

    // max_iter stop: trace covers every iteration.
    cfg.max_iter = 7;
    cfg.tol_step = 1e-15;
    const auto capped = solve_mann(p, pt1(1.0), cfg);
    CHECK(capped.stop_reason == StopReason::max_iter);
    CHECK(capped.iterations == 7);
    CHECK(capped.trace.size() == 7);
}

// ---------------------------------------------------------------------------
// Variational-inequality front end.
// ---------------------------------------------------------------------------

TEST_CASE("vi: zero fields certify the start point immediately") {
    VectorField A;
    A.dim = 2;
    A.apply = [](const Point&) { return Point::Zero(2); };
    const auto C = FeasibleSet::box(Point::Constant(2, -1.0), Point::Constant(2, 1.0));
    Point x0(2);
    x0 << 0.25, -0.75;
    SolverConfig cfg;
    const auto got = solve_vi({A}, C, 1.0, x0, cfg);
    CHECK(got.iterations == 1);
    CHECK(got.stop_reason == StopReason::fixed_point_exact);
    CHECK(bits_equal(got.solution, x0));
}

TEST_CASE("vi: scalar affine family matches the classical reference step for step") {
    const std::vector<double> slopes{0.8, 1.3, 2.0};
    const double xstar = 0.7, hi = 3.0, x0 = 2.5;
    const double L = 2.0;
    const double rho = 0.9 / L;

    std::vector<Eigen::MatrixXd> Ms;
    for (double m : slopes) {
        Eigen::MatrixXd M(1, 1);
        M << m;
        Ms.push_back(M);
    }
    const auto C = FeasibleSet::box(pt1(0.0), pt1(hi));
    const auto fam = make_affine_vi(Ms, pt1(xstar), C);
    CHECK(fam.L == doctest::Approx(L).epsilon(1e-12));

    SolverConfig cfg;
    cfg.rho = rho;
    cfg.tol_step = 1e-9;
    cfg.max_iter = 500;
    const auto got = solve_vi(fam.fields, fam.C, fam.L, pt1(x0), cfg, fam.known_solution);
    const auto ref = reference_vi_scalar(slopes, xstar, hi, x0, rho, 1e-9, 500);
    compare_with_reference(got, ref, 1e-12);
    CHECK(std::abs(got.solution[0] - xstar) <= 1e-6);

    // Distance metric reaches 1e-6 within the budget.
    bool crossed = false;
    for (const auto& r : got.trace) {
        REQUIRE(r.dist_to_known.has_value());
        if (*r.dist_to_known <= 1e-6) {
            crossed = true;
            break;
        }
    }
    CHECK(crossed);

    // A single field reduces to the classical single-operator method.
    const auto got1 =
        solve_vi({fam.fields[1]}, fam.C, 1.3, pt1(x0), cfg, fam.known_solution);
    const auto ref1 = reference_vi_scalar({1.3}, xstar, hi, x0, rho, 1e-9, 500);
    compare_with_reference(got1, ref1, 1e-12);
}

TEST_CASE("vi: step-size contract") {
    VectorField A;
    A.dim = 1;
    A.apply = [](const Point& x) { return Point(2.0 * x); };
    const auto C = FeasibleSet::box(pt1(-1.0), pt1(1.0));
    SolverConfig cfg;
    cfg.rho = 0.5;   // exactly 1/L for L = 2: must be rejected
    CHECK_THROWS_WITH_AS(solve_vi({A}, C, 2.0, pt1(0.5), cfg),
                         doctest::Contains("1/L"), ConfigurationError);
    cfg.rho = 0.6;
    CHECK_THROWS_AS(solve_vi({A}, C, 2.0, pt1(0.5), cfg), ConfigurationError);
    cfg.rho.reset();   // default 0.8/L is fine
    CHECK_NOTHROW(solve_vi({A}, C, 2.0, pt1(0.5), cfg));
}

TEST_CASE("vi: planar family shrinks the distance to the common solution") {
    Eigen::MatrixXd M1 = Eigen::MatrixXd::Zero(2, 2);
    M1.diagonal() << 1.0, 2.0;
    Eigen::MatrixXd M2 = Eigen::MatrixXd::Zero(2, 2);
    M2.diagonal() << 1.5, 1.0;
    Point xstar(2);
    xstar << 0.5, 0.5;
    const auto C = FeasibleSet::box(Point::Zero(2), Point::Ones(2));
    const auto fam = make_affine_vi({M1, M2}, xstar, C);

    Point x0(2);
    x0 << 1.0, 0.0;
    SolverConfig cfg;
    cfg.tol_step = 1e-9;
    cfg.max_iter = 2000;
    const auto got = solve_vi(fam.fields, fam.C, fam.L, x0, cfg, fam.known_solution);
    const double d0 = (x0 - xstar).norm();
    const double dT = (got.solution - xstar).norm();
    CHECK(dT <= 0.1 * d0);

    // Anchor-distance monotonicity holds in higher dimensions too.
    double prev = 0.0;
    for (const auto& r : got.trace) {
        const double a = (r.x - x0).norm();
        CHECK(a >= prev - 1e-9);
        prev = a;
    }
}

TEST_CASE("vi embedding exposes the oracles validation needs") {
    VectorField A;
    A.dim = 1;
    A.apply = [](const Point& x) { return Point(1.5 * x); };
    const auto C = FeasibleSet::box(pt1(-1.0), pt1(1.0));
    const auto p = embed_vi({A}, C, 1.5);
    REQUIRE(p.bifunctions.size() == 1);
    CHECK(p.bifunctions[0].c1 == doctest::Approx(0.75));
    CHECK(p.bifunctions[0].c2 == doctest::Approx(0.75));
    // <A(x), y - x> form.
    CHECK(p.bifunctions[0].eval(pt1(0.4), pt1(0.9)) ==
          doctest::Approx(1.5 * 0.4 * 0.5).epsilon(1e-15));
    // prox is the projected forward step.
    const Point y = p.bifunctions[0].prox_closed(pt1(0.4), pt1(0.8), 0.5, C);
    CHECK(y[0] == doctest::Approx(0.8 - 0.5 * 1.5 * 0.4).epsilon(1e-15));
    const auto report = validate_problem(p, SolverConfig{}, 100, 5);
    CHECK(report.pass);

    CHECK_THROWS_AS(embed_vi({}, C, 1.0), ConfigurationError);
    CHECK_THROWS_AS(embed_vi({A}, C, 0.0), ConfigurationError);
}
