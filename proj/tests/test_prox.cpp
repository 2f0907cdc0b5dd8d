#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "equihybrid/core.hpp"
#include "equihybrid/problems.hpp"
#include "equihybrid/prox.hpp"

#include <algorithm>
#include <cmath>

using namespace equihybrid;

namespace {

Point pt1(double a) {
    Point p(1);
    p << a;
    return p;
}

// Brute-force minimizer of rho*f(w, y) + 0.5*(y - anchor)^2 over a scalar
// interval; the independent oracle for prox steps.
double grid_prox(const BifunctionOracle& f, double w, double anchor, double rho,
                 double lo, double hi, double step) {
    double best = lo;
    double best_val = std::numeric_limits<double>::infinity();
    for (double y = lo; y <= hi + 0.5 * step; y += step) {
        const double val =
            rho * f.eval(pt1(w), pt1(y)) + 0.5 * (y - anchor) * (y - anchor);
        if (val < best_val) {
            best_val = val;
            best = y;
        }
    }
    return best;
}

// Scalar margin function of the benchmark family: 0 below the kink,
// exp(t) + sin(t) - 1 above it.
double margin(double x, double xi) {
    if (x <= xi) return 0.0;
    const double t = x - xi;
    return std::exp(t) + std::sin(t) - 1.0;
}

}   // namespace

TEST_CASE("closed-form prox on the scalar benchmark bifunction") {
    Scalar1DSpec s;
    s.n_bifunctions = 1;
    s.n_maps = 0;
    s.xi = {0.5};
    const auto p = make_paper_1d(s);
    const auto& f = p.bifunctions[0];
    const double rho = 0.2;

    const auto r = prox_step(f, pt1(1.0), rho, p.C, ProxBudget{});
    CHECK(r.inner_iters == 0);   // closed form, no inner iterations
    CHECK(r.optimality_residual == 0.0);
    CHECK_FALSE(r.budget_exhausted);

    // Frozen value: 1 - 0.2*(e^{0.5} + sin 0.5 - 1).
    const double expected = 1.0 - rho * (std::exp(0.5) + std::sin(0.5) - 1.0);
    CHECK(r.y[0] == doctest::Approx(expected).epsilon(1e-15));
    CHECK(r.y[0] == doctest::Approx(0.7743706381391338).epsilon(1e-12));

    // Independent check: brute-force minimization of the prox objective.
    const double g = grid_prox(f, 1.0, 1.0, rho, 0.0, 1.0, 1e-5);
    CHECK(std::abs(g - r.y[0]) <= 1e-4);
}

TEST_CASE("extragradient pair anchors both stages at the base point") {
    Scalar1DSpec s;
    s.n_bifunctions = 1;
    s.n_maps = 0;
    s.xi = {0.5};
    const auto p = make_paper_1d(s);
    const auto& f = p.bifunctions[0];
    const double rho = 0.2;
    const double x = 1.0;

    const auto pair = extragradient_pair(f, pt1(x), rho, p.C, ProxBudget{});
    const double y_expected = std::clamp(x - rho * margin(x, 0.5), 0.0, 1.0);
    CHECK(pair.first.y[0] == doctest::Approx(y_expected).epsilon(1e-15));
    // Second stage: evaluated at y, still anchored at x.
    const double z_expected = std::clamp(x - rho * margin(y_expected, 0.5), 0.0, 1.0);
    CHECK(pair.second.y[0] == doctest::Approx(z_expected).epsilon(1e-14));
    CHECK(pair.second.y[0] > pair.first.y[0]);   // slope shrinks toward the kink

    // Grid oracle for the second stage objective rho*f(y, .) + 0.5*(. - x)^2.
    const double g = grid_prox(f, y_expected, x, rho, 0.0, 1.0, 1e-5);
    CHECK(std::abs(g - pair.second.y[0]) <= 1e-4);
}

TEST_CASE("subgradient fallback converges on a strongly convex model") {
    // f(x, y) = a*(y^2 - x^2) + b*(y - x) with subgrad2 = 2a*y + b.
    // argmin of rho*f(w, .) + 0.5*(. - anchor)^2 over [-1, 1] is
    // clamp((anchor - rho*b) / (1 + 2*rho*a)).
    const double a = 1.0, b = 0.3, rho = 2.0;
    BifunctionOracle f;
    f.dim = 1;
    f.c1 = 0.0;
    f.c2 = 0.0;
    f.eval = [=](const Point& x, const Point& y) {
        return a * (y[0] * y[0] - x[0] * x[0]) + b * (y[0] - x[0]);
    };
    f.subgrad2 = [=](const Point&, const Point& y) { return pt1(2.0 * a * y[0] + b); };
    const auto C = FeasibleSet::box(pt1(-1.0), pt1(1.0));

    const auto r = prox_step(f, pt1(0.8), rho, C, ProxBudget{});
    const double expected = (0.8 - rho * b) / (1.0 + 2.0 * rho * a);   // 0.04
    CHECK(r.y[0] == doctest::Approx(expected).epsilon(1e-9));
    CHECK(r.inner_iters > 0);
    CHECK(r.inner_iters <= 50);
    CHECK_FALSE(r.budget_exhausted);
    CHECK(r.optimality_residual <= 1e-8);

    // Anchored away from the evaluation point.
    const auto ra = prox_step_anchored(f, pt1(0.3), pt1(0.5), rho, C, ProxBudget{});
    CHECK(ra.y[0] == doctest::Approx((0.5 - rho * b) / 5.0).epsilon(1e-9));

    // Grid oracle agrees.
    const double g = grid_prox(f, 0.8, 0.8, rho, -1.0, 1.0, 1e-5);
    CHECK(std::abs(g - r.y[0]) <= 1e-4);
}

TEST_CASE("subgradient fallback reports budget exhaustion") {
    BifunctionOracle f;
    f.dim = 1;
    f.eval = [](const Point& x, const Point& y) {
        return y[0] * y[0] - x[0] * x[0];
    };
    f.subgrad2 = [](const Point&, const Point& y) { return pt1(2.0 * y[0]); };
    const auto C = FeasibleSet::box(pt1(-1.0), pt1(1.0));
    ProxBudget tiny;
    tiny.max_iters = 3;
    const auto r = prox_step(f, pt1(0.8), 2.0, C, tiny);
    CHECK(r.budget_exhausted);
    CHECK(r.inner_iters == 3);
    CHECK(r.optimality_residual > 0.0);
}

TEST_CASE("prox requires some way to evaluate the argmin") {
    BifunctionOracle f;
    f.dim = 1;
    f.eval = [](const Point&, const Point&) { return 0.0; };
    const auto C = FeasibleSet::box(pt1(0.0), pt1(1.0));
    CHECK_THROWS_AS(prox_step(f, pt1(0.5), 0.1, C, ProxBudget{}), CapabilityError);
}

TEST_CASE("prox input validation") {
    Scalar1DSpec s;
    s.n_bifunctions = 1;
    s.n_maps = 0;
    const auto p = make_paper_1d(s);
    CHECK_THROWS_AS(prox_step(p.bifunctions[0], pt1(0.5), 0.0, p.C, ProxBudget{}),
                    ConfigurationError);
    CHECK_THROWS_AS(prox_step(p.bifunctions[0], pt1(0.5), -0.2, p.C, ProxBudget{}),
                    ConfigurationError);
    Point wrong(2);
    wrong << 0.5, 0.5;
    CHECK_THROWS_AS(prox_step(p.bifunctions[0], wrong, 0.2, p.C, ProxBudget{}),
                    ConfigurationError);
}

TEST_CASE("vi prox step") {
    VectorField A;
    A.dim = 1;
    A.apply = [](const Point& x) { return pt1(2.0 * x[0] - 1.0); };
    const auto C = FeasibleSet::box(pt1(0.0), pt1(1.0));
    const Point r = vi_prox(A, pt1(0.75), pt1(0.75), 0.4, C);
    CHECK(r[0] == doctest::Approx(0.55).epsilon(1e-15));
    // Clamped case.
    const Point rc = vi_prox(A, pt1(1.0), pt1(0.1), 0.5, C);
    CHECK(rc[0] == doctest::Approx(0.0).epsilon(1e-15));   // 0.1 - 0.5 < 0
    CHECK_THROWS_AS(vi_prox(A, pt1(0.5), pt1(0.5), 0.0, C), ConfigurationError);
}
