#pragma once

#include "equihybrid/core.hpp"
#include "equihybrid/geometry.hpp"

#include <string>
#include <vector>

namespace equihybrid {

enum class StopReason { step_tol, fixed_point_exact, max_iter, infeasible_cut };

std::string to_string(StopReason r);

/// Per-iteration geometry kept when SolverConfig::record_details is set.
/// Everything refers to iteration n: x is the incoming iterate, x_next the
/// projected new one.
struct IterationDetail {
    int n = 0;
    double alpha = 0.0;
    Point x;
    std::vector<Point> y;   // first-stage points, one per bifunction
    std::vector<Point> z;   // corrected points, one per bifunction
    Point zbar;             // farthest z from x (x itself when N = 0)
    std::vector<Point> u;   // per map: relaxed/anchored points (map outputs
                            // S_j(zbar) for the averaged variant)
    Point ubar;             // selected/combined u feeding the cuts
    HalfSpace progress_cut;
    HalfSpace anchor;
    Point x_next;
};

struct SolveResult {
    Point solution;
    int iterations = 0;
    StopReason stop_reason = StopReason::max_iter;
    std::vector<TraceRecord> trace;
    std::vector<IterationDetail> details;   // empty unless record_details
};

/// Relaxation-type update u_j = alpha_n x_n + (1 - alpha_n) S_j(zbar):
/// requires alpha_n in (0, 1) with limsup < 1.
SolveResult solve_mann(const ProblemInstance& problem, const Point& x0, const SolverConfig& cfg);

/// Anchored update u_j = alpha_n x0 + (1 - alpha_n) S_j(zbar): requires a
/// vanishing alpha schedule and never claims the exact fixed-point
/// certificate (the anchor term keeps u away from x until alpha dies out).
SolveResult solve_halpern(const ProblemInstance& problem, const Point& x0, const SolverConfig& cfg);

/// Averaged update u = w_0 x_n + sum_j w_j S_j(zbar) with convex weights
/// from cfg.weights (uniform by default). With one map and weights
/// (alpha_n, 1 - alpha_n) it reproduces solve_mann exactly.
SolveResult solve_averaged(const ProblemInstance& problem, const Point& x0, const SolverConfig& cfg);

/// No fixed-point constraints (maps must be empty): the selected zbar itself
/// drives the cuts.
SolveResult solve_equilibrium_only(const ProblemInstance& problem,
                                   const Point& x0,
                                   const SolverConfig& cfg);

/// Equilibrium-problem view of a family of vector fields: linearized
/// bifunctions <A_i(w), y - w> with closed-form prox P_C(anchor - rho A_i(w))
/// and Lipschitz-type constants c1 = c2 = L/2. solve_vi runs on exactly this
/// embedding; exposed so validation can inspect the same oracles.
ProblemInstance embed_vi(const std::vector<VectorField>& fields,
                         const FeasibleSet& C,
                         double L,
                         const std::optional<Point>& known_solution = std::nullopt);

/// Common-solution solver for variational inequalities over C with
/// L-Lipschitz monotone fields: two projected forward steps per field
/// (evaluated at x, then at the predicted point), farthest-point selection,
/// and the same cut machinery with a zero relaxation weight. Requires
/// rho < 1/L strictly; defaults to 0.8/L when cfg.rho is unset.
SolveResult solve_vi(const std::vector<VectorField>& fields,
                     const FeasibleSet& C,
                     double L,
                     const Point& x0,
                     const SolverConfig& cfg,
                     const std::optional<Point>& known_solution = std::nullopt);

}  // namespace equihybrid
