#pragma once

#include "equihybrid/core.hpp"

#include <vector>

namespace equihybrid {

/// Progress cut for relaxation-type updates:
///   {v : <2(x - u), v> <= ||x||^2 - ||u||^2}.
/// Contains every point at least as close to u as to x (the halfspace of the
/// perpendicular bisector on u's side). The offset is evaluated in the
/// factored form sum_i (x_i - u_i)(x_i + u_i), which is the same number
/// algebraically but avoids the catastrophic cancellation of the two large
/// squared norms once ||x - u|| is small.
HalfSpace mann_cut(const Point& x, const Point& u);

/// Progress cut for anchored (strongly convergent, vanishing-alpha) updates:
///   {v : <2(alpha x0 + (1-alpha) x - u), v>
///            <= alpha ||x0||^2 + (1-alpha) ||x||^2 - ||u||^2}.
/// Offset evaluated as the convex combination of two factored differences.
HalfSpace halpern_cut(const Point& x0, const Point& x, const Point& u, double alpha);

/// Anchor cut {v : <x0 - x, v> <= <x0 - x, x>}: keeps the iterate the
/// projection of x0 onto the running intersection.
HalfSpace anchor_cut(const Point& x0, const Point& x);

/// Exact projection onto one halfspace; whole-space cuts pass v through and
/// empty cuts raise InfeasibilityError.
Point project_halfspace(const HalfSpace& h, const Point& v);

struct ProjectionResult {
    Point point;
    int sweeps = 0;          // 0 when an exact closed-form path was taken
    bool converged = true;   // false only on sweep-budget exhaustion
};

/// Euclidean projection of x0 onto C intersected with up to a handful of
/// halfspace cuts.
///
/// Whole-space cuts are dropped and empty cuts raise InfeasibilityError.
/// When the projection onto the cuts alone has a closed form (0, 1 or 2
/// effective cuts) and that point already lies in C, it is returned exactly.
/// Otherwise a Dykstra sweep over {C, cuts...} runs under `budget`; a
/// residual plateau (no meaningful decrease over a long window) is reported
/// as InfeasibilityError, while plain budget exhaustion returns the best
/// iterate with converged = false.
ProjectionResult project_intersection(const FeasibleSet& C,
                                      const std::vector<HalfSpace>& cuts,
                                      const Point& x0,
                                      const ProjectionBudget& budget);

/// Closed-form projection onto the intersection of one or two halfspaces in
/// the whole space (no C). Used by project_intersection's fast path and
/// directly testable against grid search.
Point project_onto_cuts(const std::vector<HalfSpace>& cuts, const Point& x0);

}  // namespace equihybrid
