#pragma once

#include "equihybrid/core.hpp"

namespace equihybrid {

struct ProxResult {
    Point y;
    int inner_iters = 0;            // 0 when a closed form was used
    double optimality_residual = 0.0;
    bool budget_exhausted = false;
};

/// Solves argmin_{y in C} { rho * f(w, y) + 0.5 * ||y - anchor||^2 }.
///
/// Uses the oracle's closed form when present; otherwise runs a projected
/// subgradient loop (steps 1/(k+1), warm-started at the anchor) through
/// subgrad2 under `budget`, stopping when successive iterates move less
/// than budget.tol. With neither capability, raises CapabilityError.
/// Budget exhaustion returns the best iterate with budget_exhausted set.
ProxResult prox_step_anchored(const BifunctionOracle& f,
                              const Point& w,
                              const Point& anchor,
                              double rho,
                              const FeasibleSet& C,
                              const ProxBudget& budget);

/// prox_step_anchored with w = anchor = x: the first extragradient stage.
ProxResult prox_step(const BifunctionOracle& f,
                     const Point& x,
                     double rho,
                     const FeasibleSet& C,
                     const ProxBudget& budget);

struct ExtragradientPair {
    ProxResult first;    // y: linearization point
    ProxResult second;   // z: corrected iterate, anchored back at x
};

/// Two-stage regularized solve sharing the quadratic anchor x:
///   y = argmin_{C} { rho f(x, .) + 0.5 ||. - x||^2 }
///   z = argmin_{C} { rho f(y, .) + 0.5 ||. - x||^2 }
ExtragradientPair extragradient_pair(const BifunctionOracle& f,
                                     const Point& x,
                                     double rho,
                                     const FeasibleSet& C,
                                     const ProxBudget& budget);

/// Projected forward step P_C(x - rho * A(x)) for vector fields: the prox
/// step specialized to the linearized bifunction <A(w), y - x>.
Point vi_prox(const VectorField& A, const Point& w, const Point& x, double rho,
              const FeasibleSet& C);

}  // namespace equihybrid
