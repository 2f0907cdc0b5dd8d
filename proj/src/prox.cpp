#include "equihybrid/prox.hpp"

namespace equihybrid {

ProxResult prox_step_anchored(const BifunctionOracle& f,
                              const Point& w,
                              const Point& anchor,
                              double rho,
                              const FeasibleSet& C,
                              const ProxBudget& budget) {
    if (!(rho > 0.0)) throw ConfigurationError("prox: rho must be positive");
    if (w.size() != f.dim || anchor.size() != f.dim || C.dim != f.dim)
        throw ConfigurationError("prox: dimension mismatch");

    if (f.prox_closed) {
        ProxResult r;
        r.y = f.prox_closed(w, anchor, rho, C);
        return r;
    }
    if (!f.subgrad2)
        throw CapabilityError(
            "prox: bifunction provides neither a closed-form prox nor subgrad2");

    // Projected subgradient on y -> rho f(w, y) + 0.5 ||y - anchor||^2,
    // steps 1/(k+1), warm-started at the anchor. The objective is
    // 1-strongly convex, so plain averaging-free iterates suffice at the
    // accuracies the outer loop requests.
    ProxResult r;
    Point y = anchor;
    int k = 0;
    bool settled = false;
    for (; k < budget.max_iters; ++k) {
        const Point g = rho * f.subgrad2(w, y) + (y - anchor);
        Point y_next = C.project(y - (1.0 / (k + 1)) * g);
        const double move = (y_next - y).norm();
        y = std::move(y_next);
        if (move < budget.tol) {
            ++k;
            settled = true;
            break;
        }
    }
    r.inner_iters = k;
    r.budget_exhausted = !settled && k >= budget.max_iters;
    const Point g = rho * f.subgrad2(w, y) + (y - anchor);
    r.optimality_residual = (y - C.project(y - g)).norm();
    r.y = std::move(y);
    return r;
}

ProxResult prox_step(const BifunctionOracle& f,
                     const Point& x,
                     double rho,
                     const FeasibleSet& C,
                     const ProxBudget& budget) {
    return prox_step_anchored(f, x, x, rho, C, budget);
}

ExtragradientPair extragradient_pair(const BifunctionOracle& f,
                                     const Point& x,
                                     double rho,
                                     const FeasibleSet& C,
                                     const ProxBudget& budget) {
    ExtragradientPair pair;
    pair.first = prox_step_anchored(f, x, x, rho, C, budget);
    pair.second = prox_step_anchored(f, pair.first.y, x, rho, C, budget);
    return pair;
}

Point vi_prox(const VectorField& A, const Point& w, const Point& x, double rho,
              const FeasibleSet& C) {
    if (!(rho > 0.0)) throw ConfigurationError("vi_prox: rho must be positive");
    if (w.size() != A.dim || x.size() != A.dim || C.dim != A.dim)
        throw ConfigurationError("vi_prox: dimension mismatch");
    return C.project(x - rho * A.apply(w));
}

}  // namespace equihybrid
