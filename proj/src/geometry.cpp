#include "equihybrid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

namespace equihybrid {

// Offsets of bisector-type cuts are differences of squared norms. They are
// evaluated here in factored form, e.g. ||x||^2 - ||u||^2 = <x - u, x + u>:
// algebraically identical, but the relative error stays O(eps) instead of
// blowing up like eps * ||x||^2 / ||x - u|| once the points are close.

HalfSpace mann_cut(const Point& x, const Point& u) {
    const Point d = x - u;
    HalfSpace h;
    h.a = 2.0 * d;
    h.b = d.dot(x + u);
    return h;
}

HalfSpace halpern_cut(const Point& x0, const Point& x, const Point& u, double alpha) {
    const Point d0 = x0 - u;
    const Point d1 = x - u;
    HalfSpace h;
    h.a = 2.0 * (alpha * d0 + (1.0 - alpha) * d1);
    h.b = alpha * d0.dot(x0 + u) + (1.0 - alpha) * d1.dot(x + u);
    return h;
}

HalfSpace anchor_cut(const Point& x0, const Point& x) {
    HalfSpace h;
    h.a = x0 - x;
    h.b = h.a.dot(x);
    return h;
}

Point project_halfspace(const HalfSpace& h, const Point& v) {
    const double nsq = h.a.squaredNorm();
    if (nsq == 0.0) {
        if (h.b < 0.0) throw InfeasibilityError("project_halfspace: empty halfspace");
        return v;
    }
    const double t = h.a.dot(v) - h.b;
    if (t <= 0.0) return v;
    return v - (t / nsq) * h.a;
}

namespace {

// Euclidean-scaled feasibility slack. Algebraic slacks are useless here:
// bisector-cut normals shrink with the residual, which would amplify a
// fixed algebraic tolerance into an unbounded Euclidean one.
inline double feas_slack(const Point& v) { return 1e-12 * (1.0 + v.norm()); }

Point project_two_cuts(const HalfSpace& h1, const HalfSpace& h2, const Point& x0) {
    const double n1 = h1.a.norm();
    const double n2 = h2.a.norm();
    const double slack = feas_slack(x0);

    const double cosang = h1.a.dot(h2.a) / (n1 * n2);
    if (std::abs(cosang) >= 1.0 - 1e-12) {
        // Parallel normals: the pair is a single constraint or a slab.
        const double c1 = h1.b / n1;   // boundary offsets along the shared axis
        const double c2 = h2.b / n2;
        if (cosang > 0.0) {
            return c1 <= c2 ? project_halfspace(h1, x0) : project_halfspace(h2, x0);
        }
        if (c1 + c2 < -slack)
            throw InfeasibilityError("project_intersection: opposing cuts leave no points");
        const Point p1 = project_halfspace(h1, x0);
        return project_halfspace(h2, p1);
    }

    if (h1.violation(x0) <= slack && h2.violation(x0) <= slack) return x0;

    struct Candidate {
        Point p;
        double dist2;
    };
    std::vector<Candidate> valid;

    const Point p1 = project_halfspace(h1, x0);
    if (h2.violation(p1) <= slack) valid.push_back({p1, (p1 - x0).squaredNorm()});
    const Point p2 = project_halfspace(h2, x0);
    if (h1.violation(p2) <= slack) valid.push_back({p2, (p2 - x0).squaredNorm()});

    if (valid.empty()) {
        // Corner: both constraints active. Solve the 2x2 Gram system for the
        // multipliers; non-parallel normals keep it well conditioned.
        const double g11 = h1.a.squaredNorm();
        const double g12 = h1.a.dot(h2.a);
        const double g22 = h2.a.squaredNorm();
        const double det = g11 * g22 - g12 * g12;
        const double r1 = h1.a.dot(x0) - h1.b;
        const double r2 = h2.a.dot(x0) - h2.b;
        const double l1 = (g22 * r1 - g12 * r2) / det;
        const double l2 = (g11 * r2 - g12 * r1) / det;
        Point p = x0 - l1 * h1.a - l2 * h2.a;
        valid.push_back({std::move(p), 0.0});
    }

    const Candidate* best = &valid.front();
    for (const auto& c : valid)
        if (c.dist2 < best->dist2) best = &c;
    return best->p;
}

}  // namespace

Point project_onto_cuts(const std::vector<HalfSpace>& cuts, const Point& x0) {
    switch (cuts.size()) {
        case 0: return x0;
        case 1: return project_halfspace(cuts[0], x0);
        case 2: return project_two_cuts(cuts[0], cuts[1], x0);
        default:
            throw ConfigurationError(
                "project_onto_cuts: closed form limited to two halfspaces");
    }
}

ProjectionResult project_intersection(const FeasibleSet& C,
                                      const std::vector<HalfSpace>& cuts,
                                      const Point& x0,
                                      const ProjectionBudget& budget) {
    if (x0.size() != C.dim)
        throw ConfigurationError("project_intersection: point dimension mismatch");

    std::vector<HalfSpace> effective;
    effective.reserve(cuts.size());
    for (const auto& h : cuts) {
        if (h.a.size() != C.dim)
            throw ConfigurationError("project_intersection: cut dimension mismatch");
        if (h.is_empty())
            throw InfeasibilityError("project_intersection: empty halfspace cut");
        if (!h.is_whole_space()) effective.push_back(h);
    }

    if (effective.size() <= 2) {
        Point p = project_onto_cuts(effective, x0);
        // The cuts-only projection is exact; if it already lies in C it is
        // the projection onto the full intersection.
        if (C.kind == FeasibleSet::Kind::WholeSpace || C.contains(p))
            return {std::move(p), 0, true};
    }

    // Dykstra alternating projections over {C, cut_1, ..., cut_k}.
    const std::size_t nsets = effective.size() + 1;
    std::vector<Point> increments(nsets, Point::Zero(C.dim));
    Point x = x0;

    constexpr int kPlateauWindow = 100;
    constexpr double kPlateauFloor = 1e-6;
    std::deque<double> window;

    for (int sweep = 1; sweep <= budget.max_sweeps; ++sweep) {
        const Point x_prev = x;
        for (std::size_t s = 0; s < nsets; ++s) {
            const Point w = x + increments[s];
            Point y = (s == 0) ? C.project(w) : project_halfspace(effective[s - 1], w);
            increments[s] = w - y;
            x = std::move(y);
        }
        const double r = (x - x_prev).norm();
        if (r <= budget.tol) {
            // On disjoint sets the sweep-end iterate also settles (at the
            // point of the last set nearest the others), so a small
            // displacement alone is not a convergence certificate: the
            // settled point must actually reach every set.
            double gap = (C.project(x) - x).norm();
            for (const auto& h : effective)
                gap = std::max(gap, std::max(0.0, h.violation(x)));
            if (gap <= 1e-9 * (1.0 + x.norm())) return {std::move(x), sweep, true};
            throw InfeasibilityError(
                "project_intersection: alternating projections settled at a point "
                "separated from the intersection; it looks empty");
        }

        window.push_back(r);
        if (static_cast<int>(window.size()) > kPlateauWindow) window.pop_front();
        if (static_cast<int>(window.size()) == kPlateauWindow) {
            const double lo = *std::min_element(window.begin(), window.end());
            if (lo > kPlateauFloor && window.back() >= 0.99 * window.front())
                throw InfeasibilityError(
                    "project_intersection: residual plateau, intersection looks empty");
        }
    }
    return {std::move(x), budget.max_sweeps, false};
}

}  // namespace equihybrid
