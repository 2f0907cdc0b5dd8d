#include "equihybrid/parallel.hpp"

#include <cmath>

namespace equihybrid {

FarthestResult farthest_from(const std::vector<Point>& points, const Point& anchor) {
    if (points.empty())
        throw ConfigurationError("farthest_from: empty candidate list");

    // Squared distances compared directly, ties to the smallest index: the
    // winner is a pure function of the inputs, independent of traversal
    // batching.
    FarthestResult best;
    best.index = 0;
    double best_d2 = (points[0] - anchor).squaredNorm();
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double d2 = (points[i] - anchor).squaredNorm();
        if (d2 > best_d2) {
            best_d2 = d2;
            best.index = i;
        }
    }
    best.point = points[best.index];
    best.distance = std::sqrt(best_d2);
    return best;
}

}  // namespace equihybrid
