#pragma once

#include "equihybrid/core.hpp"

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace equihybrid {

/// Static contiguous chunking over `workers` threads. Results land in
/// pre-assigned slots, so the output is bitwise independent of the worker
/// count; only wall time changes.
struct ParallelPlan {
    int workers = 1;

    static ParallelPlan serial() { return ParallelPlan{1}; }

    /// Half-open index range [first, last) handled by worker w of `workers`.
    std::pair<std::size_t, std::size_t> chunk(std::size_t count, int w) const {
        const std::size_t p = static_cast<std::size_t>(workers);
        const std::size_t base = count / p;
        const std::size_t rem = count % p;
        const std::size_t ww = static_cast<std::size_t>(w);
        const std::size_t first = ww * base + std::min(ww, rem);
        return {first, first + base + (ww < rem ? 1u : 0u)};
    }
};

/// Thrown when one or more elements of a parallel_map fail; names the
/// failing indices so the caller can report which oracle misbehaved.
class ParallelMapError : public std::runtime_error {
public:
    ParallelMapError(std::string what, std::vector<std::size_t> indices)
        : std::runtime_error(std::move(what)), failed_indices(std::move(indices)) {}

    std::vector<std::size_t> failed_indices;
};

/// Applies op to every element, distributing contiguous chunks over
/// plan.workers threads. Element i's result is written to slot i only, so
/// the output sequence is identical for any worker count. Exceptions from
/// op are collected and rethrown as one ParallelMapError listing the
/// failing indices.
template <class T, class F>
auto parallel_map(const std::vector<T>& items, F&& op, const ParallelPlan& plan)
    -> std::vector<decltype(op(std::size_t{}, items[0]))> {
    using U = decltype(op(std::size_t{}, items[0]));
    std::vector<U> out(items.size());
    if (items.empty()) return out;

    struct Failure {
        std::size_t index;
        std::string message;
    };
    std::vector<Failure> failures;
    std::mutex failures_mutex;

    auto run_chunk = [&](std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) {
            try {
                out[i] = op(i, items[i]);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failures_mutex);
                failures.push_back({i, e.what()});
            } catch (...) {
                std::lock_guard<std::mutex> lock(failures_mutex);
                failures.push_back({i, "unknown error"});
            }
        }
    };

    const int workers = std::max(1, plan.workers);
    if (workers == 1 || items.size() == 1) {
        run_chunk(0, items.size());
    } else {
        ParallelPlan effective{workers};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers) - 1);
        for (int w = 1; w < workers; ++w) {
            auto [first, last] = effective.chunk(items.size(), w);
            if (first < last) pool.emplace_back(run_chunk, first, last);
        }
        auto [first0, last0] = effective.chunk(items.size(), 0);
        run_chunk(first0, last0);
        for (auto& t : pool) t.join();
    }

    if (!failures.empty()) {
        std::sort(failures.begin(), failures.end(),
                  [](const Failure& a, const Failure& b) { return a.index < b.index; });
        std::vector<std::size_t> indices;
        std::ostringstream msg;
        msg << "parallel_map: " << failures.size() << " element(s) failed:";
        for (const auto& f : failures) {
            indices.push_back(f.index);
            msg << " [" << f.index << "] " << f.message << ';';
        }
        throw ParallelMapError(msg.str(), std::move(indices));
    }
    return out;
}

struct FarthestResult {
    std::size_t index = 0;
    Point point;
    double distance = 0.0;
};

/// Element of `points` farthest from `anchor` in Euclidean norm. Squared
/// distances are compared directly and ties resolve to the smallest index,
/// so the selection is deterministic. Empty input is a ConfigurationError.
FarthestResult farthest_from(const std::vector<Point>& points, const Point& anchor);

}  // namespace equihybrid
