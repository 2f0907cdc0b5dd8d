#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace equihybrid {

using Point = Eigen::VectorXd;

/// Uniform double in [0, 1) built from the generator's top 53 bits: the
/// portable sampling primitive used wherever reproducible randomness is
/// needed (distribution classes may differ across standard libraries).
double uniform_unit(std::mt19937_64& rng);

/// Invalid user input: bad dimensions, out-of-range parameters, malformed config.
class ConfigurationError : public std::runtime_error {
public:
    explicit ConfigurationError(const std::string& what) : std::runtime_error(what) {}
};

/// A requested operation needs an oracle capability the problem does not provide.
class CapabilityError : public std::runtime_error {
public:
    explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

/// A constraint intersection is (numerically) empty.
class InfeasibilityError : public std::runtime_error {
public:
    explicit InfeasibilityError(const std::string& what) : std::runtime_error(what) {}
};

/// Closed halfspace {v : <a, v> <= b}. A zero normal with b >= 0 is the whole
/// space; a zero normal with b < 0 is empty and rejected wherever it appears.
struct HalfSpace {
    Point a;
    double b = 0.0;

    bool is_whole_space() const { return a.squaredNorm() == 0.0 && b >= 0.0; }
    bool is_empty() const { return a.squaredNorm() == 0.0 && b < 0.0; }

    /// Signed Euclidean violation: positive outside, negative inside.
    double violation(const Point& v) const;
};

/// Closed convex feasible set with exact projection and membership oracles.
///
/// The box/ball/halfspace factories fill `project` and `contains` with exact
/// (or, for halfspace lists, machine-precision iterative) implementations.
/// `sample_lo`/`sample_hi` bound a region used when drawing validation samples.
struct FeasibleSet {
    enum class Kind { WholeSpace, Box, Ball, HalfspaceList, Custom };

    int dim = 0;
    Kind kind = Kind::WholeSpace;
    std::function<Point(const Point&)> project;
    std::function<bool(const Point&)> contains;
    Point sample_lo;
    Point sample_hi;

    // Populated by the box factory; used by closed-form proxes over boxes.
    Point box_lo;
    Point box_hi;

    static FeasibleSet whole_space(int dim, double sample_extent = 10.0);
    static FeasibleSet box(const Point& lo, const Point& hi);
    static FeasibleSet ball(const Point& center, double radius);
    static FeasibleSet halfspaces(int dim, std::vector<HalfSpace> cuts);
    static FeasibleSet custom(int dim,
                              std::function<Point(const Point&)> project,
                              std::function<bool(const Point&)> contains,
                              const Point& sample_lo,
                              const Point& sample_hi);
};

/// Equilibrium bifunction oracle. `eval` is mandatory. Regularized
/// subproblems argmin_{y in C} { rho*f(w, y) + 0.5*||y - anchor||^2 } are
/// solved through `prox_closed` when available, otherwise by an inner
/// projected-subgradient loop through `subgrad2` (a subgradient of
/// f(w, .) at y); with neither, prox-based solvers raise CapabilityError.
/// c1/c2 are the Lipschitz-type constants used for step-size bounds.
struct BifunctionOracle {
    int dim = 0;
    std::function<double(const Point&, const Point&)> eval;
    std::function<Point(const Point&, const Point&)> subgrad2;
    std::function<Point(const Point& w, const Point& anchor, double rho, const FeasibleSet& C)>
        prox_closed;
    double c1 = 0.0;
    double c2 = 0.0;
};

struct NonexpansiveMap {
    int dim = 0;
    std::function<Point(const Point&)> apply;
};

/// Vector-field oracle for variational inequalities.
struct VectorField {
    int dim = 0;
    std::function<Point(const Point&)> apply;
};

struct ProblemInstance {
    int dim = 0;
    FeasibleSet C;
    std::vector<BifunctionOracle> bifunctions;
    std::vector<NonexpansiveMap> maps;
    std::optional<Point> known_solution;
};

/// Relaxation/anchoring coefficient schedule alpha_n, n = 1, 2, ...
/// Carries the analytic properties solvers must enforce: Mann-type updates
/// need limsup alpha_n < 1 (and alpha_n in (0, 1)); Halpern-type updates need
/// alpha_n -> 0.
class AlphaSchedule {
public:
    AlphaSchedule() = default;

    double operator()(int n) const { return fn_(n); }
    bool vanishes() const { return vanishes_; }
    bool limsup_below_one() const { return limsup_below_one_; }
    const std::string& describe() const { return label_; }

    /// alpha_n = 1/(n+1): 1/2, 1/3, ... Vanishing, bounded away from 1.
    static AlphaSchedule harmonic();
    /// alpha_n = v for a fixed v in (0, 1). Not vanishing.
    static AlphaSchedule constant(double v);
    /// alpha_n = ratio^n for ratio in (0, 1): vanishing geometrically.
    static AlphaSchedule geometric(double ratio);
    static AlphaSchedule custom(std::function<double(int)> fn,
                                bool vanishes,
                                bool limsup_below_one,
                                std::string label = "custom");

private:
    std::function<double(int)> fn_ = [](int n) { return 1.0 / (n + 1); };
    bool vanishes_ = true;
    bool limsup_below_one_ = true;
    std::string label_ = "harmonic";
};

/// Convex weights (w_0, ..., w_M) for the averaged update, per iteration.
/// Must return M+1 entries in [0, 1] summing to 1 (checked by the solver).
class WeightSchedule {
public:
    WeightSchedule() = default;

    std::vector<double> operator()(int n, int num_maps) const { return fn_(n, num_maps); }
    const std::string& describe() const { return label_; }

    /// w_j = 1/(M+1) for all j.
    static WeightSchedule uniform();
    /// w_0 = alpha_n, remaining mass spread evenly: matches the two-point
    /// relaxation when M = 1.
    static WeightSchedule mann_like(AlphaSchedule alpha);
    static WeightSchedule custom(std::function<std::vector<double>(int, int)> fn,
                                 std::string label = "custom");

private:
    std::function<std::vector<double>(int, int)> fn_ =
        [](int, int m) { return std::vector<double>(static_cast<std::size_t>(m) + 1, 1.0 / (m + 1)); };
    std::string label_ = "uniform";
};

struct ProxBudget {
    int max_iters = 500;
    double tol = 1e-10;
};

struct ProjectionBudget {
    int max_sweeps = 10000;
    double tol = 1e-12;
};

struct SolverConfig {
    /// Regularization step; defaults to 0.8 * min_i min(1/(2 c1_i), 1/(2 c2_i))
    /// when unset (see default_rho).
    std::optional<double> rho;
    AlphaSchedule alpha = AlphaSchedule::harmonic();
    std::optional<WeightSchedule> weights;
    /// Stopping threshold: iteration stops once both the step length
    /// ||x_{n+1} - x_n|| and the combined-point residual ||u_n - x_n|| are
    /// at or below tol_step (exact-equality stopping never fires in floats).
    double tol_step = 1e-6;
    int max_iter = 1000;
    int workers = 1;
    ProxBudget prox_inner;
    ProjectionBudget projection_inner;
    /// Keep per-iteration geometry (iterates, cuts) for invariant checking.
    bool record_details = false;
};

struct TraceRecord {
    int n = 0;
    Point x;
    double step_residual = 0.0;
    double u_residual = 0.0;
    std::vector<double> z_residuals;
    std::vector<double> fixed_point_residuals;
    std::optional<double> dist_to_known;
    double wall_time_ms = 0.0;
};

/// Solver-agnostic step bound: rho must stay below min(1/(2 c1), 1/(2 c2))
/// over all bifunctions. Problems with no bifunction get 1.0.
double default_rho(const ProblemInstance& problem);

struct ValidationCheck {
    std::string name;
    bool pass = true;
    /// Worst observed violation (its meaning is check-specific), 0 if none.
    double worst = 0.0;
    std::string detail;
};

struct ValidationReport {
    bool pass = true;
    std::vector<ValidationCheck> checks;

    /// Fixed-format rendering; byte-identical for identical inputs.
    std::string render() const;
};

/// Deterministic sampling-based sanity check of problem structure:
/// dimensions, f(x, x) = 0, pseudomonotonicity, the Lipschitz-type
/// inequality with the declared c1/c2, nonexpansiveness, maps staying in C,
/// and the rho bound. Identical (problem, cfg, samples, seed) yield a
/// byte-identical report regardless of worker count.
ValidationReport validate_problem(const ProblemInstance& problem,
                                  const SolverConfig& cfg,
                                  int samples,
                                  std::uint64_t seed);

}  // namespace equihybrid
