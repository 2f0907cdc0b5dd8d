#include "equihybrid/problems.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace equihybrid {

namespace {

double spectral_norm(const Eigen::MatrixXd& A) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
}

void require_psd_symmetric_part(const Eigen::MatrixXd& A, const std::string& who) {
    const Eigen::MatrixXd sym = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const double scale = 1.0 + sym.cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-10 * scale)
        throw ConfigurationError(who + ": matrix has indefinite symmetric part (not monotone)");
}

}  // namespace

ProblemInstance make_paper_1d(const Scalar1DSpec& spec) {
    const int N = spec.n_bifunctions;
    const int M = spec.n_maps;
    if (N < 1) throw ConfigurationError("make_paper_1d: need at least one bifunction");
    if (M < 0) throw ConfigurationError("make_paper_1d: n_maps must be nonnegative");

    std::vector<double> xi = spec.xi;
    if (xi.empty()) {
        xi.resize(static_cast<std::size_t>(N));
        for (int i = 1; i <= N; ++i)
            xi[static_cast<std::size_t>(i - 1)] = static_cast<double>(i) / (N + 1);
    }
    if (static_cast<int>(xi.size()) != N)
        throw ConfigurationError("make_paper_1d: xi must have one threshold per bifunction");
    for (double t : xi)
        if (!(t > 0.0 && t < 1.0))
            throw ConfigurationError("make_paper_1d: thresholds must lie in (0, 1)");

    ProblemInstance p;
    p.dim = 1;
    p.C = FeasibleSet::box(Point::Constant(1, 0.0), Point::Constant(1, 1.0));

    for (int i = 0; i < N; ++i) {
        const double threshold = xi[static_cast<std::size_t>(i)];
        auto B = [threshold](double x) {
            if (x <= threshold) return 0.0;
            const double d = x - threshold;
            return std::exp(d) + std::sin(d) - 1.0;
        };
        BifunctionOracle f;
        f.dim = 1;
        f.c1 = 2.0;
        f.c2 = 2.0;
        f.eval = [B](const Point& x, const Point& y) { return B(x[0]) * (y[0] - x[0]); };
        f.subgrad2 = [B](const Point& w, const Point&) {
            return Point::Constant(1, B(w[0]));
        };
        f.prox_closed = [B](const Point& w, const Point& anchor, double rho,
                            const FeasibleSet& C) {
            return C.project(Point::Constant(1, anchor[0] - rho * B(w[0])));
        };
        p.bifunctions.push_back(std::move(f));
    }

    for (int j = 1; j <= M; ++j) {
        NonexpansiveMap S;
        S.dim = 1;
        S.apply = [j](const Point& x) {
            const double v = std::pow(x[0], static_cast<double>(j)) *
                             std::pow(std::sin(x[0]), static_cast<double>(j - 1)) /
                             (2.0 * j - 1.0);
            return Point::Constant(1, v);
        };
        p.maps.push_back(std::move(S));
    }

    // S_1 is the identity, so a single map leaves the common solution set a
    // whole interval; only from two maps on does it collapse to {0}.
    if (M >= 2) p.known_solution = Point::Zero(1);
    return p;
}

ProblemInstance make_cournot(const CournotSpec& spec) {
    const int n = spec.firms;
    if (n < 1) throw ConfigurationError("make_cournot: need at least one firm");
    auto need = [n](const Point& v, const char* name) {
        if (v.size() != n)
            throw ConfigurationError(std::string("make_cournot: ") + name +
                                     " must have one entry per firm");
    };
    need(spec.alpha, "alpha");
    need(spec.beta, "beta");
    need(spec.tax_quad, "tax_quad");
    need(spec.tax_lin, "tax_lin");
    need(spec.box_lo, "box_lo");
    need(spec.box_hi, "box_hi");
    if ((spec.beta.array() <= 0.0).any())
        throw ConfigurationError("make_cournot: demand slopes beta must be positive");
    if ((spec.tax_quad.array() < 0.0).any())
        throw ConfigurationError("make_cournot: quadratic tax coefficients must be nonnegative");
    if ((spec.box_lo.array() > spec.box_hi.array()).any())
        throw ConfigurationError("make_cournot: box_lo must not exceed box_hi");

    Eigen::MatrixXd P = spec.beta * Eigen::RowVectorXd::Ones(n);
    P.diagonal() += 0.5 * spec.tax_quad;
    const Point Qd = spec.beta + 0.5 * spec.tax_quad;
    const Point q = spec.tax_lin - spec.alpha;
    require_psd_symmetric_part(P, "make_cournot");
    const double half_norm = 0.5 * spectral_norm(P);

    ProblemInstance p;
    p.dim = n;
    p.C = FeasibleSet::box(spec.box_lo, spec.box_hi);
    p.known_solution = spec.known_solution;

    BifunctionOracle f;
    f.dim = n;
    f.c1 = half_norm;
    f.c2 = half_norm;
    f.eval = [P, q, Qd](const Point& x, const Point& y) {
        const double linear = (P * x + q).dot(y - x);
        const double quad = 0.5 * ((y.array().square() - x.array().square()) * Qd.array()).sum();
        return linear + quad;
    };
    f.subgrad2 = [P, q, Qd](const Point& w, const Point& y) -> Point {
        return P * w + q + (Qd.array() * y.array()).matrix();
    };
    // Q is diagonal, so the regularized subproblem separates per coordinate
    // over the box.
    const Point lo = spec.box_lo;
    const Point hi = spec.box_hi;
    f.prox_closed = [P, q, Qd, lo, hi](const Point& w, const Point& anchor, double rho,
                                       const FeasibleSet&) -> Point {
        const Point g = P * w + q;
        Point y(anchor.size());
        for (Eigen::Index k = 0; k < anchor.size(); ++k) {
            const double raw = (anchor[k] - rho * g[k]) / (1.0 + rho * Qd[k]);
            y[k] = std::min(hi[k], std::max(lo[k], raw));
        }
        return y;
    };
    p.bifunctions.push_back(std::move(f));

    if (spec.with_fee_map) {
        need(spec.fee_quad, "fee_quad");
        need(spec.fee_lin, "fee_lin");
        need(spec.fee_abs, "fee_abs");
        if ((spec.fee_quad.array() < 0.0).any() || (spec.fee_abs.array() < 0.0).any())
            throw ConfigurationError("make_cournot: fee coefficients must be nonnegative");
        if (!(spec.prox_scale > 0.0))
            throw ConfigurationError("make_cournot: prox_scale must be positive");
        const Point gamma = spec.fee_quad;
        const Point lin = spec.fee_lin;
        const Point abs_coef = spec.fee_abs;
        const double c = spec.prox_scale;
        NonexpansiveMap S;
        S.dim = n;
        S.apply = [gamma, lin, abs_coef, c, lo, hi](const Point& x) {
            return prox_separable_quadratic(gamma, lin, abs_coef, c, lo, hi, x);
        };
        p.maps.push_back(std::move(S));
    }
    return p;
}

Point prox_separable_quadratic(const Point& gamma,
                               const Point& lin,
                               const Point& abs_coef,
                               double c,
                               const Point& lo,
                               const Point& hi,
                               const Point& x) {
    const Eigen::Index n = x.size();
    if (gamma.size() != n || lin.size() != n || abs_coef.size() != n || lo.size() != n ||
        hi.size() != n)
        throw ConfigurationError("prox_separable_quadratic: size mismatch");
    if (!(c > 0.0)) throw ConfigurationError("prox_separable_quadratic: scale must be positive");
    if ((gamma.array() < 0.0).any() || (abs_coef.array() < 0.0).any())
        throw ConfigurationError("prox_separable_quadratic: coefficients must be nonnegative");

    Point u(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double t = x[k] - c * lin[k];
        const double kappa = c * abs_coef[k];
        const double soft = (t > kappa) ? t - kappa : (t < -kappa ? t + kappa : 0.0);
        const double raw = soft / (1.0 + c * gamma[k]);
        u[k] = std::min(hi[k], std::max(lo[k], raw));
    }
    return u;
}

AffineVIFamily make_affine_vi(const std::vector<Eigen::MatrixXd>& Ms,
                              const Point& x_star,
                              const FeasibleSet& C,
                              std::optional<double> L) {
    if (Ms.empty()) throw ConfigurationError("make_affine_vi: need at least one matrix");
    const Eigen::Index dim = x_star.size();
    if (dim != C.dim) throw ConfigurationError("make_affine_vi: x_star/C dimension mismatch");
    if (!C.contains || !C.contains(x_star))
        throw ConfigurationError("make_affine_vi: x_star must lie in C");

    AffineVIFamily family;
    family.C = C;
    family.known_solution = x_star;

    double max_norm = 0.0;
    for (std::size_t i = 0; i < Ms.size(); ++i) {
        const Eigen::MatrixXd& Mi = Ms[i];
        if (Mi.rows() != dim || Mi.cols() != dim)
            throw ConfigurationError("make_affine_vi: matrix " + std::to_string(i) +
                                     " has wrong shape");
        require_psd_symmetric_part(Mi, "make_affine_vi");
        max_norm = std::max(max_norm, spectral_norm(Mi));

        const Point qi = -(Mi * x_star);
        VectorField A;
        A.dim = static_cast<int>(dim);
        A.apply = [Mi, qi](const Point& x) -> Point { return Mi * x + qi; };
        family.fields.push_back(std::move(A));
    }
    if (L) {
        if (!(*L > 0.0)) throw ConfigurationError("make_affine_vi: L must be positive");
        family.L = *L;
    } else {
        if (max_norm == 0.0) max_norm = 1.0;   // all-zero fields: any L works
        family.L = max_norm;
    }
    return family;
}

ProblemInstance make_toy(int dim, double half_width) {
    if (dim < 1) throw ConfigurationError("make_toy: dim must be positive");
    if (!(half_width > 0.0)) throw ConfigurationError("make_toy: half_width must be positive");
    ProblemInstance p;
    p.dim = dim;
    p.C = FeasibleSet::box(Point::Constant(dim, -half_width), Point::Constant(dim, half_width));

    BifunctionOracle f;
    f.dim = dim;
    f.eval = [](const Point&, const Point&) { return 0.0; };
    f.subgrad2 = [dim](const Point&, const Point&) { return Point::Zero(dim); };
    f.prox_closed = [](const Point&, const Point& anchor, double, const FeasibleSet& C) {
        return C.project(anchor);
    };
    p.bifunctions.push_back(std::move(f));

    NonexpansiveMap S;
    S.dim = dim;
    S.apply = [](const Point& x) { return x; };
    p.maps.push_back(std::move(S));
    return p;
}

}  // namespace equihybrid
