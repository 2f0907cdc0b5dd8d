#pragma once

#include "equihybrid/core.hpp"

#include <optional>
#include <vector>

namespace equihybrid {

/// Scalar benchmark family on C = [0, 1]: N piecewise-smooth bifunctions
/// f_i(x, y) = B_i(x)(y - x) with
///   B_i(x) = 0                                   for x <= xi_i,
///   B_i(x) = exp(x - xi_i) + sin(x - xi_i) - 1   for x >  xi_i,
/// thresholds xi_i = i/(N+1) by default, Lipschitz-type constants
/// c1 = c2 = 2, and M nonexpansive self-maps
///   S_j(x) = x^j sin^(j-1)(x) / (2j - 1).
/// All bifunctions vanish on [0, xi_1]. S_1 is the identity map; every S_j
/// with j >= 2 fixes only 0. Hence with M >= 2 the unique common solution
/// is x* = 0 (recorded as known_solution); with M <= 1 the solution set is
/// the interval [0, xi_1] and no single point is recorded.
struct Scalar1DSpec {
    int n_bifunctions = 1;
    int n_maps = 1;
    std::vector<double> xi;   // empty: defaults to i/(N+1), i = 1..N
};

ProblemInstance make_paper_1d(const Scalar1DSpec& spec);

/// Oligopoly equilibrium with quadratic taxes/fees. Firm j picks output
/// x_j in [lo_j, hi_j] and sells at the linear inverse demand
/// alpha_j - beta_j * sum_k x_k; the levy on its output is
/// 0.5 tau_j x_j^2 + t_j x_j (any linear production cost folds into t_j).
/// Stationarity of every firm's profit is encoded as EP(f) for
///   f(x, y) = <P x + q, y - x> + 0.5 (y' Q y - x' Q x),
///   P_jk = beta_j + 0.5 tau_j delta_jk,  Q = diag(beta_j + 0.5 tau_j),
///   q_j = t_j - alpha_j,
/// whose first-order conditions match the game's exactly. f is monotone iff
/// the symmetric part of P is PSD; entries 0.5 (beta_j + beta_k) can lose
/// that for wildly unequal slopes, so the factory checks the smallest
/// eigenvalue and rejects indefinite data. c1 = c2 = 0.5 ||P||_2. A
/// closed-form prox is attached (Q is diagonal, so the regularized
/// subproblem separates per coordinate over the box).
///
/// The optional service-fee map is the scaled proximal operator of
/// 0.5 gamma_j u^2 + d_j u + mu_j |u| over the box (prox of a convex
/// function: nonexpansive, maps into the box). Its fixed points over the
/// box are the fee-optimal outputs.
struct CournotSpec {
    int firms = 2;
    Point alpha;          // price intercepts (per firm), > 0
    Point beta;           // inverse-demand slopes (per firm), > 0
    Point tax_quad;       // tau_j >= 0
    Point tax_lin;        // t_j
    Point box_lo;
    Point box_hi;
    bool with_fee_map = false;
    Point fee_quad;       // gamma_j >= 0
    Point fee_lin;        // d_j
    Point fee_abs;        // mu_j >= 0
    double prox_scale = 1.0;   // c > 0 in prox_{c g}
    std::optional<Point> known_solution;
};

ProblemInstance make_cournot(const CournotSpec& spec);

/// prox_{c g}(x) over the box [lo, hi] for the separable convex
/// g(u) = sum_j 0.5 gamma_j u_j^2 + lin_j u_j + abs_j |u_j|:
/// soft-threshold, scale by 1/(1 + c gamma_j), clamp.
Point prox_separable_quadratic(const Point& gamma,
                               const Point& lin,
                               const Point& abs_coef,
                               double c,
                               const Point& lo,
                               const Point& hi,
                               const Point& x);

/// Affine variational-inequality family: fields A_i(x) = M_i x + q_i with
/// q_i = -M_i x_star, so x_star solves every member. Each M_i must have a
/// positive-semidefinite symmetric part (monotone field); indefinite input
/// is a ConfigurationError. L defaults to the largest spectral norm.
struct AffineVIFamily {
    std::vector<VectorField> fields;
    FeasibleSet C;
    double L = 0.0;
    Point known_solution;
};

AffineVIFamily make_affine_vi(const std::vector<Eigen::MatrixXd>& Ms,
                              const Point& x_star,
                              const FeasibleSet& C,
                              std::optional<double> L = std::nullopt);

/// Minimal fixed-point instance: one zero bifunction and one identity map
/// on a centered box. From any interior x0 the iteration certifies the
/// exact fixed point immediately.
ProblemInstance make_toy(int dim, double half_width = 1.0);

}  // namespace equihybrid
