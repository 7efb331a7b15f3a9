#pragma once

#include "partopt/errors.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace partopt {

/// f(x) with its gradient written into `grad` (resized by the callee).
using ObjectiveFn = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;
/// In-place gradient transform, e.g. projection onto a constraint tangent space.
using GradientFilter = std::function<void(Eigen::VectorXd& grad)>;

struct ObjectiveHandle {
    ObjectiveFn evaluate;
    GradientFilter post_process_gradient; ///< optional
};

struct SolveReport {
    int iterations = 0;
    double value = 0.0;
    double gradient_norm = 0.0;
    bool converged = false;
    bool line_search_failed = false;
    std::vector<double> history; ///< accepted values, iterations + 1 entries
};

struct SolveResult {
    Eigen::VectorXd x;
    SolveReport report;
};

struct QuasiNewtonOptions {
    double tol_g = 1e-6;
    int max_iter = 2000;
    int memory = 10;
    double armijo_c1 = 1e-4;
    int max_backtracks = 50;
    /// Optional extra stopping rule evaluated at every accepted iterate.
    std::function<bool(const Eigen::VectorXd& x, double value)> stop;
};

/// Limited-memory BFGS (two-loop recursion, initial scaling s'y/y'y) with an
/// Armijo backtracking line search. Every gradient passes through
/// `post_process_gradient` before use, so iterates stay in the affine set of
/// x0 when the filter projects onto its tangent space. Accepted values are
/// non-increasing. A failing line search returns the best point with
/// `line_search_failed` set.
SolveResult quasi_newton_minimize(const ObjectiveHandle& obj, const Eigen::VectorXd& x0,
                                  const QuasiNewtonOptions& opt = {});

/// Vector of inequality constraints g(x) <= 0 with Jacobian columns:
/// jac.col(i) = grad g_i(x).
using ConstraintFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& values, Eigen::MatrixXd& jac)>;

struct AugmentedLagrangianOptions {
    double tol_c = 1e-8;
    int max_outer = 40;
    double penalty0 = 10.0;
    double penalty_growth = 10.0;
    double stall_ratio = 0.5; ///< grow the penalty unless the residual drops below this fraction
    double multiplier_cap = 1e8;
    QuasiNewtonOptions inner{1e-8, 500, 10, 1e-4, 50, {}};
};

struct ConstrainedResult {
    Eigen::VectorXd x;
    SolveReport report;
    Eigen::VectorXd multipliers;
    double max_violation = 0.0;
    int outer_iterations = 0;
};

class ConstrainedNotConverged : public NotConverged {
public:
    ConstrainedNotConverged(const std::string& what, int iterations, double residual, Eigen::VectorXd best)
        : NotConverged(what, iterations, residual), best_(std::move(best)) {}
    const Eigen::VectorXd& best_point() const { return best_; }

private:
    Eigen::VectorXd best_;
};

/// Powell-Hestenes-Rockafellar augmented Lagrangian for g(x) <= 0 with the
/// quasi-Newton minimizer as inner solver. Returns a point whose largest
/// violation is <= tol_c or throws ConstrainedNotConverged carrying the
/// least-violating iterate.
ConstrainedResult augmented_lagrangian_solve(const ObjectiveHandle& obj, const ConstraintFn& constraints,
                                             const Eigen::VectorXd& x0,
                                             const AugmentedLagrangianOptions& opt = {});

} // namespace partopt
