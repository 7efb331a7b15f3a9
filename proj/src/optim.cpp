#include "partopt/optim.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace partopt {

namespace {

struct CurvaturePair {
    Eigen::VectorXd s, y;
    double rho;
};

Eigen::VectorXd two_loop(const std::deque<CurvaturePair>& mem, const Eigen::VectorXd& g) {
    Eigen::VectorXd q = g;
    std::vector<double> alpha(mem.size());
    for (int k = static_cast<int>(mem.size()) - 1; k >= 0; --k) {
        alpha[k] = mem[k].rho * mem[k].s.dot(q);
        q -= alpha[k] * mem[k].y;
    }
    const auto& last = mem.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
    for (std::size_t k = 0; k < mem.size(); ++k) {
        const double beta = mem[k].rho * mem[k].y.dot(q);
        q += (alpha[k] - beta) * mem[k].s;
    }
    return -q;
}

} // namespace

SolveResult quasi_newton_minimize(const ObjectiveHandle& obj, const Eigen::VectorXd& x0,
                                  const QuasiNewtonOptions& opt) {
    auto eval = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const double f = obj.evaluate(x, g);
        if (obj.post_process_gradient)
            obj.post_process_gradient(g);
        return f;
    };

    SolveResult res;
    res.x = x0;
    Eigen::VectorXd g;
    double f = eval(res.x, g);
    SolveReport& rep = res.report;
    rep.history.push_back(f);

    std::deque<CurvaturePair> mem;
    Eigen::VectorXd x_new, g_new;
    bool first = true;
    while (true) {
        const double gnorm = g.norm();
        rep.value = f;
        rep.gradient_norm = gnorm;
        if (gnorm <= opt.tol_g || (opt.stop && opt.stop(res.x, f))) {
            rep.converged = true;
            break;
        }
        if (rep.iterations >= opt.max_iter)
            break;

        Eigen::VectorXd d = mem.empty() ? Eigen::VectorXd(-g) : two_loop(mem, g);
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            mem.clear();
            d = -g;
            slope = -gnorm * gnorm;
        }
        double step = (first || mem.empty()) ? std::min(1.0, 1.0 / gnorm) : 1.0;

        bool accepted = false;
        double f_new = f;
        for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
            x_new = res.x + step * d;
            f_new = eval(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= f + opt.armijo_c1 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (!mem.empty()) {
                mem.clear(); // retry once along steepest descent
                first = true;
                continue;
            }
            rep.line_search_failed = true;
            break;
        }

        Eigen::VectorXd s = x_new - res.x;
        Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
            mem.push_back({std::move(s), std::move(y), 1.0 / sy});
            if (static_cast<int>(mem.size()) > opt.memory)
                mem.pop_front();
        }
        res.x.swap(x_new);
        g.swap(g_new);
        f = f_new;
        first = false;
        ++rep.iterations;
        rep.history.push_back(f);
    }
    return res;
}

ConstrainedResult augmented_lagrangian_solve(const ObjectiveHandle& obj, const ConstraintFn& constraints,
                                             const Eigen::VectorXd& x0,
                                             const AugmentedLagrangianOptions& opt) {
    Eigen::VectorXd values;
    Eigen::MatrixXd jac;
    constraints(x0, values, jac);
    const Eigen::Index m = values.size();

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
    double rho = opt.penalty0;

    ObjectiveHandle lagrangian;
    lagrangian.post_process_gradient = obj.post_process_gradient;
    lagrangian.evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        const double f = obj.evaluate(x, grad);
        Eigen::VectorXd gv;
        Eigen::MatrixXd gj;
        constraints(x, gv, gj);
        double pen = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double shifted = std::max(0.0, lambda[i] + rho * gv[i]);
            pen += shifted * shifted - lambda[i] * lambda[i];
            if (shifted > 0.0)
                grad += shifted * gj.col(i);
        }
        return f + pen / (2.0 * rho);
    };

    ConstrainedResult out;
    out.x = x0;
    Eigen::VectorXd best_x = x0;
    double best_violation = std::max(0.0, values.maxCoeff());
    double prev_violation = std::numeric_limits<double>::infinity();

    for (int outer = 0; outer < opt.max_outer; ++outer) {
        SolveResult inner = quasi_newton_minimize(lagrangian, out.x, opt.inner);
        out.x = inner.x;
        out.report.iterations += inner.report.iterations;
        out.report.history.insert(out.report.history.end(), inner.report.history.begin(),
                                  inner.report.history.end());
        out.report.gradient_norm = inner.report.gradient_norm;
        out.report.line_search_failed = inner.report.line_search_failed;

        constraints(out.x, values, jac);
        const double violation = std::max(0.0, values.maxCoeff());
        out.outer_iterations = outer + 1;
        if (violation < best_violation) {
            best_violation = violation;
            best_x = out.x;
        }
        for (Eigen::Index i = 0; i < m; ++i)
            lambda[i] = std::min(opt.multiplier_cap, std::max(0.0, lambda[i] + rho * values[i]));

        if (violation <= opt.tol_c) {
            Eigen::VectorXd g;
            out.report.value = obj.evaluate(out.x, g);
            out.report.converged = true;
            out.multipliers = lambda;
            out.max_violation = violation;
            return out;
        }
        if (violation > opt.stall_ratio * prev_violation)
            rho *= opt.penalty_growth;
        prev_violation = violation;
    }
    throw ConstrainedNotConverged("augmented Lagrangian did not reach the constraint tolerance",
                                  out.outer_iterations, best_violation, best_x);
}

} // namespace partopt
