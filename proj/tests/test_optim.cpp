#include "partopt/optim.hpp"

#include <doctest.h>

#include <cmath>

using namespace partopt;

namespace {

ObjectiveHandle half_norm() {
    return {[](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
                g = x;
                return 0.5 * x.squaredNorm();
            },
            {}};
}

ObjectiveHandle rosenbrock() {
    return {[](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
                const double a = 1 - x[0], b = x[1] - x[0] * x[0];
                g.resize(2);
                g[0] = -2 * a - 400 * x[0] * b;
                g[1] = 200 * b;
                return a * a + 100 * b * b;
            },
            {}};
}

} // namespace

TEST_CASE("quadratic in dimension 100") {
    const SolveResult r = quasi_newton_minimize(half_norm(), Eigen::VectorXd::Ones(100), {1e-10, 100, 10, 1e-4, 50, {}});
    CHECK(r.report.converged);
    CHECK(r.report.value <= 1e-12);
    CHECK(r.report.iterations <= 25);
    CHECK(r.x.cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(r.report.history.size() == static_cast<std::size_t>(r.report.iterations) + 1);
}

TEST_CASE("Rosenbrock") {
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    const SolveResult r = quasi_newton_minimize(rosenbrock(), x0, {1e-10, 2000, 10, 1e-4, 50, {}});
    CHECK(r.report.converged);
    CHECK(std::abs(r.x[0] - 1.0) <= 1e-6);
    CHECK(std::abs(r.x[1] - 1.0) <= 1e-6);
    for (std::size_t k = 1; k < r.report.history.size(); ++k) CHECK(r.report.history[k] <= r.report.history[k - 1]);
    const SolveResult again = quasi_newton_minimize(rosenbrock(), x0, {1e-10, 2000, 10, 1e-4, 50, {}});
    CHECK(again.x == r.x);
    CHECK(again.report.history == r.report.history);
}

TEST_CASE("projected gradients keep the iterates on the affine set") {
    Eigen::VectorXd c(5);
    c << 1, -2, 3, 0.5, 4;
    ObjectiveHandle obj{[&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
                            g = x - c;
                            return 0.5 * (x - c).squaredNorm() + std::pow(x[0], 4);
                        },
                        [](Eigen::VectorXd& g) { g.array() -= g.mean(); }};
    obj.evaluate = [&, f = obj.evaluate](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const double v = f(x, g);
        g[0] += 4 * std::pow(x[0], 3);
        return v;
    };
    Eigen::VectorXd x0(5);
    x0 << 0.3, 0.1, -0.2, 0.7, 1.1;
    QuasiNewtonOptions opt{1e-10, 500, 10, 1e-4, 50, {}};
    std::vector<double> sums;
    opt.stop = [&](const Eigen::VectorXd& x, double) {
        sums.push_back(x.sum());
        return false;
    };
    const SolveResult r = quasi_newton_minimize(obj, x0, opt);
    CHECK(r.report.converged);
    REQUIRE_FALSE(sums.empty());
    for (double s : sums) CHECK(std::abs(s - x0.sum()) <= 1e-12);
    CHECK(std::abs(r.x.sum() - x0.sum()) <= 1e-12);
}

TEST_CASE("line search failure is reported") {
    // Gradient pointing the wrong way: no descent is possible along -g.
    ObjectiveHandle bad{[](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
                            g = -x;
                            return 0.5 * x.squaredNorm();
                        },
                        {}};
    const SolveResult r = quasi_newton_minimize(bad, Eigen::VectorXd::Ones(3));
    CHECK(r.report.line_search_failed);
    CHECK_FALSE(r.report.converged);
    CHECK(r.report.value == doctest::Approx(1.5));
}

TEST_CASE("augmented Lagrangian: projection onto a half-plane") {
    ObjectiveHandle obj{[](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
                            g = 2 * x;
                            return x.squaredNorm();
                        },
                        {}};
    const ConstraintFn con = [](const Eigen::VectorXd& x, Eigen::VectorXd& v, Eigen::MatrixXd& J) {
        v.resize(1);
        v[0] = 1 - x[0] - x[1];
        J.resize(2, 1);
        J << -1, -1;
    };
    const ConstrainedResult r = augmented_lagrangian_solve(obj, con, Eigen::VectorXd::Zero(2));
    CHECK(std::abs(r.x[0] - 0.5) <= 1e-6);
    CHECK(std::abs(r.x[1] - 0.5) <= 1e-6);
    CHECK(r.max_violation <= 1e-8);
    CHECK(r.multipliers[0] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("augmented Lagrangian: active bound") {
    ObjectiveHandle obj{[](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
                            g = Eigen::VectorXd::Ones(1);
                            return x[0];
                        },
                        {}};
    const ConstraintFn con = [](const Eigen::VectorXd& x, Eigen::VectorXd& v, Eigen::MatrixXd& J) {
        v = -x;
        J = -Eigen::MatrixXd::Identity(1, 1);
    };
    AugmentedLagrangianOptions opt;
    opt.tol_c = 1e-8;
    const ConstrainedResult r = augmented_lagrangian_solve(obj, con, Eigen::VectorXd::Constant(1, 2.0), opt);
    CHECK(-r.x[0] <= opt.tol_c);
    CHECK(std::abs(r.x[0]) <= 1e-6);
}

TEST_CASE("augmented Lagrangian: inactive constraint leaves the minimum alone") {
    ObjectiveHandle obj{[](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
                            g = 2 * (x.array() - 0.25).matrix();
                            return (x.array() - 0.25).square().sum();
                        },
                        {}};
    const ConstraintFn con = [](const Eigen::VectorXd& x, Eigen::VectorXd& v, Eigen::MatrixXd& J) {
        v.resize(1);
        v[0] = x[0] + x[1] - 1;
        J = Eigen::MatrixXd::Ones(2, 1);
    };
    const ConstrainedResult r = augmented_lagrangian_solve(obj, con, Eigen::VectorXd::Zero(2));
    CHECK(std::abs(r.x[0] - 0.25) <= 1e-6);
    CHECK(std::abs(r.multipliers[0]) <= 1e-6);
}
