#include "partopt/phase_field.hpp"

#include <cmath>
#include <random>

namespace partopt {

namespace {

double default_tol(double tol_g, std::size_t unknowns) {
    return tol_g > 0.0 ? tol_g : 1e-6 * std::sqrt(static_cast<double>(unknowns));
}

QuasiNewtonOptions qn_options(const MinimizeOptions& opt, std::size_t unknowns) {
    QuasiNewtonOptions q;
    q.tol_g = default_tol(opt.tol_g, unknowns);
    q.max_iter = opt.max_iter;
    q.memory = opt.memory;
    return q;
}

Eigen::VectorXd stack(const Fields& us) {
    const Eigen::Index N = us.front().size();
    Eigen::VectorXd x(N * static_cast<Eigen::Index>(us.size()));
    for (std::size_t i = 0; i < us.size(); ++i)
        x.segment(static_cast<Eigen::Index>(i) * N, N) = us[i];
    return x;
}

Fields unstack(const Eigen::VectorXd& x, std::size_t n) {
    const Eigen::Index N = x.size() / static_cast<Eigen::Index>(n);
    Fields us(n);
    for (std::size_t i = 0; i < n; ++i)
        us[i] = x.segment(static_cast<Eigen::Index>(i) * N, N);
    return us;
}

} // namespace

MinimizeResult minimize_single(const Field& u0, const FemSystem& fem, const MMParams& p, double target,
                               const MinimizeOptions& opt) {
    p.validate();
    const Field& m = fem.m;
    if (u0.size() != m.size())
        throw DimensionMismatch("initial field does not match the mesh");

    ObjectiveHandle obj;
    obj.evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = grad_single(x, fem.M, fem.K, p);
        return energy_single(x, fem.M, fem.K, p);
    };
    obj.post_process_gradient = [&](Eigen::VectorXd& g) { g = project_gradient_single(g, m); };

    MinimizeResult res;
    QuasiNewtonOptions q = qn_options(opt, static_cast<std::size_t>(u0.size()));
    q.stop = [&](const Eigen::VectorXd& x, double) {
        res.residual_history.push_back(std::abs(x.dot(m) - target));
        return false;
    };
    SolveResult sr = quasi_newton_minimize(obj, project_single(u0, m, target), q);
    res.report = sr.report;

    // Truncate, then restore the volume with the interface-weighted
    // projection applied to the complementary pair so values stay in [0,1].
    const double area = m.sum();
    const Field u = sr.x.cwiseMax(0.0).cwiseMin(1.0);
    Fields pair = project_multi({u, Field::Ones(u.size()) - u}, m, {target, area - target});
    res.fields = {pair[0]};
    res.energy = energy_single(pair[0], fem.M, fem.K, p);
    res.final_residual = std::abs(pair[0].dot(m) - target);
    if (!res.report.converged && opt.throw_on_failure)
        throw MinimizeNotConverged("single-phase minimization stopped before reaching tol_g", res);
    return res;
}

MinimizeResult minimize_multi(const Fields& us0, const FemSystem& fem, const MMParams& p,
                              const std::vector<double>& targets, const MinimizeOptions& opt) {
    p.validate();
    if (us0.empty() || us0.size() != targets.size())
        throw DimensionMismatch("number of fields and targets differ");
    const std::size_t n = us0.size();
    const Field& m = fem.m;
    MinimizeResult res;
    if (n == 1) {
        res.fields = {Field::Ones(m.size())};
        res.energy = energy_multi(res.fields, fem.M, fem.K, p);
        res.report.converged = true;
        res.report.value = res.energy;
        res.report.history = {res.energy};
        res.final_residual = constraint_residuals(res.fields, m, targets).integral_residual;
        return res;
    }

    auto residual = [&](const Fields& us) {
        const ProjectionReport r = constraint_residuals(us, m, targets);
        return std::max(r.integral_residual, r.sum_residual);
    };

    ObjectiveHandle obj;
    obj.evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const Fields us = unstack(x, n);
        g = stack(grad_multi(us, fem.M, fem.K, p));
        return energy_multi(us, fem.M, fem.K, p);
    };
    obj.post_process_gradient = [&](Eigen::VectorXd& g) { g = stack(project_gradient_multi(unstack(g, n), m)); };

    QuasiNewtonOptions q = qn_options(opt, n * static_cast<std::size_t>(m.size()));
    q.stop = [&](const Eigen::VectorXd& x, double) {
        res.residual_history.push_back(residual(unstack(x, n)));
        return false;
    };
    const Fields start = project_multi(us0, m, targets);
    SolveResult sr = quasi_newton_minimize(obj, stack(start), q);
    res.report = sr.report;

    Fields us = unstack(sr.x, n);
    for (auto& u : us) u = u.cwiseMax(0.0).cwiseMin(1.0);
    res.fields = project_multi(us, m, targets);
    res.energy = energy_multi(res.fields, fem.M, fem.K, p);
    res.final_residual = residual(res.fields);
    if (!res.report.converged && opt.throw_on_failure)
        throw MinimizeNotConverged("multi-phase minimization stopped before reaching tol_g", res);
    return res;
}

Fields random_feasible_fields(const TriMesh& mesh, const FemSystem& fem, const std::vector<double>& targets,
                              std::uint64_t seed) {
    const std::size_t n = targets.size();
    const std::size_t N = mesh.num_nodes();
    if (n == 0)
        throw ValidationError("at least one phase is required");
    if (n == 1)
        return {Field::Ones(static_cast<Eigen::Index>(N))};

    Point2 lo = mesh.nodes.front(), hi = lo;
    for (const auto& q : mesh.nodes) {
        lo.x = std::min(lo.x, q.x); lo.y = std::min(lo.y, q.y);
        hi.x = std::max(hi.x, q.x); hi.y = std::max(hi.y, q.y);
    }
    const double diam = distance(lo, hi);
    const double sigma = 0.2 * diam;

    // Each phase is a sum of random Gaussian bumps; the nodal partition of
    // unity is then projected onto the integral constraints.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y), amp(0.5, 1.0);
    constexpr int kBumps = 6;
    Fields us(n, Field::Constant(static_cast<Eigen::Index>(N), 1e-3));
    for (std::size_t i = 0; i < n; ++i)
        for (int b = 0; b < kBumps; ++b) {
            const Point2 c(ux(rng), uy(rng));
            const double a = amp(rng);
            for (std::size_t k = 0; k < N; ++k)
                us[i][k] += a * std::exp(-norm2(mesh.nodes[k] - c) / (2.0 * sigma * sigma));
        }
    Field sum = Field::Zero(static_cast<Eigen::Index>(N));
    for (const auto& u : us) sum += u;
    for (auto& u : us) u = u.cwiseQuotient(sum);
    return project_multi(us, fem.m, targets);
}

} // namespace partopt
