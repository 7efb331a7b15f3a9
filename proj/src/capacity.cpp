#include "partopt/capacity.hpp"

#include "partopt/errors.hpp"
#include "partopt/optim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace partopt {

CapacityMode parse_capacity_mode(const std::string& s) {
    if (s == "areas-only") return CapacityMode::AreasOnly;
    if (s == "min-perimeter") return CapacityMode::MinPerimeter;
    if (s == "lloyd-constrained") return CapacityMode::LloydConstrained;
    throw ValidationError("unknown capacity mode '" + s + "'");
}

std::string to_string(CapacityMode m) {
    switch (m) {
    case CapacityMode::AreasOnly: return "areas-only";
    case CapacityMode::MinPerimeter: return "min-perimeter";
    case CapacityMode::LloydConstrained: return "lloyd-constrained";
    }
    return "?";
}

namespace {

Eigen::VectorXd area_residual(std::span<const Point2> pts, const Polygon& omega, std::span<const double> targets) {
    const auto cells = clip_cells(pts, omega);
    Eigen::VectorXd r(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
        r[i] = cells[i].area - targets[i];
    return r;
}

/// Gauss-Newton with least-norm steps on the area equations.
std::vector<Point2> polish(std::vector<Point2> pts, const Polygon& omega, std::span<const double> targets,
                           double goal, int& iterations) {
    Eigen::VectorXd r = area_residual(pts, omega, targets);
    double res = r.cwiseAbs().maxCoeff();
    for (int it = 0; it < 60 && res > goal; ++it) {
        const Eigen::MatrixXd J = area_gradients(pts, omega).transpose();
        const Eigen::VectorXd step = -J.completeOrthogonalDecomposition().solve(r);
        bool improved = false;
        for (double t = 1.0; t > 1e-4; t *= 0.5) {
            std::vector<Point2> trial = unpack_points(pack_points(pts) + t * step);
            try {
                const Eigen::VectorXd rt = area_residual(trial, omega, targets);
                const double rest = rt.cwiseAbs().maxCoeff();
                if (rest < res) {
                    pts = std::move(trial);
                    r = rt;
                    res = rest;
                    improved = true;
                    break;
                }
            } catch (const DuplicatePoints&) {
            }
        }
        ++iterations;
        if (!improved) break;
    }
    return pts;
}

double mode_objective(CapacityMode mode, std::span<const Point2> pts, const Polygon& omega,
                      std::span<const double> targets, Eigen::VectorXd* grad) {
    switch (mode) {
    case CapacityMode::AreasOnly: {
        auto vg = capacity_objective(pts, omega, targets);
        if (grad) *grad = vg.gradient;
        return vg.value;
    }
    case CapacityMode::MinPerimeter: {
        if (grad) *grad = perimeter_gradients(pts, omega).rowwise().sum();
        return total_perimeter(pts, omega);
    }
    case CapacityMode::LloydConstrained: {
        auto vg = lloyd_energy(pts, omega);
        if (grad) *grad = vg.gradient;
        return vg.value;
    }
    }
    return 0.0;
}

// Trial points where two sites meet, or where the perimeter gradient is not
// defined, are rejected by the line search. The area polish finishes from
// the last accepted point.
double guarded_objective(CapacityMode mode, const Eigen::VectorXd& x, const Polygon& omega,
                         std::span<const double> targets, Eigen::VectorXd& g) {
    try {
        return mode_objective(mode, unpack_points(x), omega, targets, &g);
    } catch (const Error& e) {
        if (e.kind() != "DuplicatePoints" && e.kind() != "NonSmoothConfiguration") throw;
        g = Eigen::VectorXd::Zero(x.size());
        return std::numeric_limits<double>::infinity();
    }
}

void validate_targets(std::span<const double> targets, std::size_t n, double area) {
    if (targets.size() != n)
        throw DimensionMismatch("one target per site is required");
    double sum = 0.0;
    for (double t : targets) {
        if (!(t > 0.0)) throw ValidationError("capacity targets must be positive");
        sum += t;
    }
    if (std::abs(sum - area) > 1e-9 * std::max(1.0, area))
        throw ValidationError("capacity targets must sum to the domain area");
}

} // namespace

CapacityResult solve_capacity_constrained(std::span<const Point2> points0, const Polygon& omega,
                                          std::span<const double> targets, CapacityMode mode,
                                          const CapacityOptions& opt) {
    const std::size_t n = points0.size();
    const double area = omega.area();
    validate_targets(targets, n, area);
    if (!omega.is_convex(1e-12))
        throw NonConvexClip("domain polygon is not convex");
    const double goal = opt.residual_tol * area;

    CapacityResult out;
    std::vector<Point2> start(points0.begin(), points0.end());
    if (n == 1) {
        out.points = start;
        out.areas = {area};
        return out;
    }
    for (int k = 0; k < opt.lloyd_steps; ++k)
        start = lloyd_step(start, omega);

    const double scale = omega.scale();
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1e-3 * scale);

    // Feasible sites from the area equations alone.
    auto areas_only = [&](const std::vector<Point2>& from, int& iters) {
        ObjectiveHandle obj;
        obj.evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
            return guarded_objective(CapacityMode::AreasOnly, x, omega, targets, g);
        };
        QuasiNewtonOptions q;
        q.tol_g = 0.0;
        q.max_iter = 2000;
        const double coarse = 1e-4 * area / n;
        q.stop = [&](const Eigen::VectorXd& x, double) {
            return area_residual(unpack_points(x), omega, targets).cwiseAbs().maxCoeff() <= coarse;
        };
        SolveResult sr = quasi_newton_minimize(obj, pack_points(from), q);
        iters += sr.report.iterations;
        return polish(unpack_points(sr.x), omega, targets, 1e-3 * goal, iters);
    };

    for (int attempt = 0;; ++attempt) {
        try {
            int iters = 0;
            std::vector<Point2> pts = areas_only(start, iters);
            double res = area_residual(pts, omega, targets).cwiseAbs().maxCoeff();
            if (mode != CapacityMode::AreasOnly && res <= goal) {
                // Starting feasible keeps sites from escaping the domain, where
                // an empty cell has no area gradient to bring them back.
                ObjectiveHandle obj;
                obj.evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
                    return guarded_objective(mode, x, omega, targets, g);
                };
                const ConstraintFn cons = [&](const Eigen::VectorXd& x, Eigen::VectorXd& v, Eigen::MatrixXd& jac) {
                    const auto p = unpack_points(x);
                    try {
                        v = area_residual(p, omega, targets);
                        jac = area_gradients(p, omega);
                    } catch (const DuplicatePoints&) {
                        v = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n),
                                                      std::numeric_limits<double>::infinity());
                        jac = Eigen::MatrixXd::Zero(x.size(), static_cast<Eigen::Index>(n));
                    }
                };
                AugmentedLagrangianOptions al;
                al.tol_c = 1e-7 * area / n;
                al.max_outer = opt.max_outer;
                al.penalty0 = 1000.0 * n / area; // sites are O(1) apart, areas O(area / n)
                al.inner.tol_g = 1e-6;
                al.inner.max_iter = 300;
                Eigen::VectorXd x;
                try {
                    ConstrainedResult cr = augmented_lagrangian_solve(obj, cons, pack_points(pts), al);
                    x = cr.x;
                    iters += cr.report.iterations;
                } catch (const ConstrainedNotConverged& e) {
                    x = e.best_point(); // the equality polish below decides
                    iters += e.iterations();
                }
                try {
                    std::vector<Point2> cand = polish(unpack_points(x), omega, targets, 1e-3 * goal, iters);
                    const double cres = area_residual(cand, omega, targets).cwiseAbs().maxCoeff();
                    if (cres <= goal && mode_objective(mode, cand, omega, targets, nullptr) <=
                                            mode_objective(mode, pts, omega, targets, nullptr)) {
                        pts = std::move(cand);
                        res = cres;
                    }
                } catch (const Error& e) {
                    if (e.kind() != "NonSmoothConfiguration" && e.kind() != "DuplicatePoints") throw;
                }
            }
            out.max_residual = res;
            out.iterations = iters;
            out.retries = attempt;
            if (out.max_residual > goal)
                throw NotConverged("capacity constraints not met (" + to_string(mode) + ")", iters, out.max_residual);
            const Eigen::VectorXd r = area_residual(pts, omega, targets);
            out.areas.resize(n);
            for (std::size_t i = 0; i < n; ++i) out.areas[i] = r[i] + targets[i];
            out.objective = mode_objective(mode, pts, omega, targets, nullptr);
            out.points = std::move(pts);
            return out;
        } catch (const Error& e) {
            if (e.kind() != "NonSmoothConfiguration" && e.kind() != "DuplicatePoints")
                throw;
            if (attempt >= opt.max_retries)
                throw;
            for (auto& p : start) {
                p.x += gauss(rng);
                p.y += gauss(rng);
            }
        }
    }
}

std::vector<Point2> sample_points(const Polygon& omega, int n, std::uint64_t seed) {
    Point2 lo = omega[0], hi = omega[0];
    for (const auto& v : omega.vertices()) {
        lo.x = std::min(lo.x, v.x); lo.y = std::min(lo.y, v.y);
        hi.x = std::max(hi.x, v.x); hi.y = std::max(hi.y, v.y);
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
    std::vector<Point2> pts;
    pts.reserve(n);
    while (static_cast<int>(pts.size()) < n) {
        const double x = ux(rng);
        const double y = uy(rng);
        const Point2 p(x, y);
        if (omega.contains(p))
            pts.push_back(p);
    }
    return pts;
}

Polygon convex_hull(std::span<const Point2> input) {
    std::vector<Point2> pts(input.begin(), input.end());
    std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3)
        throw DegeneratePolygon("convex hull needs three distinct points");
    std::vector<Point2> h(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(h[k - 1] - h[k - 2], pts[i - 1] - h[k - 2]) <= 0) --k;
        h[k++] = pts[i - 1];
    }
    h.resize(k - 1);
    return Polygon(std::move(h));
}

InitializationResult generate_initialization(const TriMesh& mesh, const FemSystem& fem,
                                             const std::vector<double>& fractions, int restarts,
                                             std::uint64_t seed, CapacityMode mode, int smoothing_passes) {
    const std::size_t n = fractions.size();
    if (n == 0)
        throw ValidationError("at least one phase is required");
    double fsum = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0)) throw ValidationError("fractions must be positive");
        fsum += f;
    }
    if (std::abs(fsum - 1.0) > 1e-9)
        throw ValidationError("fractions must sum to 1");
    if (restarts < 1)
        throw ValidationError("restarts must be at least 1");

    const Eigen::Index N = static_cast<Eigen::Index>(mesh.num_nodes());
    InitializationResult out;
    if (n == 1) {
        out.fields = {Field::Ones(N)};
        out.restart = 0;
        return out;
    }

    const Polygon boundary = mesh.boundary_polygon();
    const Polygon omega = boundary.is_convex(1e-12) ? boundary : convex_hull(boundary.vertices());
    const double area = omega.area();
    std::vector<double> targets(n);
    for (std::size_t i = 0; i < n; ++i) targets[i] = fractions[i] * area;

    std::vector<std::optional<CapacityResult>> results(restarts);
    std::vector<double> perims(restarts, std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < restarts; ++r) {
        try {
            CapacityOptions co;
            co.seed = seed + static_cast<std::uint64_t>(r);
            const auto pts0 = sample_points(omega, static_cast<int>(n), seed + static_cast<std::uint64_t>(r));
            CapacityResult cr = solve_capacity_constrained(pts0, omega, targets, mode, co);
            perims[r] = total_perimeter(cr.points, omega);
            results[r] = std::move(cr);
        } catch (const Error&) {
        }
    }
    for (int r = 0; r < restarts; ++r) {
        if (!results[r]) {
            ++out.failed_restarts;
            continue;
        }
        if (out.restart < 0 || perims[r] < out.total_perimeter) {
            out.restart = r;
            out.total_perimeter = perims[r];
        }
    }
    if (out.restart < 0)
        throw NotConverged("all Voronoi initialization restarts failed", restarts, 0.0);
    out.points = results[out.restart]->points;

    // Nearest generator is the same as the containing cell.
    Fields us(n, Field::Zero(N));
    for (Eigen::Index k = 0; k < N; ++k) {
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double d = norm2(mesh.nodes[k] - out.points[i]);
            if (d < bd) { bd = d; best = i; }
        }
        us[best][k] = 1.0;
    }
    for (auto& u : us) u = smooth_field(mesh, u, smoothing_passes);
    const double mesh_area = fem.m.sum();
    std::vector<double> mesh_targets(n);
    for (std::size_t i = 0; i < n; ++i) mesh_targets[i] = fractions[i] * mesh_area;
    out.fields = project_multi(us, fem.m, mesh_targets);
    return out;
}

} // namespace partopt
