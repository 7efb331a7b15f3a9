#include "partopt/gradient_flow.hpp"

#include "partopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace partopt {

void FlowConfig::validate() const {
    if (niter < 1) throw ValidationError("niter must be at least 1");
    if (nmod < 1) throw ValidationError("nmod must be at least 1");
    if (!(alpha0 > 0.0)) throw ValidationError("alpha must be positive");
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    if (modes < 0) throw ValidationError("number of Fourier modes must be non-negative");
    if (restarts < 1) throw ValidationError("restarts must be at least 1");
    if (reinit_every < 0) throw ValidationError("reinit_every must be non-negative");
    if (rotations < 0) throw ValidationError("rotations must be non-negative");
    if (!(target_area > 0.0)) throw ValidationError("target area must be positive");
    if (fractions.empty()) throw ValidationError("at least one fraction is required");
    for (double f : fractions)
        if (!(f > 0.0 && f < 1.0))
            throw ValidationError("fractions must lie in (0,1)");
    if (fractions.size() > 1) {
        double s = 0.0;
        for (double f : fractions) s += f;
        if (std::abs(s - 1.0) > 1e-9) throw ValidationError("fractions must sum to 1");
    }
}

namespace {

std::vector<double> area_targets(const FlowConfig& cfg, double area) {
    if (cfg.single_phase())
        return {cfg.fractions[0] * area, (1.0 - cfg.fractions[0]) * area};
    std::vector<double> t;
    for (double f : cfg.fractions) t.push_back(f * area);
    return t;
}

MinimizeResult run_inner(const Fields& start, const FemSystem& fem, const FlowConfig& cfg) {
    const MMParams p{cfg.epsilon};
    const auto targets = area_targets(cfg, fem.m.sum());
    if (cfg.single_phase())
        return minimize_single(start[0], fem, p, targets[0], cfg.inner);
    return minimize_multi(start, fem, p, targets, cfg.inner);
}

bool better(const MinimizeResult& a, const MinimizeResult& b) { return a.energy < b.energy; }

} // namespace

InnerSolve solve_fresh(const TriMesh& mesh, const FemSystem& fem, const FlowConfig& cfg, std::uint64_t seed) {
    const auto targets = area_targets(cfg, fem.m.sum());
    const std::size_t n = cfg.fractions.size();
    InnerSolve best;
    best.fresh = true;
    bool have = false;
    if (n >= 5) {
        const InitializationResult init =
            generate_initialization(mesh, fem, cfg.fractions, cfg.restarts, seed, cfg.voronoi_mode);
        best.result = run_inner(init.fields, fem, cfg);
        return best;
    }
    for (int r = 0; r < cfg.restarts; ++r) {
        Fields start = random_feasible_fields(mesh, fem, targets, seed + static_cast<std::uint64_t>(r));
        if (cfg.single_phase()) start.resize(1);
        MinimizeResult res = run_inner(start, fem, cfg);
        if (!have || better(res, best.result)) {
            best.result = std::move(res);
            have = true;
        }
    }
    return best;
}

InnerSolve solve_warm(const TriMesh& mesh, const FemSystem& fem, const FlowConfig& cfg, const TriMesh& prev_mesh,
                      const Fields& prev_fields, double angle) {
    const auto targets = area_targets(cfg, fem.m.sum());
    Fields start;
    for (const auto& u : prev_fields) {
        const std::vector<double> src(u.data(), u.data() + u.size());
        const std::vector<double> moved = transfer_field(prev_mesh, src, mesh, angle);
        start.push_back(Eigen::Map<const Eigen::VectorXd>(moved.data(), static_cast<Eigen::Index>(moved.size()))
                            .cwiseMax(0.0)
                            .cwiseMin(1.0));
    }
    if (cfg.single_phase()) {
        const Field u = start[0];
        start = {project_multi({u, Field::Ones(u.size()) - u}, fem.m, targets)[0]};
    } else {
        start = project_multi(start, fem.m, targets);
    }
    InnerSolve out;
    out.result = run_inner(start, fem, cfg);
    return out;
}

FlowResult gradient_flow(const FlowConfig& cfg, const RadialShape& shape0, const FlowProgress& progress) {
    cfg.validate();
    const MMParams params{cfg.epsilon};

    RadialShape padded = RadialShape::disk(shape0.a0, cfg.modes);
    for (int k = 0; k < std::min(cfg.modes, shape0.modes()); ++k) {
        padded.a[k] = shape0.a[k];
        padded.b[k] = shape0.b[k];
    }
    FlowResult out;
    out.shape = volume_project(padded, cfg.target_area);

    double alpha = cfg.alpha0;
    TriMesh prev_mesh;
    Fields prev_fields;
    for (int it = 1; it <= cfg.niter; ++it) {
        FlowRecord rec;
        rec.iteration = it;
        rec.coefficients = out.shape.coefficients();
        rec.alpha = alpha;
        rec.isoperimetric = isoperimetric_ratio(out.shape);

        TriMesh mesh;
        try {
            mesh = mesh_from_radial(out.shape, cfg.mesh_size(), cfg.node_cap);
        } catch (const MeshTooFine& e) {
            out.trace.aborted = true;
            out.trace.abort_reason = e.what();
            break;
        }
        const FemSystem fem = FemSystem::build(mesh);
        rec.nodes = mesh.num_nodes();
        rec.quality = mesh_quality(mesh);

        InnerSolve chosen;
        bool have = false;
        if (!prev_fields.empty()) {
            const int nc = cfg.single_phase() ? std::max(cfg.rotations, 1) : 1;
            std::vector<std::optional<InnerSolve>> cand(static_cast<std::size_t>(nc));
#pragma omp parallel for schedule(dynamic, 1)
            for (int k = 0; k < nc; ++k) {
                try {
                    cand[k] = solve_warm(mesh, fem, cfg, prev_mesh, prev_fields, 2.0 * std::numbers::pi * k / nc);
                } catch (const Error&) {
                    // a failed candidate is dropped; a fresh solve follows if all fail
                }
            }
            for (int k = 0; k < nc; ++k) {
                if (!cand[k]) continue;
                if (!have || better(cand[k]->result, chosen.result)) {
                    chosen = std::move(*cand[k]);
                    have = true;
                }
            }
        }
        const bool reinit = !have || (cfg.reinit_every > 0 && (it - 1) % cfg.reinit_every == 0);
        if (reinit) {
            const std::uint64_t seed = cfg.seed + 1000003ULL * static_cast<std::uint64_t>(it);
            if (!have) {
                chosen = solve_fresh(mesh, fem, cfg, seed);
            } else {
                try {
                    InnerSolve fresh = solve_fresh(mesh, fem, cfg, seed);
                    if (better(fresh.result, chosen.result))
                        chosen = std::move(fresh);
                } catch (const NotConverged&) {
                    // keep the warm result
                }
            }
        }
        const MinimizeResult& res = chosen.result;
        rec.cost = res.energy;
        rec.inner_iterations = res.report.iterations;
        rec.converged = res.report.converged;
        rec.reinitialized = chosen.fresh;

        const ShapeGradientDensity G = shape_gradient_density(res.fields, mesh, fem, params, cfg.inner.tol_g, cfg.multiplier_term);
        const Eigen::VectorXd grad = fourier_gradient(out.shape, mesh, G.values);
        rec.gradient_norm = grad.norm();
        out.trace.records.push_back(rec);
        if (progress) progress(rec, mesh, res.fields);

        out.mesh = mesh;
        out.fields = res.fields;
        prev_mesh = std::move(mesh);
        prev_fields = res.fields;

        try {
            out.shape = volume_project(RadialShape::from_coefficients(out.shape.coefficients() + alpha * grad),
                                       cfg.target_area);
        } catch (const NonPositiveRadius& e) {
            out.trace.aborted = true;
            out.trace.abort_reason = e.what();
            break;
        }
        if (it % cfg.nmod == 0)
            alpha *= 0.5;
    }
    return out;
}

double relative_spread(const FlowTrace& t, int window) {
    const int n = static_cast<int>(t.records.size());
    const int w = std::min(window, n);
    if (w <= 0) return 0.0;
    double mean = 0.0;
    for (int i = n - w; i < n; ++i) mean += t.records[i].cost;
    mean /= w;
    double var = 0.0;
    for (int i = n - w; i < n; ++i) var += (t.records[i].cost - mean) * (t.records[i].cost - mean);
    return std::sqrt(var / w) / std::abs(mean);
}

std::vector<double> window_means(const FlowTrace& t, int window) {
    std::vector<double> means;
    const int n = static_cast<int>(t.records.size());
    for (int s = 0; s + window <= n; s += window) {
        double m = 0.0;
        for (int i = s; i < s + window; ++i) m += t.records[i].cost;
        means.push_back(m / window);
    }
    return means;
}

} // namespace partopt
