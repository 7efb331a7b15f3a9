#include "partopt/cli.hpp"

#include "partopt/capacity.hpp"
#include "partopt/errors.hpp"
#include "partopt/gradient_flow.hpp"
#include "partopt/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>

namespace partopt::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kDiskPolygonSides = 128;

Polygon voronoi_domain(const RunConfig& cfg) {
    if (cfg.polygon == "square") return Polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    if (cfg.polygon == "disk") {
        std::vector<Point2> v;
        for (int k = 0; k < kDiskPolygonSides; ++k) {
            const double t = 2.0 * std::numbers::pi * k / kDiskPolygonSides;
            v.push_back({std::cos(t), std::sin(t)});
        }
        return Polygon(std::move(v));
    }
    return Polygon(io::read_points_csv(cfg.polygon.substr(4)));
}

// Failures caused by the input rather than by a solver.
bool is_input_error(const Error& e) {
    const std::string& k = e.kind();
    return k == "ValidationError" || k == "DimensionMismatch" || k == "DegeneratePolygon" || k == "NonConvexClip" ||
           k == "NonPositiveRadius";
}

double mesh_size(const RunConfig& cfg) { return cfg.h > 0.0 ? cfg.h : 0.5 * cfg.epsilon; }

TriMesh phase_field_mesh(const RunConfig& cfg) {
    const double h = mesh_size(cfg);
    if (!cfg.shape.empty()) return mesh_from_radial(io::read_shape_json(cfg.shape), h);
    if (cfg.polygon == "square") return mesh_rectangle(0.0, 0.0, 1.0, 1.0, h);
    if (cfg.polygon == "disk") return mesh_from_radial(RadialShape::disk(1.0, 0), h);
    throw ValidationError("fence, partition and maximize need --polygon square|disk or a shape file");
}

std::vector<double> partition_fractions(const RunConfig& cfg) {
    if (cfg.equal && !cfg.fractions.empty())
        throw ValidationError("--equal and --fractions are mutually exclusive");
    return cfg.resolved_fractions();
}

FlowConfig flow_config(const RunConfig& cfg, std::vector<double> fractions) {
    FlowConfig fc;
    fc.niter = cfg.niter;
    fc.alpha0 = cfg.alpha;
    fc.nmod = cfg.nmod;
    fc.epsilon = cfg.epsilon;
    fc.h = cfg.h;
    fc.modes = cfg.modes;
    fc.fractions = std::move(fractions);
    fc.seed = cfg.seed;
    fc.restarts = cfg.restarts;
    fc.reinit_every = cfg.reinit_every;
    fc.inner.max_iter = cfg.max_iter;
    fc.inner.tol_g = cfg.tol_g;
    fc.voronoi_mode = parse_capacity_mode(cfg.mode);
    fc.multiplier_term = cfg.multiplier_term;
    fc.validate();
    return fc;
}

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

int finish_inner(const RunConfig& cfg, const MinimizeResult& res, std::ostream& log) {
    if (res.report.converged) return kSuccess;
    log << "inner solve did not converge after " << res.report.iterations
        << " iterations (gradient norm " << res.report.gradient_norm << ")\n";
    if (cfg.allow_partial) {
        log << "partial result kept (--allow-partial)\n";
        return kSuccess;
    }
    return kNumerical;
}

struct PhaseFieldRun {
    TriMesh mesh;
    MinimizeResult result;
};

PhaseFieldRun solve_phase_field(const RunConfig& cfg, const std::vector<double>& fractions) {
    PhaseFieldRun run;
    run.mesh = phase_field_mesh(cfg);
    const FemSystem fem = FemSystem::build(run.mesh);
    run.result = solve_fresh(run.mesh, fem, flow_config(cfg, fractions), cfg.seed).result;
    return run;
}

void write_phase_field(const RunConfig& cfg, const PhaseFieldRun& run) {
    io::write_density_csv(cfg.out / "density.csv", run.mesh, run.result.fields);
    io::write_energy_history_csv(cfg.out / "energy_history.csv", run.result.report, run.result.residual_history);
    if (cfg.svg) io::write_density_svg(cfg.out / "density.svg", run.mesh, run.result.fields);
}

} // namespace

int cmd_voronoi_init(const RunConfig& cfg, std::ostream& log) {
    const Polygon omega = voronoi_domain(cfg);
    std::vector<double> fractions = partition_fractions(cfg);
    if (fractions.empty()) throw ValidationError("voronoi-init needs --n or --fractions");
    const int n = static_cast<int>(fractions.size());
    std::vector<double> targets;
    for (double f : fractions) targets.push_back(f * omega.area());

    CapacityResult best;
    int chosen = -1;
    if (n == 1) {
        best.points = {omega.centroid()};
        best.areas = {omega.area()};
        best.max_residual = 0.0;
        chosen = 0;
    } else {
        const CapacityMode mode = parse_capacity_mode(cfg.mode);
        const int R = cfg.restarts;
        std::vector<std::optional<CapacityResult>> results(R);
        std::vector<double> perimeters(R, 0.0);
        std::vector<std::string> failures(R);
        std::vector<char> input_error(R, 0);
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < R; ++r) {
            const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
            CapacityOptions opt;
            opt.seed = seed;
            try {
                results[r] = solve_capacity_constrained(sample_points(omega, n, seed), omega, targets, mode, opt);
                perimeters[r] = total_perimeter(results[r]->points, omega);
            } catch (const Error& e) {
                failures[r] = e.what();
                input_error[r] = is_input_error(e);
            }
        }
        std::string last_failure;
        for (int r = 0; r < R; ++r) {
            if (input_error[r]) throw ValidationError(failures[r]);
            if (!results[r]) {
                log << "restart " << r << " failed: " << failures[r] << '\n';
                last_failure = failures[r];
            } else if (chosen < 0 || perimeters[r] < perimeters[chosen]) {
                chosen = r;
            }
        }
        if (chosen < 0) throw NotConverged("every restart failed, last: " + last_failure, R, 0.0);
        best = std::move(*results[chosen]);
    }

    const auto cells = clip_cells(best.points, omega);
    fs::create_directories(cfg.out);
    io::write_points_csv(cfg.out / "points.csv", best.points);
    io::write_areas_csv(cfg.out / "areas.csv", best.areas, targets);
    if (cfg.svg) io::write_cells_svg(cfg.out / "cells.svg", omega, cells, best.points);
    log << "cells " << n << "\nrestart " << chosen << "\nmax area deviation " << best.max_residual
        << "\ntotal perimeter " << fixed(total_perimeter(best.points, omega)) << '\n';
    return kSuccess;
}

int cmd_fence(const RunConfig& cfg, std::ostream& log) {
    const PhaseFieldRun run = solve_phase_field(cfg, {cfg.c});
    fs::create_directories(cfg.out);
    write_phase_field(cfg, run);
    const double e = run.result.energy;
    log << "energy " << fixed(e) << "\nenergy/gamma " << fixed(e / MMParams::gamma) << '\n';
    return finish_inner(cfg, run.result, log);
}

int cmd_partition(const RunConfig& cfg, std::ostream& log) {
    const std::vector<double> fractions = partition_fractions(cfg);
    if (fractions.size() < 2) throw ValidationError("partition needs at least two phases");
    const PhaseFieldRun run = solve_phase_field(cfg, fractions);
    fs::create_directories(cfg.out);
    write_phase_field(cfg, run);
    const double e = run.result.energy;
    // Every interface bounds two phases, so the summed energy counts it twice.
    log << "energy " << fixed(e) << "\nenergy/gamma " << fixed(e / MMParams::gamma) << "\nperimeter estimate "
        << fixed(e / (2.0 * MMParams::gamma)) << '\n';
    return finish_inner(cfg, run.result, log);
}

int cmd_maximize(const RunConfig& cfg, std::ostream& log) {
    std::vector<double> fractions = partition_fractions(cfg);
    if (fractions.size() <= 1) fractions = {cfg.c};
    const FlowConfig fc = flow_config(cfg, fractions);

    RadialShape shape0 = RadialShape::disk(1.0, std::max(cfg.modes, 2));
    if (!cfg.shape.empty()) shape0 = io::read_shape_json(cfg.shape);
    else shape0.a[1] = cfg.perturb;

    fs::create_directories(cfg.out);
    const FlowResult res = gradient_flow(fc, shape0, [&](const FlowRecord& r, const TriMesh& mesh, const Fields& u) {
        if (!cfg.quiet)
            log << "iter " << r.iteration << " cost " << fixed(r.cost) << " alpha " << r.alpha << " inner "
                << r.inner_iterations << (r.converged ? "" : " (not converged)") << " iso "
                << fixed(r.isoperimetric, 5) << '\n';
        if (cfg.svg && r.iteration % cfg.nmod == 0) {
            char name[32];
            std::snprintf(name, sizeof name, "snapshot_%04d.svg", r.iteration);
            io::write_density_svg(cfg.out / name, mesh, u);
        }
    });

    io::write_trace_csv(cfg.out / "trace.csv", res.trace);
    io::write_shape_json(cfg.out / "shape.json", res.shape);
    if (!res.trace.records.empty()) {
        const FlowRecord& last = res.trace.records.back();
        log << "final cost " << fixed(last.cost) << "\nfinal cost/gamma " << fixed(last.cost / MMParams::gamma)
            << "\nfinal isoperimetric ratio " << fixed(isoperimetric_ratio(res.shape), 5) << '\n';
    }
    if (res.trace.aborted) {
        log << "flow aborted: " << res.trace.abort_reason << '\n';
        return kNumerical;
    }
    return kSuccess;
}

int cmd_perimtrack(const RunConfig& cfg, std::ostream& log) {
    const Polygon square({{-3, -3}, {3, -3}, {3, 3}, {-3, 3}});
    const int count = static_cast<int>(std::floor((cfg.t_max - cfg.t_min) / cfg.t_step + 1e-9)) + 1;
    std::vector<double> ts, per;
    for (int i = 0; i < count; ++i) {
        const double t = cfg.t_min + i * cfg.t_step;
        const std::vector<Point2> pts{{-t, 0.0}, {0.0, -2.0}, {t, 0.0}, {0.0, 2.0}};
        ts.push_back(t);
        per.push_back(total_perimeter(pts, square));
    }
    // The kink is where the second difference peaks.
    double kink = std::numeric_limits<double>::quiet_NaN();
    double peak = -1.0;
    for (int i = 1; i + 1 < count; ++i) {
        const double d2 = std::abs(per[i + 1] - 2.0 * per[i] + per[i - 1]);
        if (d2 > peak) {
            peak = d2;
            kink = ts[i];
        }
    }
    fs::create_directories(cfg.out);
    io::write_series_csv(cfg.out / "perimeter.csv", "t", "perimeter", ts, per);
    if (cfg.svg) io::write_curve_svg(cfg.out / "perimeter.svg", ts, per, "total perimeter", kink);
    log << "samples " << count << '\n';
    if (std::isfinite(kink)) log << "kink at t = " << fixed(kink, 4) << '\n';
    return kSuccess;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal partitions and fences: Voronoi initialization, phase-field relaxation, shape maximization"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help and exit");

    struct Flags {
        std::string config, out, polygon, mode, shape;
        std::uint64_t seed = 0;
        double epsilon = 0, h = 0, alpha = 0, c = 0, perturb = 0, t_min = 0, t_max = 0, t_step = 0;
        int niter = 0, nmod = 0, n = 0, restarts = 0, modes = 0, max_iter = 0, reinit_every = 0;
        double tol_g = 0;
        std::vector<double> fractions;
        bool allow_partial = false, equal = false, multiplier = false, no_svg = false, quiet = false;
    } f;

    RunConfig cfg;
    std::vector<std::pair<CLI::Option*, std::function<void()>>> overrides;
    auto opt = [&](CLI::App* sub, const std::string& name, auto& target, auto apply, const std::string& help) {
        CLI::Option* o = sub->add_option(name, target, help);
        overrides.emplace_back(o, apply);
        return o;
    };
    auto flag = [&](CLI::App* sub, const std::string& name, bool& target, auto apply, const std::string& help) {
        CLI::Option* o = sub->add_flag(name, target, help);
        overrides.emplace_back(o, apply);
        return o;
    };

    const std::vector<std::pair<std::string, std::string>> commands{
        {"voronoi-init", "capacity-constrained Voronoi cells of a polygon"},
        {"fence", "single-phase relaxed fence on the square or the disk"},
        {"partition", "multi-phase relaxed partition"},
        {"maximize", "gradient-flow maximization of the fence or partition cost over shapes"},
        {"perimtrack", "total Voronoi perimeter along the four-site sweep"}};
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->set_help_flag("--help", "print help and exit");
        opt(sub, "--config", f.config, [] {}, "JSON config file (flags override it)");
        opt(sub, "--out", f.out, [&] { cfg.out = f.out; }, "output directory");
        opt(sub, "--seed", f.seed, [&] { cfg.seed = f.seed; }, "random seed");
        opt(sub, "--epsilon", f.epsilon, [&] { cfg.epsilon = f.epsilon; }, "interface width");
        opt(sub, "--h", f.h, [&] { cfg.h = f.h; }, "mesh size (default epsilon/2)");
        opt(sub, "--niter", f.niter, [&] { cfg.niter = f.niter; }, "flow iterations");
        opt(sub, "--alpha", f.alpha, [&] { cfg.alpha = f.alpha; }, "initial flow step");
        opt(sub, "--nmod", f.nmod, [&] { cfg.nmod = f.nmod; }, "step halving period");
        opt(sub, "--n", f.n, [&] { cfg.n = f.n; }, "number of cells or phases");
        opt(sub, "--fractions", f.fractions, [&] { cfg.fractions = f.fractions; }, "comma-separated fractions")
            ->delimiter(',');
        opt(sub, "--c", f.c, [&] { cfg.c = f.c; }, "single-phase fraction");
        opt(sub, "--polygon", f.polygon, [&] { cfg.polygon = f.polygon; }, "square, disk or csv:PATH");
        opt(sub, "--shape", f.shape, [&] { cfg.shape = f.shape; }, "radial shape JSON file");
        opt(sub, "--restarts", f.restarts, [&] { cfg.restarts = f.restarts; }, "random restarts");
        opt(sub, "--mode", f.mode, [&] { cfg.mode = f.mode; }, "areas-only, min-perimeter or lloyd-constrained");
        opt(sub, "--modes", f.modes, [&] { cfg.modes = f.modes; }, "Fourier modes");
        opt(sub, "--perturb", f.perturb, [&] { cfg.perturb = f.perturb; }, "a_2 of the default start shape");
        opt(sub, "--t-min", f.t_min, [&] { cfg.t_min = f.t_min; }, "sweep start");
        opt(sub, "--t-max", f.t_max, [&] { cfg.t_max = f.t_max; }, "sweep end");
        opt(sub, "--t-step", f.t_step, [&] { cfg.t_step = f.t_step; }, "sweep step");
        opt(sub, "--reinit-every", f.reinit_every, [&] { cfg.reinit_every = f.reinit_every; },
            "fresh initialization period of the flow (0 disables)");
        opt(sub, "--tol-g", f.tol_g, [&] { cfg.tol_g = f.tol_g; }, "inner gradient tolerance");
        opt(sub, "--max-iter", f.max_iter, [&] { cfg.max_iter = f.max_iter; }, "inner iteration limit");
        flag(sub, "--allow-partial", f.allow_partial, [&] { cfg.allow_partial = true; },
             "keep results of an unconverged inner solve");
        flag(sub, "--equal", f.equal, [&] { cfg.equal = true; }, "equal fractions");
        flag(sub, "--multiplier-term", f.multiplier, [&] { cfg.multiplier_term = true; },
             "include the volume multiplier in the shape gradient");
        flag(sub, "--no-svg", f.no_svg, [&] { cfg.svg = false; }, "skip SVG output");
        flag(sub, "--quiet", f.quiet, [&] { cfg.quiet = true; }, "no per-iteration log");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back(); // program name
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kValidation;
    }

    try {
        if (!f.config.empty()) cfg = load_config(f.config, cfg);
        for (auto& [o, apply] : overrides)
            if (o->count() > 0) apply();
        CLI::App* sub = app.get_subcommands().front();
        cfg.command = sub->get_name();
        cfg.validate();
        if (cfg.command == "voronoi-init") return cmd_voronoi_init(cfg, out);
        if (cfg.command == "fence") return cmd_fence(cfg, out);
        if (cfg.command == "partition") return cmd_partition(cfg, out);
        if (cfg.command == "maximize") return cmd_maximize(cfg, out);
        return cmd_perimtrack(cfg, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return is_input_error(e) ? kValidation : kNumerical;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    return run(std::vector<std::string>(argv, argv + argc), out, err);
}

} // namespace partopt::cli
