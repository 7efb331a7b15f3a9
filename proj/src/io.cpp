#include "partopt/io.hpp"

#include "partopt/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace partopt::io {

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw ValidationError("cannot write " + path.string());
    return f;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream f(path);
    if (!f)
        throw ValidationError("cannot read " + path.string());
    return f;
}

constexpr std::array<const char*, 10> kPalette = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                                  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::array<double, 3> rgb(const char* hex) {
    std::array<double, 3> c{};
    for (int k = 0; k < 3; ++k)
        c[k] = std::stoi(std::string(hex + 1 + 2 * k, 2), nullptr, 16);
    return c;
}

struct Frame {
    double x0, y0, s; // svg = ((x - x0) * s, (y0 - y) * s)
    std::string pt(Point2 p) const { return fmt((p.x - x0) * s) + "," + fmt((y0 - p.y) * s); }
};

Frame frame_for(std::span<const Point2> pts, double size, double margin) {
    Point2 lo = pts.front(), hi = lo;
    for (const auto& p : pts) {
        lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y);
    }
    const double ext = std::max(hi.x - lo.x, hi.y - lo.y);
    const double s = (size - 2 * margin) / ext;
    return {lo.x - margin / s, hi.y + margin / s, s};
}

} // namespace

std::string fmt(double v) {
    if (v == 0.0) return "0"; // folds -0
    std::array<char, 32> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), r.ptr);
}

void write_points_csv(const fs::path& path, std::span<const Point2> pts) {
    auto f = open_out(path);
    f << "x,y\n";
    for (const auto& p : pts) f << fmt(p.x) << ',' << fmt(p.y) << '\n';
}

std::vector<Point2> read_points_csv(const fs::path& path) {
    auto f = open_in(path);
    std::vector<Point2> pts;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x, y;
        if (!(ss >> x >> y)) {
            if (first) { first = false; continue; }
            throw ValidationError("malformed point row in " + path.string() + ": " + line);
        }
        first = false;
        pts.emplace_back(x, y);
    }
    return pts;
}

void write_areas_csv(const fs::path& path, std::span<const double> areas, std::span<const double> targets) {
    auto f = open_out(path);
    f << "cell,area,target,deviation\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < areas.size(); ++i) {
        const double d = areas[i] - targets[i];
        worst = std::max(worst, std::abs(d));
        f << i << ',' << fmt(areas[i]) << ',' << fmt(targets[i]) << ',' << fmt(d) << '\n';
    }
    f << "max,,," << fmt(worst) << '\n';
}

void write_density_csv(const fs::path& path, const TriMesh& mesh, const Fields& fields) {
    auto f = open_out(path);
    f << "node,x,y";
    for (std::size_t i = 0; i < fields.size(); ++i) f << ",u" << i + 1;
    f << '\n';
    for (std::size_t k = 0; k < mesh.num_nodes(); ++k) {
        f << k << ',' << fmt(mesh.nodes[k].x) << ',' << fmt(mesh.nodes[k].y);
        for (const auto& u : fields) f << ',' << fmt(u[static_cast<Eigen::Index>(k)]);
        f << '\n';
    }
}

void write_energy_history_csv(const fs::path& path, const SolveReport& report, const std::vector<double>& residuals) {
    auto f = open_out(path);
    f << "iteration,energy,residual\n";
    for (std::size_t i = 0; i < report.history.size(); ++i) {
        f << i << ',' << fmt(report.history[i]) << ',';
        if (i < residuals.size()) f << fmt(residuals[i]);
        f << '\n';
    }
}

void write_trace_csv(const fs::path& path, const FlowTrace& trace) {
    auto f = open_out(path);
    f << "iteration,cost,energy,energy_over_gamma,alpha,inner_iters,converged,reinitialized,nodes,isoperimetric\n";
    for (const auto& r : trace.records) {
        f << r.iteration << ',' << fmt(r.cost) << ',' << fmt(r.cost) << ',' << fmt(r.cost / MMParams::gamma) << ','
          << fmt(r.alpha) << ',' << r.inner_iterations << ',' << (r.converged ? 1 : 0) << ','
          << (r.reinitialized ? 1 : 0) << ',' << r.nodes << ',' << fmt(r.isoperimetric) << '\n';
    }
}

void write_series_csv(const fs::path& path, const std::string& xname, const std::string& yname,
                      std::span<const double> xs, std::span<const double> ys) {
    auto f = open_out(path);
    f << xname << ',' << yname << '\n';
    for (std::size_t i = 0; i < xs.size(); ++i) f << fmt(xs[i]) << ',' << fmt(ys[i]) << '\n';
}

void write_shape_json(const fs::path& path, const RadialShape& shape) {
    nlohmann::ordered_json j;
    j["a0"] = shape.a0;
    j["a"] = shape.a;
    j["b"] = shape.b;
    auto f = open_out(path);
    f << j.dump(2) << '\n';
}

RadialShape read_shape_json(const fs::path& path) {
    auto f = open_in(path);
    nlohmann::json j;
    try {
        f >> j;
        for (const auto& [k, v] : j.items()) {
            (void)v;
            if (k != "a0" && k != "a" && k != "b")
                throw ValidationError("unknown key '" + k + "' in shape file");
        }
        RadialShape s(j.at("a0").get<double>(), j.value("a", std::vector<double>{}),
                      j.value("b", std::vector<double>{}));
        validate_shape(s);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("invalid shape file: ") + e.what());
    }
}

void write_mesh(const fs::path& path, const TriMesh& mesh) {
    auto f = open_out(path);
    f << mesh.num_nodes() << ' ' << mesh.triangles.size() << ' ' << mesh.boundary_edges.size() << '\n';
    for (const auto& p : mesh.nodes) f << fmt(p.x) << ' ' << fmt(p.y) << '\n';
    for (const auto& t : mesh.triangles) f << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    for (const auto& e : mesh.boundary_edges) f << e[0] + 1 << ' ' << e[1] + 1 << '\n';
}

void write_cells_svg(const fs::path& path, const Polygon& omega, std::span<const ClippedCell> cells,
                     std::span<const Point2> points) {
    const double size = 600;
    const Frame fr = frame_for(omega.vertices(), size, 20);
    auto f = open_out(path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
    f << "<polygon fill=\"#f7f7f7\" stroke=\"black\" stroke-width=\"2\" points=\"";
    for (const auto& v : omega.vertices()) f << fr.pt(v) << ' ';
    f << "\"/>\n";
    for (const auto& c : cells) {
        if (c.empty) continue;
        f << "<polygon fill=\"" << kPalette[c.site % kPalette.size()]
          << "\" fill-opacity=\"0.35\" stroke=\"#333\" stroke-width=\"1\" points=\"";
        for (const auto& v : c.vertices) f << fr.pt(v) << ' ';
        f << "\"/>\n";
    }
    for (const auto& p : points) {
        const std::string xy = fr.pt(p);
        const auto comma = xy.find(',');
        f << "<circle cx=\"" << xy.substr(0, comma) << "\" cy=\"" << xy.substr(comma + 1) << "\" r=\"2\"/>\n";
    }
    f << "</svg>\n";
}

void write_density_svg(const fs::path& path, const TriMesh& mesh, const Fields& fields) {
    const double size = 600;
    const Frame fr = frame_for(mesh.nodes, size, 20);
    auto f = open_out(path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
    for (const auto& T : mesh.triangles) {
        std::array<double, 3> c{255, 255, 255};
        if (fields.size() == 1) {
            const double u = (fields[0][T[0]] + fields[0][T[1]] + fields[0][T[2]]) / 3.0;
            const auto col = rgb(kPalette[0]);
            for (int k = 0; k < 3; ++k) c[k] = 255 + std::clamp(u, 0.0, 1.0) * (col[k] - 255);
        } else {
            c = {0, 0, 0};
            for (std::size_t i = 0; i < fields.size(); ++i) {
                const double u = std::clamp((fields[i][T[0]] + fields[i][T[1]] + fields[i][T[2]]) / 3.0, 0.0, 1.0);
                const auto col = rgb(kPalette[i % kPalette.size()]);
                for (int k = 0; k < 3; ++k) c[k] += u * col[k];
            }
        }
        char hex[8];
        std::snprintf(hex, sizeof hex, "#%02x%02x%02x", static_cast<int>(std::clamp(c[0], 0.0, 255.0)),
                      static_cast<int>(std::clamp(c[1], 0.0, 255.0)), static_cast<int>(std::clamp(c[2], 0.0, 255.0)));
        f << "<polygon fill=\"" << hex << "\" stroke=\"" << hex << "\" stroke-width=\"0.3\" points=\""
          << fr.pt(mesh.nodes[T[0]]) << ' ' << fr.pt(mesh.nodes[T[1]]) << ' ' << fr.pt(mesh.nodes[T[2]]) << "\"/>\n";
    }
    f << "<polygon fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (int b : mesh.boundary_nodes) f << fr.pt(mesh.nodes[b]) << ' ';
    f << "\"/>\n</svg>\n";
}

void write_curve_svg(const fs::path& path, std::span<const double> xs, std::span<const double> ys,
                     const std::string& title, double marker_x) {
    const double W = 640, H = 400, m = 40;
    auto f = open_out(path);
    const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
    const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
    const double dx = std::max(*xmax - *xmin, 1e-300), dy = std::max(*ymax - *ymin, 1e-300);
    auto X = [&](double x) { return m + (x - *xmin) / dx * (W - 2 * m); };
    auto Y = [&](double y) { return H - m - (y - *ymin) / dy * (H - 2 * m); };
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    f << "<text x=\"" << m << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    f << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\"" << H - 2 * m
      << "\" fill=\"none\" stroke=\"#999\"/>\n";
    f << "<polyline fill=\"none\" stroke=\"#4e79a7\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) f << fmt(X(xs[i])) << ',' << fmt(Y(ys[i])) << ' ';
    f << "\"/>\n";
    if (std::isfinite(marker_x))
        f << "<line x1=\"" << fmt(X(marker_x)) << "\" x2=\"" << fmt(X(marker_x)) << "\" y1=\"" << m << "\" y2=\""
          << H - m << "\" stroke=\"#e15759\" stroke-dasharray=\"4 3\"/>\n";
    f << "<text x=\"" << m << "\" y=\"" << H - 12 << "\" font-family=\"sans-serif\" font-size=\"11\">x: "
      << fmt(*xmin) << " .. " << fmt(*xmax) << "   y: " << fmt(*ymin) << " .. " << fmt(*ymax) << "</text>\n";
    f << "</svg>\n";
}

} // namespace partopt::io
