#pragma once

#include "partopt/gradient_flow.hpp"
#include "partopt/mesh.hpp"
#include "partopt/phase_field.hpp"
#include "partopt/radial_shape.hpp"
#include "partopt/voronoi.hpp"

#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace partopt::io {

namespace fs = std::filesystem;

/// Shortest decimal text that round-trips a double.
std::string fmt(double v);

void write_points_csv(const fs::path& path, std::span<const Point2> pts);
/// Reads "x,y" rows; a non-numeric first row is taken as a header.
std::vector<Point2> read_points_csv(const fs::path& path);

void write_areas_csv(const fs::path& path, std::span<const double> areas, std::span<const double> targets);
void write_density_csv(const fs::path& path, const TriMesh& mesh, const Fields& fields);
void write_energy_history_csv(const fs::path& path, const SolveReport& report,
                              const std::vector<double>& residuals);
void write_trace_csv(const fs::path& path, const FlowTrace& trace);
void write_series_csv(const fs::path& path, const std::string& xname, const std::string& yname,
                      std::span<const double> xs, std::span<const double> ys);

void write_shape_json(const fs::path& path, const RadialShape& shape);
RadialShape read_shape_json(const fs::path& path);

/// "N T B" header, then N lines "x y", T lines "i j k", B lines "i j"
/// (1-based indices).
void write_mesh(const fs::path& path, const TriMesh& mesh);

void write_cells_svg(const fs::path& path, const Polygon& omega, std::span<const ClippedCell> cells,
                     std::span<const Point2> points);
/// Per-triangle fill from nodal averages; one colour per phase.
void write_density_svg(const fs::path& path, const TriMesh& mesh, const Fields& fields);
/// Polyline of (xs, ys) with an optional vertical marker at `marker_x`.
void write_curve_svg(const fs::path& path, std::span<const double> xs, std::span<const double> ys,
                     const std::string& title, double marker_x = std::numeric_limits<double>::quiet_NaN());

} // namespace partopt::io
