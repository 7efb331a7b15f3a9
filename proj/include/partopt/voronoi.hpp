#pragma once

#include "partopt/geom2d.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace partopt {

/// A Voronoi ridge separates sites[0] and sites[1]. Finite ridges join two
/// vertices; a ray starts at vertices[0] and runs along `direction`; a full
/// line (two sites, or collinear input) has no vertex and passes through
/// `origin`.
struct VoronoiRidge {
    std::array<int, 2> sites{-1, -1};
    std::array<int, 2> vertices{-1, -1};
    Point2 origin;
    Point2 direction;

    bool is_segment() const { return vertices[0] >= 0 && vertices[1] >= 0; }
    bool is_ray() const { return vertices[0] >= 0 && vertices[1] < 0; }
    bool is_line() const { return vertices[0] < 0; }
};

struct VoronoiDiagram {
    std::vector<Point2> points;
    std::vector<Point2> vertices;
    std::vector<VoronoiRidge> ridges;
    std::vector<std::array<int, 3>> delaunay;
    /// Set when four or more sites are co-circular and produce a vertex of
    /// degree >= 4 (within 1e-9 * scale).
    bool cocircular_degeneracy = false;
    double scale = 0.0;

    int vertex_degree(int v) const;
    /// Ridge as a drawable segment; rays and lines are truncated at
    /// `radius` (default 10x the site bounding-box diagonal) around the sites.
    std::pair<Point2, Point2> ridge_segment(const VoronoiRidge& r, double radius = -1.0) const;
};

/// Throws DuplicatePoints when two sites are closer than 1e-9 * scale, and
/// ValidationError for fewer than two sites.
VoronoiDiagram build_voronoi(std::span<const Point2> points);

enum class CellVertexKind { Voronoi, Boundary, Corner };

/// Provenance of a vertex of a clipped cell of site i.
///  Voronoi:  circumcenter of sites (i, a, b)
///  Boundary: bisector of (i, a) meets domain edge `omega_edge`
///  Corner:   domain vertex `omega_vertex`
struct CellVertex {
    CellVertexKind kind = CellVertexKind::Corner;
    int a = -1;
    int b = -1;
    int omega_edge = -1;
    int omega_vertex = -1;
};

struct RidgeSegment {
    Point2 a, b;
    int neighbor = -1;
};

struct BoundarySegment {
    Point2 a, b;
    int omega_edge = -1;
};

struct ClippedCell {
    int site = -1;
    bool empty = true;
    std::vector<Point2> vertices;       ///< counter-clockwise
    std::vector<int> edge_tags;         ///< >= 0: neighbor site, < 0: -(omega edge + 1)
    std::vector<CellVertex> vertex_info;
    double area = 0.0;
    double perimeter = 0.0;
    std::vector<RidgeSegment> interior_ridge_segments;
    std::vector<BoundarySegment> boundary_segments;

    Polygon polygon() const { return Polygon(vertices); }
    Point2 centroid() const { return polygon_centroid(vertices); }
};

/// (2n x n): row 2i is d/dx_i, row 2i+1 is d/dy_i, column j the quantity of cell j.
using GradientMatrix = Eigen::MatrixXd;

/// Cells of the diagram restricted to the convex polygon `omega`. Empty cells
/// keep their index with `empty == true`. Throws NonConvexClip.
std::vector<ClippedCell> clip_cells(const VoronoiDiagram& d, const Polygon& omega);
/// Same cells computed straight from the sites (no diagram build).
std::vector<ClippedCell> clip_cells(std::span<const Point2> points, const Polygon& omega);

GradientMatrix area_gradients(std::span<const Point2> points, const Polygon& omega);
/// Throws NonSmoothConfiguration when a vertex of degree >= 4, a vertex on
/// the domain boundary or a ridge through a domain corner is involved.
GradientMatrix perimeter_gradients(std::span<const Point2> points, const Polygon& omega);

std::vector<double> cell_areas(std::span<const ClippedCell> cells);
std::vector<double> cell_perimeters(std::span<const ClippedCell> cells);
double total_perimeter(std::span<const Point2> points, const Polygon& omega);

struct ValueAndGradient {
    double value = 0.0;
    Eigen::VectorXd gradient; ///< length 2n, interleaved (x_0, y_0, x_1, ...)
};

/// Sum_i (Area(V_i) - targets_i)^2 and its gradient.
ValueAndGradient capacity_objective(std::span<const Point2> points, const Polygon& omega,
                                    std::span<const double> targets);

/// Sum_i ∫_{V_i} |x - p_i|^2 and its gradient 2 |V_i| (p_i - centroid_i).
ValueAndGradient lloyd_energy(std::span<const Point2> points, const Polygon& omega);

/// Moves every site to the centroid of its clipped cell (empty cells keep
/// their site).
std::vector<Point2> lloyd_step(std::span<const Point2> points, const Polygon& omega);

std::vector<Point2> unpack_points(const Eigen::VectorXd& x);
Eigen::VectorXd pack_points(std::span<const Point2> pts);

} // namespace partopt
