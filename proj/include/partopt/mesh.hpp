#pragma once

#include "partopt/geom2d.hpp"
#include "partopt/radial_shape.hpp"

#include <array>
#include <vector>

namespace partopt {

/// Ring structure of a polar reference mesh: ring j (1..rings) carries
/// ring_counts[j-1] equally spaced nodes. Meshes sharing a layout share
/// connectivity, so nodal fields carry over by index.
struct RingLayout {
    int rings = 0;
    std::vector<int> ring_counts;

    std::size_t node_count() const;
    friend bool operator==(const RingLayout&, const RingLayout&) = default;
};

struct TriMesh {
    std::vector<Point2> nodes;
    std::vector<std::array<int, 3>> triangles;       ///< counter-clockwise
    std::vector<std::array<int, 2>> boundary_edges;  ///< closed CCW loop
    std::vector<int> boundary_nodes;                 ///< loop order
    std::vector<double> boundary_angle;              ///< parameter t per boundary node
    std::vector<Point2> reference_nodes;             ///< positions in the reference domain
    RingLayout layout;                               ///< empty for non-polar meshes

    std::size_t num_nodes() const { return nodes.size(); }
    double triangle_area(int t) const;
    double area() const;
    /// Boundary loop as a polygon.
    Polygon boundary_polygon() const;
};

struct MeshQuality {
    double max_edge = 0.0;
    double min_angle_deg = 0.0;
};

MeshQuality mesh_quality(const TriMesh& m);

inline constexpr std::size_t kDefaultNodeCap = 200000;

/// Mapped polar mesh of {r <= rho(t)} with every edge <= h.
/// Throws NonPositiveRadius or MeshTooFine.
TriMesh mesh_from_radial(const RadialShape& shape, double h, std::size_t node_cap = kDefaultNodeCap);
/// Layout the mesher would pick for (shape, h).
RingLayout choose_layout(const RadialShape& shape, double h, std::size_t node_cap = kDefaultNodeCap);
/// Polar mesh with a prescribed layout.
TriMesh mesh_from_layout(const RadialShape& shape, const RingLayout& layout);

/// Structured mesh of [x0,x1] x [y0,y1] with alternating diagonals, mirror
/// symmetric about both mid-lines; every edge <= h.
TriMesh mesh_rectangle(double x0, double y0, double x1, double y1, double h);

/// Interpolates a nodal field of `from` onto `to` through the reference
/// coordinates of both meshes (P1 interpolation; nearest node outside).
/// With a nonzero `angle` the field is also rotated by that angle about the
/// reference origin.
std::vector<double> transfer_field(const TriMesh& from, const std::vector<double>& field, const TriMesh& to,
                                   double angle = 0.0);

/// Throws ValidationError when the mesh violates its structural invariants.
void validate_mesh(const TriMesh& m);

} // namespace partopt
