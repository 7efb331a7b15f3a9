#pragma once

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace partopt {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Point2() = default;
    constexpr Point2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Point2& operator+=(Point2 o) { x += o.x; y += o.y; return *this; }
    constexpr Point2& operator-=(Point2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Point2& operator*=(double s) { x *= s; y *= s; return *this; }

    friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
    friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
constexpr double norm2(Point2 a) { return a.x * a.x + a.y * a.y; }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
/// Counter-clockwise quarter turn.
constexpr Point2 perp(Point2 a) { return {-a.y, a.x}; }
inline Point2 normalized(Point2 a) { return a / norm(a); }
inline bool is_finite(Point2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

inline Eigen::Vector2d to_vec(Point2 p) { return {p.x, p.y}; }
inline Point2 to_point(const Eigen::Vector2d& v) { return {v.x(), v.y()}; }

/// Bounding-box diagonal; the length scale all relative tolerances refer to.
double bbox_diagonal(std::span<const Point2> pts);

/// Simple counter-clockwise polygon. The constructor normalizes orientation
/// (a clockwise vertex list is reversed) and rejects fewer than 3 vertices or
/// a vanishing area with DegeneratePolygon.
class Polygon {
public:
    explicit Polygon(std::vector<Point2> vertices);

    std::span<const Point2> vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    const Point2& operator[](std::size_t i) const { return vertices_[i]; }

    double area() const;
    double perimeter() const;
    Point2 centroid() const;
    double scale() const { return bbox_diagonal(vertices_); }
    bool is_convex(double tol = 1e-12) const;
    /// Boundary points count as inside.
    bool contains(Point2 p, double tol = 0.0) const;

private:
    std::vector<Point2> vertices_;
};

struct Line2 {
    Point2 point;
    Point2 direction; ///< unit length

    /// Line through two distinct points.
    static Line2 through(Point2 a, Point2 b);
};

/// Shoelace area of a raw vertex list. Clockwise input, fewer than three
/// vertices or area <= 1e-14 raise DegeneratePolygon.
double polygon_area(std::span<const Point2> vertices);
double polygon_perimeter(std::span<const Point2> vertices);
double signed_area(std::span<const Point2> vertices);

/// ∫ |x - origin|^2 over a counter-clockwise polygon.
double polygon_second_moment(std::span<const Point2> vertices, Point2 origin);
Point2 polygon_centroid(std::span<const Point2> vertices);

/// Intersection of `subject` with the convex polygon `clip` by successive
/// half-plane clipping. Returns nullopt when the intersection has area below
/// 1e-14. Throws NonConvexClip if `clip` fails the convexity test.
std::optional<Polygon> clip_convex(const Polygon& subject, const Polygon& clip);

/// Circumcenter of a triangle. Throws CollinearPoints when
/// |D| <= 1e-12 * scale^2.
Point2 circumcenter(Point2 a, Point2 b, Point2 c);

/// d(circumcenter)/d(vertex `which`), with column j the derivative with
/// respect to coordinate j of that vertex. `which` is 0, 1 or 2 for a, b, c.
Eigen::Matrix2d circumcenter_jacobian(Point2 a, Point2 b, Point2 c, int which);

Point2 reflect_point(Point2 p, const Line2& l);
/// Linear part of the reflection across a line with unit direction `dir`.
Eigen::Matrix2d reflection_matrix(Point2 dir);

/// Signed distance of p to the line (positive on the left of `direction`).
double signed_distance(Point2 p, const Line2& l);

/// Polygon whose edges remember which constraint produced them. Edge k runs
/// from points[k] to points[k + 1] (cyclically) and carries tags[k].
struct TaggedPolygon {
    std::vector<Point2> points;
    std::vector<int> tags;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.size() < 3; }
};

/// Keeps the part of `poly` where (x - origin) . normal <= tol. Edges created
/// along the clipping line receive `tag`; consecutive points closer than
/// `merge_tol` are merged.
void clip_halfplane(TaggedPolygon& poly, Point2 origin, Point2 normal, int tag,
                    double tol, double merge_tol);

} // namespace partopt
