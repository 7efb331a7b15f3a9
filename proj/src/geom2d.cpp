#include "partopt/geom2d.hpp"
#include "partopt/errors.hpp"

#include <algorithm>
#include <limits>

namespace partopt {

double bbox_diagonal(std::span<const Point2> pts) {
    if (pts.empty())
        return 0.0;
    double xmin = pts[0].x, xmax = pts[0].x, ymin = pts[0].y, ymax = pts[0].y;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    return std::hypot(xmax - xmin, ymax - ymin);
}

double signed_area(std::span<const Point2> v) {
    const std::size_t n = v.size();
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        s += cross(v[k], v[(k + 1) % n]);
    return 0.5 * s;
}

double polygon_area(std::span<const Point2> v) {
    if (v.size() < 3)
        throw DegeneratePolygon("polygon needs at least 3 vertices");
    const double a = signed_area(v);
    if (a <= 1e-14)
        throw DegeneratePolygon("polygon area is not positive (clockwise or collapsed vertices)");
    return a;
}

double polygon_perimeter(std::span<const Point2> v) {
    polygon_area(v);
    const std::size_t n = v.size();
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        s += distance(v[k], v[(k + 1) % n]);
    return s;
}

double polygon_second_moment(std::span<const Point2> v, Point2 origin) {
    // Fan integration of x^2 + y^2 in coordinates centred at `origin`.
    const std::size_t n = v.size();
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const Point2 a = v[k] - origin;
        const Point2 b = v[(k + 1) % n] - origin;
        const double c = cross(a, b);
        s += c * (a.x * a.x + a.x * b.x + b.x * b.x + a.y * a.y + a.y * b.y + b.y * b.y);
    }
    return s / 12.0;
}

Point2 polygon_centroid(std::span<const Point2> v) {
    const std::size_t n = v.size();
    const Point2 o = v[0];
    double a = 0.0;
    Point2 c{};
    for (std::size_t k = 0; k < n; ++k) {
        const Point2 p = v[k] - o;
        const Point2 q = v[(k + 1) % n] - o;
        const double w = cross(p, q);
        a += w;
        c += w * (p + q);
    }
    return o + c / (3.0 * a);
}

Polygon::Polygon(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3)
        throw DegeneratePolygon("polygon needs at least 3 vertices");
    for (const auto& p : vertices_)
        if (!is_finite(p))
            throw DegeneratePolygon("non-finite vertex");
    if (signed_area(vertices_) < 0.0)
        std::reverse(vertices_.begin(), vertices_.end());
    if (signed_area(vertices_) <= 1e-14)
        throw DegeneratePolygon("polygon area is not positive");
}

double Polygon::area() const { return signed_area(vertices_); }

double Polygon::perimeter() const { return polygon_perimeter(vertices_); }

Point2 Polygon::centroid() const { return polygon_centroid(vertices_); }

bool Polygon::is_convex(double tol) const {
    const std::size_t n = vertices_.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Point2 e1 = vertices_[(k + 1) % n] - vertices_[k];
        const Point2 e2 = vertices_[(k + 2) % n] - vertices_[(k + 1) % n];
        if (cross(e1, e2) < -tol * norm(e1) * norm(e2))
            return false;
    }
    return true;
}

bool Polygon::contains(Point2 p, double tol) const {
    // Crossing number, with an explicit on-boundary check first.
    const std::size_t n = vertices_.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Point2 a = vertices_[k];
        const Point2 b = vertices_[(k + 1) % n];
        const Point2 ab = b - a;
        const double len2 = norm2(ab);
        const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
        if (distance(p, a + t * ab) <= tol)
            return true;
    }
    bool inside = false;
    for (std::size_t k = 0, j = n - 1; k < n; j = k++) {
        const Point2 a = vertices_[k];
        const Point2 b = vertices_[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x)
                inside = !inside;
        }
    }
    return inside;
}

Line2 Line2::through(Point2 a, Point2 b) { return {a, normalized(b - a)}; }

double signed_distance(Point2 p, const Line2& l) { return cross(l.direction, p - l.point); }

void clip_halfplane(TaggedPolygon& poly, Point2 origin, Point2 normal, int tag,
                    double tol, double merge_tol) {
    const std::size_t n = poly.points.size();
    if (n == 0)
        return;
    std::vector<double> d(n);
    bool any_out = false;
    for (std::size_t k = 0; k < n; ++k) {
        d[k] = dot(poly.points[k] - origin, normal);
        any_out = any_out || d[k] > tol;
    }
    if (!any_out)
        return;

    TaggedPolygon out;
    out.points.reserve(n + 2);
    out.tags.reserve(n + 2);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k1 = (k + 1) % n;
        const bool in0 = d[k] <= tol;
        const bool in1 = d[k1] <= tol;
        const Point2 a = poly.points[k];
        const Point2 b = poly.points[k1];
        if (in0) {
            out.points.push_back(a);
            out.tags.push_back(poly.tags[k]);
            if (!in1) {
                const double s = d[k] / (d[k] - d[k1]);
                out.points.push_back(a + std::clamp(s, 0.0, 1.0) * (b - a));
                out.tags.push_back(tag);
            }
        } else if (in1) {
            const double s = d[k] / (d[k] - d[k1]);
            out.points.push_back(a + std::clamp(s, 0.0, 1.0) * (b - a));
            out.tags.push_back(poly.tags[k]);
        }
    }

    // Drop zero-length edges; the surviving endpoint keeps the outgoing tag.
    bool changed = true;
    while (changed && out.points.size() >= 2) {
        changed = false;
        const std::size_t m = out.points.size();
        for (std::size_t k = 0; k < m; ++k) {
            if (distance(out.points[k], out.points[(k + 1) % m]) <= merge_tol) {
                out.points.erase(out.points.begin() + static_cast<std::ptrdiff_t>(k));
                out.tags.erase(out.tags.begin() + static_cast<std::ptrdiff_t>(k));
                changed = true;
                break;
            }
        }
    }
    if (out.points.size() < 3) {
        out.points.clear();
        out.tags.clear();
    }
    poly = std::move(out);
}

std::optional<Polygon> clip_convex(const Polygon& subject, const Polygon& clip) {
    if (!clip.is_convex(1e-12))
        throw NonConvexClip("clip polygon is not convex");
    std::vector<Point2> all(subject.vertices().begin(), subject.vertices().end());
    all.insert(all.end(), clip.vertices().begin(), clip.vertices().end());
    const double scale = bbox_diagonal(all);

    TaggedPolygon poly{{subject.vertices().begin(), subject.vertices().end()},
                       std::vector<int>(subject.size(), -1)};
    const std::size_t m = clip.size();
    for (std::size_t k = 0; k < m && !poly.empty(); ++k) {
        const Point2 a = clip[k];
        const Point2 b = clip[(k + 1) % m];
        // Outward normal of a CCW edge is the clockwise quarter turn.
        const Point2 nrm = normalized(Point2{b.y - a.y, a.x - b.x});
        clip_halfplane(poly, a, nrm, static_cast<int>(k), 1e-14 * scale, 1e-13 * scale);
    }
    if (poly.empty() || signed_area(poly.points) < 1e-14)
        return std::nullopt;
    return Polygon(std::move(poly.points));
}

Point2 circumcenter(Point2 a, Point2 b, Point2 c) {
    const std::array<Point2, 3> pts{a, b, c};
    const double scale = bbox_diagonal(pts);
    const double D = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if (!(std::abs(D) > 1e-12 * scale * scale))
        throw CollinearPoints("triangle vertices are collinear");
    const double sa = norm2(a), sb = norm2(b), sc = norm2(c);
    return {(sa * (b.y - c.y) + sb * (c.y - a.y) + sc * (a.y - b.y)) / D,
            (sa * (c.x - b.x) + sb * (a.x - c.x) + sc * (b.x - a.x)) / D};
}

namespace {

// Derivative with respect to the first vertex; the formulas are cyclic in
// (a, b, c), so the other two vertices reuse this with rotated arguments.
Eigen::Matrix2d jacobian_first(Point2 a, Point2 b, Point2 c) {
    const double D = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    const double sa = norm2(a), sb = norm2(b), sc = norm2(c);
    const double nx = sa * (b.y - c.y) + sb * (c.y - a.y) + sc * (a.y - b.y);
    const double ny = sa * (c.x - b.x) + sb * (a.x - c.x) + sc * (b.x - a.x);
    const double ox = nx / D, oy = ny / D;

    const double dD_dax = 2.0 * (b.y - c.y);
    const double dD_day = 2.0 * (c.x - b.x);
    const double dnx_dax = 2.0 * a.x * (b.y - c.y);
    const double dnx_day = 2.0 * a.y * (b.y - c.y) - sb + sc;
    const double dny_dax = 2.0 * a.x * (c.x - b.x) + sb - sc;
    const double dny_day = 2.0 * a.y * (c.x - b.x);

    Eigen::Matrix2d J;
    J(0, 0) = (dnx_dax - ox * dD_dax) / D;
    J(0, 1) = (dnx_day - ox * dD_day) / D;
    J(1, 0) = (dny_dax - oy * dD_dax) / D;
    J(1, 1) = (dny_day - oy * dD_day) / D;
    return J;
}

} // namespace

Eigen::Matrix2d circumcenter_jacobian(Point2 a, Point2 b, Point2 c, int which) {
    circumcenter(a, b, c); // collinearity check
    switch (which) {
    case 0: return jacobian_first(a, b, c);
    case 1: return jacobian_first(b, c, a);
    case 2: return jacobian_first(c, a, b);
    default: throw std::invalid_argument("circumcenter_jacobian: vertex id must be 0, 1 or 2");
    }
}

Eigen::Matrix2d reflection_matrix(Point2 dir) {
    const Point2 n = perp(dir);
    Eigen::Matrix2d R;
    R << 1.0 - 2.0 * n.x * n.x, -2.0 * n.x * n.y,
        -2.0 * n.x * n.y, 1.0 - 2.0 * n.y * n.y;
    return R;
}

Point2 reflect_point(Point2 p, const Line2& l) {
    const Point2 n = perp(l.direction);
    return p - 2.0 * dot(p - l.point, n) * n;
}

} // namespace partopt
