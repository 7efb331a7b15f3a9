#include "partopt/mesh.hpp"

#include "partopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

namespace partopt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double tri_area(Point2 a, Point2 b, Point2 c) { return 0.5 * cross(b - a, c - a); }

/// Ring start index of ring j (ring 0 is the center node).
std::vector<int> ring_offsets(const RingLayout& L) {
    std::vector<int> off(L.rings + 2, 0);
    off[0] = 0;
    off[1] = 1;
    for (int j = 1; j <= L.rings; ++j)
        off[j + 1] = off[j] + L.ring_counts[j - 1];
    return off;
}

struct ShapeStats {
    double r_max = 0.0;
    double speed_max = 0.0; // max sqrt(rho^2 + rho'^2)
};

ShapeStats shape_stats(const RadialShape& s) {
    ShapeStats st;
    for (int i = 0; i < kRadialGrid; ++i) {
        const auto [r, dr] = radial_eval(s, kTwoPi * i / kRadialGrid);
        st.r_max = std::max(st.r_max, r);
        st.speed_max = std::max(st.speed_max, std::hypot(r, dr));
    }
    return st;
}

RingLayout layout_for_spacing(const ShapeStats& st, double spacing) {
    RingLayout L;
    L.rings = std::max(1, static_cast<int>(std::ceil(st.r_max / spacing)));
    L.ring_counts.resize(L.rings);
    for (int j = 1; j <= L.rings; ++j) {
        const double circ = kTwoPi * j * st.speed_max / L.rings;
        L.ring_counts[j - 1] = std::max(6, static_cast<int>(std::lround(circ / spacing)));
    }
    return L;
}

} // namespace

std::size_t RingLayout::node_count() const {
    std::size_t n = 1;
    for (int c : ring_counts) n += static_cast<std::size_t>(c);
    return n;
}

double TriMesh::triangle_area(int t) const {
    const auto& T = triangles[t];
    return tri_area(nodes[T[0]], nodes[T[1]], nodes[T[2]]);
}

double TriMesh::area() const {
    double a = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t)
        a += triangle_area(static_cast<int>(t));
    return a;
}

Polygon TriMesh::boundary_polygon() const {
    std::vector<Point2> v;
    v.reserve(boundary_nodes.size());
    for (int i : boundary_nodes) v.push_back(nodes[i]);
    return Polygon(std::move(v));
}

MeshQuality mesh_quality(const TriMesh& m) {
    MeshQuality q;
    q.min_angle_deg = 180.0;
    for (const auto& T : m.triangles) {
        for (int k = 0; k < 3; ++k) {
            const Point2 a = m.nodes[T[k]], b = m.nodes[T[(k + 1) % 3]], c = m.nodes[T[(k + 2) % 3]];
            q.max_edge = std::max(q.max_edge, distance(a, b));
            const Point2 u = b - a, v = c - a;
            const double ang = std::atan2(std::abs(cross(u, v)), dot(u, v));
            q.min_angle_deg = std::min(q.min_angle_deg, ang * 180.0 / std::numbers::pi);
        }
    }
    return q;
}

TriMesh mesh_from_layout(const RadialShape& shape, const RingLayout& L) {
    validate_shape(shape);
    if (L.rings < 1 || static_cast<int>(L.ring_counts.size()) != L.rings)
        throw ValidationError("ring layout is inconsistent");
    for (int c : L.ring_counts)
        if (c < 3)
            throw ValidationError("every ring needs at least three nodes");

    TriMesh m;
    m.layout = L;
    const auto off = ring_offsets(L);
    const std::size_t N = L.node_count();
    m.nodes.reserve(N);
    m.reference_nodes.reserve(N);

    m.nodes.emplace_back(0.0, 0.0);
    m.reference_nodes.emplace_back(0.0, 0.0);
    for (int j = 1; j <= L.rings; ++j) {
        const double r = static_cast<double>(j) / L.rings;
        const int nj = L.ring_counts[j - 1];
        for (int k = 0; k < nj; ++k) {
            const double t = kTwoPi * k / nj;
            const double c = std::cos(t), s = std::sin(t);
            const double rho = radial_eval(shape, t).first;
            m.reference_nodes.emplace_back(r * c, r * s);
            m.nodes.emplace_back(r * rho * c, r * rho * s);
        }
    }

    // Center fan.
    const int n1 = L.ring_counts[0];
    for (int k = 0; k < n1; ++k)
        m.triangles.push_back({0, off[1] + k, off[1] + (k + 1) % n1});

    // Strips between consecutive rings, merged by angle (integer comparison
    // of (ib+1)/nb against (ia+1)/na keeps the choice exact).
    for (int j = 2; j <= L.rings; ++j) {
        const int na = L.ring_counts[j - 2], nb = L.ring_counts[j - 1];
        const int A = off[j - 1], B = off[j];
        int ia = 0, ib = 0;
        while (ia < na || ib < nb) {
            const bool advance_outer =
                ia == na || (ib < nb && static_cast<long long>(ib + 1) * na <= static_cast<long long>(ia + 1) * nb);
            if (advance_outer) {
                m.triangles.push_back({A + ia % na, B + ib, B + (ib + 1) % nb});
                ++ib;
            } else {
                m.triangles.push_back({A + ia, B + ib % nb, A + (ia + 1) % na});
                ++ia;
            }
        }
    }

    const int nK = L.ring_counts.back();
    const int K0 = off[L.rings];
    for (int k = 0; k < nK; ++k) {
        m.boundary_nodes.push_back(K0 + k);
        m.boundary_edges.push_back({K0 + k, K0 + (k + 1) % nK});
        m.boundary_angle.push_back(kTwoPi * k / nK);
    }
    return m;
}

namespace {

// Steep radial functions can fold a coarse strip over; finer rings fix it.
bool all_positive(const TriMesh& m) {
    for (std::size_t t = 0; t < m.triangles.size(); ++t)
        if (!(m.triangle_area(static_cast<int>(t)) > 0.0))
            return false;
    return true;
}

} // namespace

RingLayout choose_layout(const RadialShape& shape, double h, std::size_t node_cap) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw ValidationError("mesh size h must be positive");
    validate_shape(shape);
    const ShapeStats st = shape_stats(shape);
    double spacing = 0.75 * h;
    for (int attempt = 0; attempt < 60; ++attempt, spacing *= 0.92) {
        RingLayout L = layout_for_spacing(st, spacing);
        if (L.node_count() > node_cap)
            throw MeshTooFine("mesh would need " + std::to_string(L.node_count()) + " nodes (cap " +
                              std::to_string(node_cap) + ")");
        const TriMesh m = mesh_from_layout(shape, L);
        if (mesh_quality(m).max_edge <= h && all_positive(m))
            return L;
    }
    throw MeshTooFine("could not reach the requested edge length");
}

TriMesh mesh_from_radial(const RadialShape& shape, double h, std::size_t node_cap) {
    return mesh_from_layout(shape, choose_layout(shape, h, node_cap));
}

TriMesh mesh_rectangle(double x0, double y0, double x1, double y1, double h) {
    if (!(x1 > x0) || !(y1 > y0))
        throw ValidationError("rectangle must have positive extent");
    if (!(h > 0.0))
        throw ValidationError("mesh size h must be positive");
    auto cells = [&](double len) {
        int n = std::max(2, static_cast<int>(std::ceil(len * std::numbers::sqrt2 / h - 1e-12)));
        return n + (n % 2);
    };
    const int nx = cells(x1 - x0), ny = cells(y1 - y0);
    TriMesh m;
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            const Point2 p(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny);
            m.nodes.push_back(p);
        }
    m.reference_nodes = m.nodes;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            if ((i + j) % 2 == 0) {
                m.triangles.push_back({a, b, c});
                m.triangles.push_back({a, c, d});
            } else {
                m.triangles.push_back({a, b, d});
                m.triangles.push_back({b, c, d});
            }
        }
    for (int i = 0; i < nx; ++i) m.boundary_nodes.push_back(id(i, 0));
    for (int j = 0; j < ny; ++j) m.boundary_nodes.push_back(id(nx, j));
    for (int i = nx; i > 0; --i) m.boundary_nodes.push_back(id(i, ny));
    for (int j = ny; j > 0; --j) m.boundary_nodes.push_back(id(0, j));
    const Point2 mid(0.5 * (x0 + x1), 0.5 * (y0 + y1));
    const std::size_t nb = m.boundary_nodes.size();
    for (std::size_t k = 0; k < nb; ++k) {
        m.boundary_edges.push_back({m.boundary_nodes[k], m.boundary_nodes[(k + 1) % nb]});
        const Point2 d = m.nodes[m.boundary_nodes[k]] - mid;
        double t = std::atan2(d.y, d.x);
        if (t < 0.0) t += kTwoPi;
        m.boundary_angle.push_back(t);
    }
    return m;
}

namespace {

/// Uniform bucket grid over triangle bounding boxes for point location.
class TriangleLocator {
public:
    TriangleLocator(const std::vector<Point2>& pts, const std::vector<std::array<int, 3>>& tris)
        : pts_(pts), tris_(tris) {
        lo_ = hi_ = pts.front();
        for (const auto& p : pts) {
            lo_.x = std::min(lo_.x, p.x); lo_.y = std::min(lo_.y, p.y);
            hi_.x = std::max(hi_.x, p.x); hi_.y = std::max(hi_.y, p.y);
        }
        n_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(tris.size()) / 2.0)));
        cw_ = std::max((hi_.x - lo_.x) / n_, 1e-300);
        ch_ = std::max((hi_.y - lo_.y) / n_, 1e-300);
        buckets_.resize(static_cast<std::size_t>(n_) * n_);
        for (std::size_t t = 0; t < tris.size(); ++t) {
            Point2 a = pts[tris[t][0]], b = pts[tris[t][1]], c = pts[tris[t][2]];
            const int i0 = cx(std::min({a.x, b.x, c.x})), i1 = cx(std::max({a.x, b.x, c.x}));
            const int j0 = cy(std::min({a.y, b.y, c.y})), j1 = cy(std::max({a.y, b.y, c.y}));
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i)
                    buckets_[j * n_ + i].push_back(static_cast<int>(t));
        }
    }

    /// Triangle index and barycentric weights, or -1 when p lies outside.
    int locate(Point2 p, std::array<double, 3>& w) const {
        if (p.x < lo_.x - 1e-12 || p.x > hi_.x + 1e-12 || p.y < lo_.y - 1e-12 || p.y > hi_.y + 1e-12)
            return -1;
        int best = -1;
        double best_min = -1e300;
        for (int t : buckets_[cy(p.y) * n_ + cx(p.x)]) {
            const Point2 a = pts_[tris_[t][0]], b = pts_[tris_[t][1]], c = pts_[tris_[t][2]];
            const double A = tri_area(a, b, c);
            const std::array<double, 3> l{tri_area(p, b, c) / A, tri_area(a, p, c) / A, tri_area(a, b, p) / A};
            const double mn = std::min({l[0], l[1], l[2]});
            if (mn > best_min) {
                best_min = mn;
                best = t;
                w = l;
            }
        }
        return best_min >= -1e-10 ? best : -1;
    }

private:
    int cx(double x) const { return std::clamp(static_cast<int>((x - lo_.x) / cw_), 0, n_ - 1); }
    int cy(double y) const { return std::clamp(static_cast<int>((y - lo_.y) / ch_), 0, n_ - 1); }

    const std::vector<Point2>& pts_;
    const std::vector<std::array<int, 3>>& tris_;
    Point2 lo_, hi_;
    int n_ = 1;
    double cw_ = 1.0, ch_ = 1.0;
    std::vector<std::vector<int>> buckets_;
};

} // namespace

std::vector<double> transfer_field(const TriMesh& from, const std::vector<double>& field, const TriMesh& to,
                                   double angle) {
    if (field.size() != from.num_nodes())
        throw DimensionMismatch("field length does not match the source mesh");
    if (angle == 0.0 && from.layout.rings > 0 && from.layout == to.layout)
        return field;
    const TriangleLocator loc(from.reference_nodes, from.triangles);
    const double c = std::cos(angle), s = std::sin(angle);
    std::vector<double> out(to.num_nodes());
    for (std::size_t i = 0; i < to.num_nodes(); ++i) {
        const Point2 q = to.reference_nodes[i];
        const Point2 p{c * q.x + s * q.y, -s * q.x + c * q.y};
        std::array<double, 3> w{};
        const int t = loc.locate(p, w);
        if (t >= 0) {
            const auto& T = from.triangles[t];
            out[i] = w[0] * field[T[0]] + w[1] * field[T[1]] + w[2] * field[T[2]];
        } else {
            std::size_t best = 0;
            double bd = 1e300;
            for (std::size_t k = 0; k < from.num_nodes(); ++k) {
                const double d = norm2(from.reference_nodes[k] - p);
                if (d < bd) { bd = d; best = k; }
            }
            out[i] = field[best];
        }
    }
    return out;
}

void validate_mesh(const TriMesh& m) {
    const int N = static_cast<int>(m.num_nodes());
    std::map<std::pair<int, int>, int> edge_use;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const auto& T = m.triangles[t];
        for (int k = 0; k < 3; ++k)
            if (T[k] < 0 || T[k] >= N)
                throw ValidationError("triangle " + std::to_string(t) + " has an out-of-range node");
        if (!(m.triangle_area(static_cast<int>(t)) > 0.0))
            throw ValidationError("triangle " + std::to_string(t) + " is not positively oriented");
        for (int k = 0; k < 3; ++k) {
            const int a = T[k], b = T[(k + 1) % 3];
            if (++edge_use[{a, b}] > 1)
                throw ValidationError("directed edge used twice: mesh is not conforming");
        }
    }
    std::size_t boundary_count = 0;
    for (const auto& [e, c] : edge_use) {
        (void)c;
        if (!edge_use.count({e.second, e.first}))
            ++boundary_count;
    }
    if (boundary_count != m.boundary_edges.size())
        throw ValidationError("boundary edges do not match the free edges of the triangulation");
    for (std::size_t k = 0; k < m.boundary_edges.size(); ++k) {
        const auto& e = m.boundary_edges[k];
        if (!edge_use.count({e[0], e[1]}) || edge_use.count({e[1], e[0]}))
            throw ValidationError("boundary edge " + std::to_string(k) + " is not a free edge");
        if (e[1] != m.boundary_edges[(k + 1) % m.boundary_edges.size()][0])
            throw ValidationError("boundary edges do not form a closed loop");
    }
}

} // namespace partopt
