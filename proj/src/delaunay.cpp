#include "partopt/delaunay.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace partopt {

namespace {

struct WorkTriangle {
    std::array<int, 3> v;
    long double cx, cy, r2;
};

// Circumcircle in extended precision; the super-triangle vertices sit far
// away, so plain doubles lose digits in the hull triangles.
bool make_triangle(const std::vector<Point2>& pts, int a, int b, int c, WorkTriangle& out) {
    const long double ax = pts[a].x, ay = pts[a].y;
    const long double bx = pts[b].x - ax, by = pts[b].y - ay;
    const long double cx = pts[c].x - ax, cy = pts[c].y - ay;
    long double d = 2.0L * (bx * cy - by * cx);
    if (d == 0.0L)
        return false;
    if (d < 0) {
        std::swap(b, c);
        return make_triangle(pts, a, b, c, out);
    }
    const long double b2 = bx * bx + by * by;
    const long double c2 = cx * cx + cy * cy;
    const long double ux = (cy * b2 - by * c2) / d;
    const long double uy = (bx * c2 - cx * b2) / d;
    out.v = {a, b, c};
    out.cx = ax + ux;
    out.cy = ay + uy;
    out.r2 = ux * ux + uy * uy;
    return true;
}

} // namespace

std::vector<std::array<int, 3>> delaunay_triangulate(std::span<const Point2> input,
                                                     std::uint64_t shuffle_seed) {
    const int n = static_cast<int>(input.size());
    if (n < 3)
        return {};

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Point2> pts(input.begin(), input.end());
    double xmin = pts[0].x, xmax = xmin, ymin = pts[0].y, ymax = ymin;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const Point2 center{0.5 * (xmin + xmax), 0.5 * (ymin + ymax)};
    const double scale = std::max(std::hypot(xmax - xmin, ymax - ymin), 1e-300);
    const double R = 1e4 * scale;
    for (int k = 0; k < 3; ++k) {
        const double th = M_PI / 2.0 + 2.0 * M_PI * k / 3.0;
        pts.push_back(center + R * Point2{std::cos(th), std::sin(th)});
    }

    std::vector<WorkTriangle> tris;
    {
        WorkTriangle t{};
        make_triangle(pts, n, n + 1, n + 2, t);
        tris.push_back(t);
    }

    const long double rel = 1e-12L;
    for (int idx : order) {
        const long double px = pts[idx].x, py = pts[idx].y;
        std::vector<char> bad(tris.size(), 0);
        bool any = false;
        for (std::size_t t = 0; t < tris.size(); ++t) {
            const long double dx = px - tris[t].cx, dy = py - tris[t].cy;
            if (dx * dx + dy * dy < tris[t].r2 * (1.0L - rel)) {
                bad[t] = 1;
                any = true;
            }
        }
        if (!any) {
            // Point on a circumcircle of every containing triangle; fall back
            // to the triangle whose circle is closest.
            std::size_t best = 0;
            long double best_gap = std::numeric_limits<long double>::max();
            for (std::size_t t = 0; t < tris.size(); ++t) {
                const long double dx = px - tris[t].cx, dy = py - tris[t].cy;
                const long double gap = dx * dx + dy * dy - tris[t].r2;
                if (gap < best_gap) {
                    best_gap = gap;
                    best = t;
                }
            }
            bad[best] = 1;
        }

        std::map<std::pair<int, int>, int> edge_count;
        std::vector<std::pair<int, int>> boundary;
        for (std::size_t t = 0; t < tris.size(); ++t) {
            if (!bad[t])
                continue;
            for (int e = 0; e < 3; ++e) {
                const int a = tris[t].v[e], b = tris[t].v[(e + 1) % 3];
                ++edge_count[{std::min(a, b), std::max(a, b)}];
            }
        }
        for (std::size_t t = 0; t < tris.size(); ++t) {
            if (!bad[t])
                continue;
            for (int e = 0; e < 3; ++e) {
                const int a = tris[t].v[e], b = tris[t].v[(e + 1) % 3];
                if (edge_count[{std::min(a, b), std::max(a, b)}] == 1)
                    boundary.emplace_back(a, b);
            }
        }

        std::vector<WorkTriangle> kept;
        kept.reserve(tris.size() + boundary.size());
        for (std::size_t t = 0; t < tris.size(); ++t)
            if (!bad[t])
                kept.push_back(tris[t]);
        for (const auto& [a, b] : boundary) {
            WorkTriangle t{};
            if (make_triangle(pts, a, b, idx, t))
                kept.push_back(t);
        }
        tris = std::move(kept);
    }

    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris) {
        if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n)
            continue;
        const double a2 = cross(input[t.v[1]] - input[t.v[0]], input[t.v[2]] - input[t.v[0]]);
        if (a2 <= 1e-14 * scale * scale)
            continue; // sliver from collinear hull points
        out.push_back(t.v);
    }
    // Canonical order: rotate each triangle to start at its smallest index.
    for (auto& t : out)
        std::rotate(t.begin(), std::min_element(t.begin(), t.end()), t.end());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace partopt
