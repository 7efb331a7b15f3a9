#include "partopt/voronoi.hpp"
#include "partopt/delaunay.hpp"
#include "partopt/errors.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <map>
#include <numeric>

namespace partopt {

namespace {

constexpr double kDegeneracyTol = 1e-9;

void check_sites(std::span<const Point2> points, double scale, std::size_t min_sites = 2) {
    if (points.size() < min_sites)
        throw ValidationError("too few sites (" + std::to_string(points.size()) + ")");
    for (const auto& p : points)
        if (!is_finite(p))
            throw ValidationError("non-finite site coordinate");
    const double tol = kDegeneracyTol * scale;
    // Sort by x so the duplicate scan stays near-linear for spread-out sites.
    std::vector<int> idx(points.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return points[a].x < points[b].x; });
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size() && points[idx[b]].x - points[idx[a]].x <= tol; ++b)
            if (distance(points[idx[a]], points[idx[b]]) <= tol)
                throw DuplicatePoints("sites " + std::to_string(idx[a]) + " and " + std::to_string(idx[b]) +
                                      " coincide");
}

double combined_scale(std::span<const Point2> points, const Polygon& omega) {
    std::vector<Point2> all(points.begin(), points.end());
    all.insert(all.end(), omega.vertices().begin(), omega.vertices().end());
    return std::max(bbox_diagonal(all), 1e-300);
}

int omega_edge_of(int tag) { return -tag - 1; }

ClippedCell clip_one(std::span<const Point2> points, const Polygon& omega, int i,
                     const std::vector<int>& by_distance, double scale) {
    const Point2 pi = points[i];
    const int m = static_cast<int>(omega.size());
    TaggedPolygon poly;
    poly.points.assign(omega.vertices().begin(), omega.vertices().end());
    for (int k = 0; k < m; ++k)
        poly.tags.push_back(-(k + 1));

    const double tol = 1e-12 * scale;
    auto max_radius = [&] {
        double r = 0.0;
        for (const auto& v : poly.points)
            r = std::max(r, distance(v, pi));
        return r;
    };
    double rmax = max_radius();
    for (int j : by_distance) {
        if (j == i)
            continue;
        const double dij = distance(points[j], pi);
        if (0.5 * dij > rmax + tol)
            break;
        const Point2 nrm = (points[j] - pi) / dij;
        clip_halfplane(poly, 0.5 * (pi + points[j]), nrm, j, tol, tol);
        if (poly.empty())
            break;
        rmax = max_radius();
    }

    ClippedCell cell;
    cell.site = i;
    if (poly.empty() || signed_area(poly.points) < 1e-14)
        return cell;

    cell.empty = false;
    cell.vertices = std::move(poly.points);
    cell.edge_tags = std::move(poly.tags);
    const int nv = static_cast<int>(cell.vertices.size());
    cell.area = signed_area(cell.vertices);
    cell.vertex_info.resize(nv);
    for (int k = 0; k < nv; ++k) {
        const int tin = cell.edge_tags[(k + nv - 1) % nv];
        const int tout = cell.edge_tags[k];
        CellVertex& info = cell.vertex_info[k];
        if (tin >= 0 && tout >= 0) {
            info.kind = CellVertexKind::Voronoi;
            info.a = tin;
            info.b = tout;
        } else if (tin >= 0 || tout >= 0) {
            info.kind = CellVertexKind::Boundary;
            info.a = tin >= 0 ? tin : tout;
            info.omega_edge = omega_edge_of(tin >= 0 ? tout : tin);
        } else {
            info.kind = CellVertexKind::Corner;
            info.omega_vertex = omega_edge_of(tout);
        }
        const Point2 a = cell.vertices[k];
        const Point2 b = cell.vertices[(k + 1) % nv];
        cell.perimeter += distance(a, b);
        if (tout >= 0)
            cell.interior_ridge_segments.push_back({a, b, tout});
        else
            cell.boundary_segments.push_back({a, b, omega_edge_of(tout)});
    }
    return cell;
}

std::vector<ClippedCell> clip_all(std::span<const Point2> points, const Polygon& omega, double scale) {
    if (!omega.is_convex(1e-12))
        throw NonConvexClip("domain polygon is not convex");
    const int n = static_cast<int>(points.size());
    std::vector<ClippedCell> cells(n);
    std::vector<int> order(n);
    std::vector<double> d2(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            d2[j] = norm2(points[j] - points[i]);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return d2[a] < d2[b] || (d2[a] == d2[b] && a < b); });
        cells[i] = clip_one(points, omega, i, order, scale);
    }
    return cells;
}

} // namespace

int VoronoiDiagram::vertex_degree(int v) const {
    int deg = 0;
    for (const auto& r : ridges)
        deg += (r.vertices[0] == v) + (r.vertices[1] == v);
    return deg;
}

std::pair<Point2, Point2> VoronoiDiagram::ridge_segment(const VoronoiRidge& r, double radius) const {
    if (radius <= 0.0)
        radius = 10.0 * scale;
    if (r.is_segment())
        return {vertices[r.vertices[0]], vertices[r.vertices[1]]};
    Point2 center{};
    for (const auto& p : points)
        center += p;
    center = center / static_cast<double>(points.size());
    if (r.is_ray()) {
        const Point2 v = vertices[r.vertices[0]];
        return {v, v + (radius + distance(v, center)) * r.direction};
    }
    const double reach = radius + distance(r.origin, center);
    return {r.origin - reach * r.direction, r.origin + reach * r.direction};
}

VoronoiDiagram build_voronoi(std::span<const Point2> points) {
    VoronoiDiagram d;
    d.points.assign(points.begin(), points.end());
    d.scale = std::max(bbox_diagonal(points), 1e-300);
    check_sites(points, d.scale);
    const int n = static_cast<int>(points.size());
    const double tol = kDegeneracyTol * d.scale;

    d.delaunay = delaunay_triangulate(points);
    if (d.delaunay.empty()) {
        // Collinear sites: consecutive pairs are separated by parallel lines.
        int far = 1;
        for (int k = 1; k < n; ++k)
            if (distance(points[k], points[0]) > distance(points[far], points[0]))
                far = k;
        const Point2 u = normalized(points[far] - points[0]);
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(),
                  [&](int a, int b) { return dot(points[a] - points[0], u) < dot(points[b] - points[0], u); });
        for (int k = 0; k + 1 < n; ++k) {
            VoronoiRidge r;
            r.sites = {std::min(idx[k], idx[k + 1]), std::max(idx[k], idx[k + 1])};
            r.origin = 0.5 * (points[idx[k]] + points[idx[k + 1]]);
            r.direction = perp(u);
            d.ridges.push_back(r);
        }
        return d;
    }

    const int nt = static_cast<int>(d.delaunay.size());
    std::vector<int> vertex_of(nt);
    for (int t = 0; t < nt; ++t) {
        const auto& tri = d.delaunay[t];
        const Point2 c = circumcenter(points[tri[0]], points[tri[1]], points[tri[2]]);
        int found = -1;
        for (int v = 0; v < static_cast<int>(d.vertices.size()); ++v)
            if (distance(d.vertices[v], c) <= tol) {
                found = v;
                break;
            }
        if (found < 0) {
            found = static_cast<int>(d.vertices.size());
            d.vertices.push_back(c);
        } else {
            d.cocircular_degeneracy = true;
        }
        vertex_of[t] = found;
    }

    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edges; // edge -> (triangle, opposite)
    for (int t = 0; t < nt; ++t)
        for (int e = 0; e < 3; ++e) {
            const int a = d.delaunay[t][e], b = d.delaunay[t][(e + 1) % 3], c = d.delaunay[t][(e + 2) % 3];
            edges[{std::min(a, b), std::max(a, b)}].emplace_back(t, c);
        }
    for (const auto& [key, adj] : edges) {
        VoronoiRidge r;
        r.sites = {key.first, key.second};
        const Point2 pa = points[key.first], pb = points[key.second];
        r.origin = 0.5 * (pa + pb);
        if (adj.size() == 2) {
            const int v0 = vertex_of[adj[0].first], v1 = vertex_of[adj[1].first];
            if (v0 == v1)
                continue; // collapsed ridge at a co-circular vertex
            r.vertices = {v0, v1};
            r.direction = normalized(d.vertices[v1] - d.vertices[v0]);
        } else {
            Point2 nrm = normalized(perp(pb - pa));
            if (dot(nrm, points[adj[0].second] - pa) > 0.0)
                nrm = -nrm;
            r.vertices = {vertex_of[adj[0].first], -1};
            r.direction = nrm;
        }
        d.ridges.push_back(r);
    }
    for (int v = 0; v < static_cast<int>(d.vertices.size()); ++v)
        if (d.vertex_degree(v) >= 4)
            d.cocircular_degeneracy = true;
    return d;
}

std::vector<ClippedCell> clip_cells(const VoronoiDiagram& d, const Polygon& omega) {
    return clip_all(d.points, omega, combined_scale(d.points, omega));
}

std::vector<ClippedCell> clip_cells(std::span<const Point2> points, const Polygon& omega) {
    const double scale = combined_scale(points, omega);
    check_sites(points, scale, 1);
    return clip_all(points, omega, scale);
}

std::vector<double> cell_areas(std::span<const ClippedCell> cells) {
    std::vector<double> a;
    a.reserve(cells.size());
    for (const auto& c : cells)
        a.push_back(c.area);
    return a;
}

std::vector<double> cell_perimeters(std::span<const ClippedCell> cells) {
    std::vector<double> p;
    p.reserve(cells.size());
    for (const auto& c : cells)
        p.push_back(c.perimeter);
    return p;
}

double total_perimeter(std::span<const Point2> points, const Polygon& omega) {
    double s = 0.0;
    for (const auto& c : clip_cells(points, omega))
        s += c.perimeter;
    return s;
}

GradientMatrix area_gradients(std::span<const Point2> points, const Polygon& omega) {
    const auto cells = clip_cells(points, omega);
    const int n = static_cast<int>(points.size());
    GradientMatrix G = GradientMatrix::Zero(2 * n, n);
    for (const auto& cell : cells) {
        if (cell.empty)
            continue;
        const int i = cell.site;
        for (const auto& seg : cell.interior_ridge_segments) {
            const int j = seg.neighbor;
            if (j < i)
                continue; // each ridge once, from the lower-indexed cell
            const Point2 pi = points[i], pj = points[j];
            const double dist = distance(pi, pj);
            const Point2 nrm = (pj - pi) / dist;
            const Point2 tan = perp(nrm);
            const Point2 mid = 0.5 * (pi + pj);
            Point2 vk = seg.a, vl = seg.b;
            if (dot(vk - mid, tan) < dot(vl - mid, tan))
                std::swap(vk, vl);
            const double len = distance(vk, vl);
            const double moment = (norm2(vk - mid) - norm2(vl - mid)) / (2.0 * dist);
            for (int c = 0; c < 2; ++c) {
                const double dn = c == 0 ? nrm.x : nrm.y;
                const double dt = c == 0 ? tan.x : tan.y;
                const double zn = 0.5 * dn * len;
                const double zt = dt * moment;
                G(2 * i + c, i) += zn + zt;
                G(2 * i + c, j) -= zn + zt;
                G(2 * j + c, i) += zn - zt;
                G(2 * j + c, j) -= zn - zt;
            }
        }
    }
    return G;
}

GradientMatrix perimeter_gradients(std::span<const Point2> points, const Polygon& omega) {
    const auto cells = clip_cells(points, omega);
    const int n = static_cast<int>(points.size());
    const double scale = combined_scale(points, omega);
    const double tol = kDegeneracyTol * scale;
    const int m = static_cast<int>(omega.size());

    auto distance_to_boundary = [&](Point2 p) {
        double best = std::numeric_limits<double>::max();
        for (int e = 0; e < m; ++e) {
            const Point2 a = omega[e], b = omega[(e + 1) % m];
            const double t = std::clamp(dot(p - a, b - a) / norm2(b - a), 0.0, 1.0);
            best = std::min(best, distance(p, a + t * (b - a)));
        }
        return best;
    };

    GradientMatrix G = GradientMatrix::Zero(2 * n, n);
    for (const auto& cell : cells) {
        if (cell.empty)
            continue;
        const int i = cell.site;
        const int nv = static_cast<int>(cell.vertices.size());
        for (int k = 0; k < nv; ++k) {
            const CellVertex& info = cell.vertex_info[k];
            if (info.kind == CellVertexKind::Corner)
                continue;
            const Point2 v = cell.vertices[k];
            // Length change of the two incident edges under a unit vertex velocity.
            const Point2 w = normalized(v - cell.vertices[(k + nv - 1) % nv]) +
                             normalized(v - cell.vertices[(k + 1) % nv]);
            const Eigen::Vector2d wv = to_vec(w);

            if (info.kind == CellVertexKind::Voronoi) {
                const int a = info.a, b = info.b;
                const Point2 o = circumcenter(points[i], points[a], points[b]);
                const double r = distance(o, points[i]);
                for (int l = 0; l < n; ++l)
                    if (l != i && l != a && l != b && distance(o, points[l]) - r <= tol)
                        throw NonSmoothConfiguration("Voronoi vertex of degree >= 4 (sites " + std::to_string(i) +
                                                     ", " + std::to_string(a) + ", " + std::to_string(b) + ", " +
                                                     std::to_string(l) + ")");
                if (distance_to_boundary(o) <= tol)
                    throw NonSmoothConfiguration("Voronoi vertex on the domain boundary");
                const int sites[3] = {i, a, b};
                for (int s = 0; s < 3; ++s) {
                    const Eigen::Matrix2d J = circumcenter_jacobian(points[i], points[a], points[b], s);
                    G.block<2, 1>(2 * sites[s], i) += J.transpose() * wv;
                }
            } else {
                const int j = info.a;
                const int e = info.omega_edge;
                const Point2 c0 = omega[e], c1 = omega[(e + 1) % m];
                if (distance(v, c0) <= tol || distance(v, c1) <= tol)
                    throw NonSmoothConfiguration("Voronoi ridge passes through a domain corner");
                const Line2 side = Line2::through(c0, c1);
                const Eigen::Matrix2d R = reflection_matrix(side.direction);
                // The boundary point is the circumcenter of (p_fixed, p_mirrored,
                // reflection of p_mirrored); reflect whichever site is farther
                // from the side so the triangle stays well shaped.
                int fixed = i, mirrored = j;
                if (std::abs(signed_distance(points[i], side)) > std::abs(signed_distance(points[j], side)))
                    std::swap(fixed, mirrored);
                const Point2 pf = points[fixed], pm = points[mirrored];
                const Point2 pr = reflect_point(pm, side);
                const Eigen::Matrix2d Jf = circumcenter_jacobian(pf, pm, pr, 0);
                const Eigen::Matrix2d Jm = circumcenter_jacobian(pf, pm, pr, 1) +
                                           circumcenter_jacobian(pf, pm, pr, 2) * R;
                G.block<2, 1>(2 * fixed, i) += Jf.transpose() * wv;
                G.block<2, 1>(2 * mirrored, i) += Jm.transpose() * wv;
            }
        }
    }
    return G;
}

ValueAndGradient capacity_objective(std::span<const Point2> points, const Polygon& omega,
                                    std::span<const double> targets) {
    const int n = static_cast<int>(points.size());
    if (static_cast<int>(targets.size()) != n)
        throw DimensionMismatch("one target per site is required");
    double sum = 0.0;
    for (double t : targets) {
        if (!(t > 0.0))
            throw ValidationError("capacity targets must be positive");
        sum += t;
    }
    const double area = omega.area();
    if (std::abs(sum - area) > 1e-9 * std::max(1.0, area))
        throw ValidationError("capacity targets must sum to the domain area");

    const auto cells = clip_cells(points, omega);
    const GradientMatrix G = area_gradients(points, omega);
    ValueAndGradient out;
    Eigen::VectorXd resid(n);
    for (int i = 0; i < n; ++i)
        resid[i] = cells[i].area - targets[i];
    out.value = resid.squaredNorm();
    out.gradient = 2.0 * G * resid;
    return out;
}

ValueAndGradient lloyd_energy(std::span<const Point2> points, const Polygon& omega) {
    const auto cells = clip_cells(points, omega);
    const int n = static_cast<int>(points.size());
    ValueAndGradient out;
    out.gradient = Eigen::VectorXd::Zero(2 * n);
    for (const auto& cell : cells) {
        if (cell.empty)
            continue;
        const Point2 p = points[cell.site];
        out.value += polygon_second_moment(cell.vertices, p);
        const Point2 g = 2.0 * cell.area * (p - cell.centroid());
        out.gradient[2 * cell.site] = g.x;
        out.gradient[2 * cell.site + 1] = g.y;
    }
    return out;
}

std::vector<Point2> lloyd_step(std::span<const Point2> points, const Polygon& omega) {
    const auto cells = clip_cells(points, omega);
    std::vector<Point2> out(points.begin(), points.end());
    for (const auto& cell : cells)
        if (!cell.empty)
            out[cell.site] = cell.centroid();
    return out;
}

std::vector<Point2> unpack_points(const Eigen::VectorXd& x) {
    std::vector<Point2> p(x.size() / 2);
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = {x[2 * i], x[2 * i + 1]};
    return p;
}

Eigen::VectorXd pack_points(std::span<const Point2> pts) {
    Eigen::VectorXd x(2 * pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        x[2 * i] = pts[i].x;
        x[2 * i + 1] = pts[i].y;
    }
    return x;
}

} // namespace partopt
