#include "partopt/capacity.hpp"
#include "partopt/errors.hpp"
#include "partopt/voronoi.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace partopt;
using testing::unit_square;

namespace {

Eigen::MatrixXd fd_cell_quantity(const std::vector<Point2>& pts, const Polygon& omega, bool perimeter, double h) {
    const std::size_t n = pts.size();
    Eigen::MatrixXd F(2 * n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 2; ++c) {
            auto pp = pts, pm = pts;
            (c == 0 ? pp[i].x : pp[i].y) += h;
            (c == 0 ? pm[i].x : pm[i].y) -= h;
            const auto cp = clip_cells(pp, omega), cm = clip_cells(pm, omega);
            const auto qp = perimeter ? cell_perimeters(cp) : cell_areas(cp);
            const auto qm = perimeter ? cell_perimeters(cm) : cell_areas(cm);
            for (std::size_t j = 0; j < n; ++j) F(2 * i + c, j) = (qp[j] - qm[j]) / (2 * h);
        }
    return F;
}

Polygon regular_polygon(int sides, double r = 1.0) {
    std::vector<Point2> v;
    for (int k = 0; k < sides; ++k) {
        const double t = 2 * std::numbers::pi * k / sides;
        v.push_back({r * std::cos(t), r * std::sin(t)});
    }
    return Polygon(v);
}

} // namespace

TEST_CASE("build_voronoi small cases") {
    const std::vector<Point2> two{{0.25, 0.5}, {0.75, 0.5}};
    const VoronoiDiagram d2 = build_voronoi(two);
    CHECK(d2.vertices.empty());
    REQUIRE(d2.ridges.size() == 1);
    CHECK(d2.ridges[0].is_line());
    CHECK(d2.ridges[0].origin.x == doctest::Approx(0.5));
    CHECK(std::abs(d2.ridges[0].direction.x) <= 1e-12);

    const std::vector<Point2> three{{0, 0}, {1, 0}, {0, 1}};
    const VoronoiDiagram d3 = build_voronoi(three);
    REQUIRE(d3.vertices.size() == 1);
    CHECK(d3.vertices[0].x == doctest::Approx(0.5));
    CHECK(d3.vertices[0].y == doctest::Approx(0.5));
    int rays = 0;
    for (const auto& r : d3.ridges) rays += r.is_ray();
    CHECK(rays == 3);
    CHECK_FALSE(d3.cocircular_degeneracy);

    const std::vector<Point2> four{{-2, 0}, {0, -2}, {2, 0}, {0, 2}};
    const VoronoiDiagram d4 = build_voronoi(four);
    CHECK(d4.cocircular_degeneracy);
    bool origin_found = false;
    for (const auto& v : d4.vertices) origin_found |= std::hypot(v.x, v.y) < 1e-9;
    CHECK(origin_found);

    CHECK_THROWS_AS(build_voronoi(std::vector<Point2>{{0.1, 0.1}, {0.1, 0.1}, {0.5, 0.5}}), DuplicatePoints);
}

TEST_CASE("Voronoi vertices are equidistant from their ridge sites") {
    const auto pts = testing::random_points(30, 17);
    const VoronoiDiagram d = build_voronoi(pts);
    for (const auto& r : d.ridges)
        for (int v : r.vertices)
            if (v >= 0) {
                const double da = distance(d.vertices[v], pts[r.sites[0]]);
                const double db = distance(d.vertices[v], pts[r.sites[1]]);
                CHECK(std::abs(da - db) <= 1e-9 * d.scale);
            }
}

TEST_CASE("clipped cells: symmetric cases") {
    const Polygon sq = unit_square();
    const auto c2 = clip_cells(std::vector<Point2>{{0.25, 0.5}, {0.75, 0.5}}, sq);
    REQUIRE(c2.size() == 2);
    CHECK(c2[0].area == doctest::Approx(0.5));
    CHECK(c2[1].area == doctest::Approx(0.5));
    REQUIRE(c2[0].interior_ridge_segments.size() == 1);
    const auto& seg = c2[0].interior_ridge_segments[0];
    CHECK(distance(seg.a, seg.b) == doctest::Approx(1.0));
    CHECK(seg.neighbor == 1);

    const auto c4 = clip_cells(std::vector<Point2>{{0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}, {0.25, 0.75}}, sq);
    for (const auto& c : c4) CHECK(c.area == doctest::Approx(0.25));
}

TEST_CASE("clipped cells partition the domain") {
    const Polygon sq = unit_square();
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto cells = clip_cells(testing::random_points(10, s), sq);
        double sum = 0.0;
        for (const auto& c : cells) {
            sum += c.area;
            CHECK(c.area == doctest::Approx(polygon_area(c.vertices)).epsilon(1e-12));
            double len = 0.0;
            for (const auto& r : c.interior_ridge_segments) len += distance(r.a, r.b);
            for (const auto& b : c.boundary_segments) len += distance(b.a, b.b);
            CHECK(std::abs(len - c.perimeter) <= 1e-12);
        }
        CHECK(std::abs(sum - 1.0) <= 1e-10);
    }
}

TEST_CASE("a site outside the domain may own an empty cell") {
    const auto cells = clip_cells(std::vector<Point2>{{0.5, 0.5}, {5.0, 5.0}}, unit_square());
    CHECK_FALSE(cells[0].empty);
    CHECK(cells[1].empty);
    CHECK(cells[0].area == doctest::Approx(1.0));
}

TEST_CASE("area gradients: two sites") {
    const GradientMatrix G = area_gradients(std::vector<Point2>{{0.25, 0.5}, {0.75, 0.5}}, unit_square());
    CHECK(G(0, 0) == doctest::Approx(0.5));
    CHECK(G(0, 1) == doctest::Approx(-0.5));
    CHECK(std::abs(G(1, 0)) <= 1e-12);
}

TEST_CASE("area and perimeter gradients match finite differences") {
    const Polygon sq = unit_square();
    for (std::uint64_t s = 0; s < 8; ++s) {
        const auto pts = testing::random_points(8, 100 + s);
        const GradientMatrix A = area_gradients(pts, sq);
        const GradientMatrix P = perimeter_gradients(pts, sq);
        CHECK(testing::rel_error(A, fd_cell_quantity(pts, sq, false, 1e-6)) <= 1e-5);
        CHECK(testing::rel_error(P, fd_cell_quantity(pts, sq, true, 1e-6)) <= 1e-4);
        CHECK(A.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("gradients on a non-square convex domain") {
    const Polygon hex = regular_polygon(6);
    const auto pts = testing::random_points(7, 9, -0.5, 0.5);
    CHECK(testing::rel_error(area_gradients(pts, hex), fd_cell_quantity(pts, hex, false, 1e-6)) <= 1e-5);
    CHECK(testing::rel_error(perimeter_gradients(pts, hex), fd_cell_quantity(pts, hex, true, 1e-6)) <= 1e-4);
}

TEST_CASE("perimeter gradients of the symmetric bisection vanish") {
    const GradientMatrix P = perimeter_gradients(std::vector<Point2>{{0.25, 0.5}, {0.75, 0.5}}, unit_square());
    // Only the shared ridge moves; the boundary pieces compensate along x.
    CHECK(std::abs(P.rowwise().sum()(1)) <= 1e-9);
    CHECK(std::abs(P.rowwise().sum()(3)) <= 1e-9);
    CHECK(std::abs(P.rowwise().sum()(0)) <= 1e-9);
}

TEST_CASE("four-site degenerate vertex is non-smooth") {
    const Polygon big({{-3, -3}, {3, -3}, {3, 3}, {-3, 3}});
    const std::vector<Point2> pts{{-2, 0}, {0, -2}, {2, 0}, {0, 2}};
    CHECK_THROWS_AS(perimeter_gradients(pts, big), NonSmoothConfiguration);
    const std::vector<Point2> off{{-2.1, 0}, {0, -2}, {2.1, 0}, {0, 2}};
    CHECK_NOTHROW(perimeter_gradients(off, big));
}

TEST_CASE("perimeter sweep has a kink at t = 2") {
    const Polygon big({{-3, -3}, {3, -3}, {3, 3}, {-3, 3}});
    auto P = [&](double t) {
        return total_perimeter(std::vector<Point2>{{-t, 0}, {0, -2}, {t, 0}, {0, 2}}, big);
    };
    const double h = 0.01;
    const double left = (P(2.0) - P(2.0 - h)) / h, right = (P(2.0 + h) - P(2.0)) / h;
    const double left2 = (P(2.0 - h) - P(2.0 - 2 * h)) / h, right2 = (P(2.0 + 2 * h) - P(2.0 + h)) / h;
    const double within = std::max(std::abs(left - left2), std::abs(right - right2));
    CHECK(std::abs(right - left) > 10.0 * within);
}

TEST_CASE("capacity objective") {
    const Polygon sq = unit_square();
    const std::vector<Point2> two{{0.25, 0.5}, {0.75, 0.5}};
    const std::vector<double> half{0.5, 0.5}, skew{0.3, 0.7};
    const auto at_target = capacity_objective(two, sq, half);
    CHECK(at_target.value <= 1e-28);
    CHECK(at_target.gradient.norm() <= 1e-14);
    CHECK(capacity_objective(two, sq, skew).value == doctest::Approx(0.08));

    const auto pts = testing::random_points(6, 4);
    const std::vector<double> t(6, 1.0 / 6.0);
    const auto vg = capacity_objective(pts, sq, t);
    const auto fd = testing::fd_gradient(
        [&](const Eigen::VectorXd& x) { return capacity_objective(unpack_points(x), sq, t).value; }, pack_points(pts),
        1e-6);
    CHECK(testing::rel_error(vg.gradient, fd) <= 1e-5);

    CHECK_THROWS_AS(capacity_objective(two, sq, std::vector<double>{0.5, 0.6}), ValidationError);
}

TEST_CASE("Lloyd energy and steps") {
    const Polygon sq = unit_square();
    const auto one = lloyd_energy(std::vector<Point2>{{0.5, 0.5}}, sq);
    CHECK(one.gradient.norm() <= 1e-14);
    const std::vector<Point2> quad{{0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}, {0.25, 0.75}};
    CHECK(lloyd_energy(quad, sq).gradient.norm() <= 1e-14);
    const auto same = lloyd_step(quad, sq);
    for (std::size_t i = 0; i < quad.size(); ++i) CHECK(distance(same[i], quad[i]) <= 1e-12);

    const auto moved = lloyd_step(std::vector<Point2>{{0.1, 0.5}, {0.9, 0.5}}, sq);
    CHECK(moved[0].x == doctest::Approx(0.25));
    CHECK(moved[1].x == doctest::Approx(0.75));

    const auto pts = testing::random_points(6, 8);
    const auto vg = lloyd_energy(pts, sq);
    const auto fd = testing::fd_gradient(
        [&](const Eigen::VectorXd& x) { return lloyd_energy(unpack_points(x), sq).value; }, pack_points(pts), 1e-6);
    CHECK(testing::rel_error(vg.gradient, fd) <= 1e-5);

    auto p = testing::random_points(12, 21);
    double prev = lloyd_energy(p, sq).value;
    for (int k = 0; k < 10; ++k) {
        p = lloyd_step(p, sq);
        const double e = lloyd_energy(p, sq).value;
        CHECK(e <= prev + 1e-14);
        prev = e;
    }
}

TEST_CASE("capacity-constrained solves") {
    const Polygon sq = unit_square();
    SUBCASE("symmetric start is already optimal") {
        const std::vector<Point2> two{{0.25, 0.5}, {0.75, 0.5}};
        const std::vector<double> t{0.5, 0.5};
        const auto r = solve_capacity_constrained(two, sq, t, CapacityMode::AreasOnly);
        CHECK(r.max_residual <= 1e-6);
        CHECK(distance(r.points[0], two[0]) <= 1e-9);
    }
    SUBCASE("every mode meets the targets") {
        const auto pts = testing::random_points(12, 31);
        std::vector<double> t(12, 1.0 / 12.0);
        for (auto mode : {CapacityMode::AreasOnly, CapacityMode::MinPerimeter, CapacityMode::LloydConstrained}) {
            const auto r = solve_capacity_constrained(pts, sq, t, mode);
            CHECK(r.max_residual <= 1e-6);
            for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(r.areas[i] - t[i]) <= 1e-6);
        }
    }
    SUBCASE("two small cells in a disk polygon") {
        const Polygon disk = regular_polygon(64);
        const double A = disk.area();
        // Two cells three times smaller than the other three.
        std::vector<double> t{3, 3, 3, 1, 1};
        for (auto& x : t) x *= A / 11.0;
        const auto r =
            solve_capacity_constrained(sample_points(disk, 5, 3), disk, t, CapacityMode::MinPerimeter);
        CHECK(r.max_residual <= 1e-6 * A);
    }
    SUBCASE("mode names") {
        CHECK(parse_capacity_mode("areas-only") == CapacityMode::AreasOnly);
        CHECK(to_string(CapacityMode::LloydConstrained) == "lloyd-constrained");
        CHECK_THROWS_AS(parse_capacity_mode("mma"), ValidationError);
    }
}

TEST_CASE("sampling and convex hull") {
    const Polygon sq = unit_square();
    const auto a = sample_points(sq, 50, 9), b = sample_points(sq, 50, 9);
    CHECK(a == b);
    for (const auto& p : a) CHECK(sq.contains(p));
    const Polygon h = convex_hull(std::vector<Point2>{{0, 0}, {1, 0}, {0.5, 0.2}, {1, 1}, {0, 1}, {0.5, 0.5}});
    CHECK(h.size() == 4);
    CHECK(h.area() == doctest::Approx(1.0));
}
