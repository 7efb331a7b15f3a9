#include "partopt/radial_shape.hpp"

#include "partopt/errors.hpp"
#include "partopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace partopt {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double grid_t(int i) { return kTwoPi * i / kRadialGrid; }
} // namespace

RadialShape::RadialShape(double a0_, std::vector<double> a_, std::vector<double> b_)
    : a0(a0_), a(std::move(a_)), b(std::move(b_)) {
    if (a.size() != b.size())
        throw DimensionMismatch("cosine and sine coefficient lists differ in length");
}

RadialShape RadialShape::disk(double radius, int modes) {
    return RadialShape(radius, std::vector<double>(modes, 0.0), std::vector<double>(modes, 0.0));
}

Eigen::VectorXd RadialShape::coefficients() const {
    const int n = modes();
    Eigen::VectorXd v(2 * n + 1);
    v[0] = a0;
    for (int k = 0; k < n; ++k) {
        v[1 + k] = a[k];
        v[1 + n + k] = b[k];
    }
    return v;
}

RadialShape RadialShape::from_coefficients(const Eigen::VectorXd& v) {
    if (v.size() < 1 || v.size() % 2 == 0)
        throw DimensionMismatch("coefficient vector must have odd length 2N+1");
    const int n = static_cast<int>(v.size() - 1) / 2;
    RadialShape s = disk(v[0], n);
    for (int k = 0; k < n; ++k) {
        s.a[k] = v[1 + k];
        s.b[k] = v[1 + n + k];
    }
    return s;
}

RadialShape RadialShape::rotated(double angle) const {
    // a cos k(t-φ) + b sin k(t-φ) = (a cos kφ - b sin kφ) cos kt + (a sin kφ + b cos kφ) sin kt
    RadialShape s = *this;
    for (int k = 0; k < modes(); ++k) {
        const double c = std::cos((k + 1) * angle), sn = std::sin((k + 1) * angle);
        s.a[k] = a[k] * c - b[k] * sn;
        s.b[k] = a[k] * sn + b[k] * c;
    }
    return s;
}

std::pair<double, double> radial_eval(const RadialShape& s, double t) {
    double r = s.a0, dr = 0.0;
    for (int k = 1; k <= s.modes(); ++k) {
        const double c = std::cos(k * t), sn = std::sin(k * t);
        r += s.a[k - 1] * c + s.b[k - 1] * sn;
        dr += k * (s.b[k - 1] * c - s.a[k - 1] * sn);
    }
    return {r, dr};
}

double min_radius(const RadialShape& s) {
    double m = radial_eval(s, 0.0).first;
    for (int i = 1; i < kRadialGrid; ++i)
        m = std::min(m, radial_eval(s, grid_t(i)).first);
    return m;
}

void validate_shape(const RadialShape& s) {
    if (s.a.size() != s.b.size())
        throw DimensionMismatch("cosine and sine coefficient lists differ in length");
    const double m = min_radius(s);
    if (!(m > kMinRadius))
        throw NonPositiveRadius("radial function drops to " + std::to_string(m) + " (minimum 1e-3)");
}

double shape_area(const RadialShape& s) {
    double acc = 0.0;
    for (int i = 0; i < kRadialGrid; ++i) {
        const double r = radial_eval(s, grid_t(i)).first;
        acc += r * r;
    }
    return 0.5 * acc * kTwoPi / kRadialGrid;
}

double shape_perimeter(const RadialShape& s) {
    double acc = 0.0;
    for (int i = 0; i < kRadialGrid; ++i) {
        const auto [r, dr] = radial_eval(s, grid_t(i));
        acc += std::hypot(r, dr);
    }
    return acc * kTwoPi / kRadialGrid;
}

double isoperimetric_ratio(const RadialShape& s) {
    const double p = shape_perimeter(s);
    return p * p / (4.0 * std::numbers::pi * shape_area(s));
}

double boundary_vn(const RadialShape& s, double t) {
    const auto [r, dr] = radial_eval(s, t);
    return r / std::hypot(r, dr);
}

Eigen::VectorXd fourier_gradient(const RadialShape& s, const TriMesh& mesh,
                                 const std::vector<double>& boundary_values) {
    const std::size_t nb = mesh.boundary_nodes.size();
    if (boundary_values.size() != nb || mesh.boundary_angle.size() != nb)
        throw DimensionMismatch("boundary values do not match the mesh boundary");
    const int n = s.modes();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(2 * n + 1);

    // Nodal integrand G * v_n, then trapezoid along each boundary edge of
    // (G v_n) * basis(t).
    std::vector<double> gv(nb);
    for (std::size_t i = 0; i < nb; ++i)
        gv[i] = boundary_values[i] * boundary_vn(s, mesh.boundary_angle[i]);

    for (std::size_t e = 0; e < nb; ++e) {
        const std::size_t f = (e + 1) % nb;
        const double len = distance(mesh.nodes[mesh.boundary_nodes[e]], mesh.nodes[mesh.boundary_nodes[f]]);
        const double te = mesh.boundary_angle[e], tf = mesh.boundary_angle[f];
        grad[0] += 0.5 * len * (gv[e] + gv[f]);
        for (int k = 1; k <= n; ++k) {
            grad[k] += 0.5 * len * (gv[e] * std::cos(k * te) + gv[f] * std::cos(k * tf));
            grad[n + k] += 0.5 * len * (gv[e] * std::sin(k * te) + gv[f] * std::sin(k * tf));
        }
    }
    return grad;
}

RadialShape volume_project(const RadialShape& s, double target_area) {
    const double area = shape_area(s);
    if (!(area > 0.0) || !(target_area > 0.0))
        throw NonPositiveRadius("cannot rescale a shape of non-positive area");
    const double f = std::sqrt(target_area / area);
    RadialShape out = s;
    out.a0 *= f;
    for (auto& v : out.a) v *= f;
    for (auto& v : out.b) v *= f;
    validate_shape(out);
    return out;
}

} // namespace partopt
