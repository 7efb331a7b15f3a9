#pragma once

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace partopt {

struct TriMesh;

/// Star-shaped domain {r <= rho(t)} with
/// rho(t) = a0 + sum_k (a[k-1] cos kt + b[k-1] sin kt).
struct RadialShape {
    double a0 = 1.0;
    std::vector<double> a;
    std::vector<double> b;

    RadialShape() = default;
    RadialShape(double a0_, std::vector<double> a_, std::vector<double> b_);
    static RadialShape disk(double radius = 1.0, int modes = 0);

    int modes() const { return static_cast<int>(a.size()); }
    /// Coefficient vector (a0, a1..aN, b1..bN).
    Eigen::VectorXd coefficients() const;
    static RadialShape from_coefficients(const Eigen::VectorXd& v);
    /// Rotation by `angle`: rho_new(t) = rho(t - angle).
    RadialShape rotated(double angle) const;
};

inline constexpr int kRadialGrid = 4096;
inline constexpr double kMinRadius = 1e-3;

/// (rho(t), rho'(t)).
std::pair<double, double> radial_eval(const RadialShape& s, double t);

/// Throws NonPositiveRadius unless rho > 1e-3 on the 4096-point grid.
void validate_shape(const RadialShape& s);
double min_radius(const RadialShape& s);

/// 1/2 ∫ rho^2 dt (trapezoid, 4096 samples).
double shape_area(const RadialShape& s);
/// ∫ sqrt(rho^2 + rho'^2) dt.
double shape_perimeter(const RadialShape& s);
/// Per^2 / (4 pi |Omega|); 1 for a disk.
double isoperimetric_ratio(const RadialShape& s);

/// r.n = rho / sqrt(rho^2 + rho'^2).
double boundary_vn(const RadialShape& s, double t);

/// Shape gradient in coefficient space, ∫_{∂Ω} G cos(kt) v_n and
/// ∫_{∂Ω} G sin(kt) v_n, with G given at the boundary nodes of `mesh`
/// (aligned with mesh.boundary_nodes) and t the recorded boundary angle.
Eigen::VectorXd fourier_gradient(const RadialShape& s, const TriMesh& mesh, const std::vector<double>& boundary_values);

/// Homothety onto area `target_area`. Throws NonPositiveRadius.
RadialShape volume_project(const RadialShape& s, double target_area);

} // namespace partopt
