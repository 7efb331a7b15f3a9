#pragma once

#include "partopt/geom2d.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace testing {

using partopt::Point2;

inline std::vector<Point2> random_points(int n, std::uint64_t seed, double lo = 0.05, double hi = 0.95) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<Point2> p;
    for (int i = 0; i < n; ++i) p.push_back({u(rng), u(rng)});
    return p;
}

inline partopt::Polygon unit_square() { return partopt::Polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

/// Central differences of a scalar function of a vector.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double h) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

/// Largest entrywise error relative to the largest entry of the reference
/// (entries near zero are judged on that scale).
inline double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref) {
    const double scale = std::max(ref.cwiseAbs().maxCoeff(), 1e-300);
    return (a - ref).cwiseAbs().maxCoeff() / scale;
}

} // namespace testing
