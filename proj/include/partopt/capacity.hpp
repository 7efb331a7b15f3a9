#pragma once

#include "partopt/assembly.hpp"
#include "partopt/mesh.hpp"
#include "partopt/phase_field.hpp"
#include "partopt/voronoi.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace partopt {

enum class CapacityMode { AreasOnly, MinPerimeter, LloydConstrained };

CapacityMode parse_capacity_mode(const std::string& s);
std::string to_string(CapacityMode m);

struct CapacityOptions {
    int lloyd_steps = 5;
    int max_retries = 5;          ///< random perturbations after a non-smooth configuration
    std::uint64_t seed = 0;       ///< drives the perturbations
    double residual_tol = 1e-6;   ///< relative to |Ω|
    int max_outer = 30;
};

struct CapacityResult {
    std::vector<Point2> points;
    std::vector<double> areas;
    double max_residual = 0.0; ///< max_i |A_i - targets_i|
    double objective = 0.0;    ///< value of the mode's objective at `points`
    int iterations = 0;
    int retries = 0;
};

/// Moves the sites until the clipped cells meet their area targets,
/// optionally minimizing total perimeter or the Lloyd energy on the way.
/// Always preceded by `lloyd_steps` Lloyd iterations. Throws NotConverged
/// when the residual stays above residual_tol * |Ω|.
CapacityResult solve_capacity_constrained(std::span<const Point2> points0, const Polygon& omega,
                                          std::span<const double> targets, CapacityMode mode,
                                          const CapacityOptions& opt = {});

/// Uniform samples inside a polygon (rejection from its bounding box).
std::vector<Point2> sample_points(const Polygon& omega, int n, std::uint64_t seed);

/// Convex hull (counter-clockwise) of a point set.
Polygon convex_hull(std::span<const Point2> pts);

struct InitializationResult {
    Fields fields;
    std::vector<Point2> points;
    double total_perimeter = 0.0;
    int restart = -1;             ///< index of the selected restart
    int failed_restarts = 0;
};

/// Capacity-constrained Voronoi initialization of an n-phase density.
/// `fractions` sum to 1. Each restart r draws sites with seed + r, runs the
/// constrained solve in `mode` on the convex hull of the mesh boundary, and
/// the least total perimeter wins (ties to the lowest r). Cells are
/// rasterized to nodal indicators, smoothed by `smoothing_passes` graph
/// Laplacian passes to give the projection interfacial support, then
/// projected onto the constraints.
InitializationResult generate_initialization(const TriMesh& mesh, const FemSystem& fem,
                                             const std::vector<double>& fractions, int restarts,
                                             std::uint64_t seed, CapacityMode mode = CapacityMode::MinPerimeter,
                                             int smoothing_passes = 3);

} // namespace partopt
