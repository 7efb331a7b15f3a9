#pragma once

#include "partopt/geom2d.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace partopt {

/// Delaunay triangulation by incremental Bowyer-Watson insertion. Points are
/// inserted in a shuffled order drawn from `shuffle_seed`, so the output is a
/// deterministic function of the input. Triangles are counter-clockwise and
/// index into the input span. Co-circular quadruples yield one of the valid
/// diagonals. Fully collinear input produces no triangles.
std::vector<std::array<int, 3>> delaunay_triangulate(std::span<const Point2> points,
                                                     std::uint64_t shuffle_seed = 0x9e3779b97f4a7c15ULL);

} // namespace partopt
