#pragma once

#include "partopt/capacity.hpp"
#include "partopt/mesh.hpp"
#include "partopt/phase_field.hpp"
#include "partopt/radial_shape.hpp"

#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace partopt {

struct FlowConfig {
    int niter = 150;
    double alpha0 = 0.05;
    int nmod = 30;              ///< the step is halved every nmod iterations
    double epsilon = 0.05;
    double h = -1.0;            ///< <= 0 selects epsilon / 2
    int modes = 8;              ///< Fourier modes N
    /// One entry c for the single-phase problem (a set of fraction c),
    /// n >= 2 entries summing to 1 for a partition.
    std::vector<double> fractions{0.5};
    std::uint64_t seed = 0;
    int restarts = 4;           ///< fresh initializations per re-initialization
    int reinit_every = 25;      ///< fresh initialization period (0 disables)
    /// Extra warm starts per iteration: the previous minimizer rotated by
    /// 2πk/rotations, k = 1..rotations-1 (0 or 1 disables).
    /// Single phase only.
    int rotations = 6;
    double target_area = std::numbers::pi;
    std::size_t node_cap = kDefaultNodeCap;
    MinimizeOptions inner{};
    CapacityMode voronoi_mode = CapacityMode::MinPerimeter;
    bool multiplier_term = false; ///< add -sum mu_i (u_i - c_i) to the boundary density

    bool single_phase() const { return fractions.size() == 1; }
    double mesh_size() const { return h > 0.0 ? h : 0.5 * epsilon; }
    /// Throws ValidationError.
    void validate() const;
};

struct FlowRecord {
    int iteration = 0;
    Eigen::VectorXd coefficients;  ///< shape used at this iteration
    double cost = 0.0;             ///< minimized relaxed energy
    double alpha = 0.0;
    int inner_iterations = 0;
    bool converged = false;
    bool reinitialized = false;    ///< fresh initialization won over the warm start
    std::size_t nodes = 0;
    MeshQuality quality;
    double isoperimetric = 0.0;
    double gradient_norm = 0.0;    ///< |∂j/∂(coefficients)|
};

struct FlowTrace {
    std::vector<FlowRecord> records;
    bool aborted = false;
    std::string abort_reason;
};

struct FlowResult {
    RadialShape shape;      ///< final shape (after the last ascent step)
    FlowTrace trace;
    TriMesh mesh;           ///< mesh of the last evaluated shape
    Fields fields;          ///< minimizer on that mesh
};

/// Called once per iteration with the record, the mesh and the minimizing fields.
using FlowProgress = std::function<void(const FlowRecord&, const TriMesh&, const Fields&)>;

/// Inner problem on a fixed shape: minimized energy and fields.
struct InnerSolve {
    MinimizeResult result;
    bool fresh = false;
};

/// Minimizes the relaxed energy on `mesh` from fresh initializations
/// (random fields for n <= 4, Voronoi otherwise; best of `restarts`).
InnerSolve solve_fresh(const TriMesh& mesh, const FemSystem& fem, const FlowConfig& cfg, std::uint64_t seed);
/// Minimizes from a warm start transferred from another mesh, rotated by
/// `angle` in reference coordinates.
InnerSolve solve_warm(const TriMesh& mesh, const FemSystem& fem, const FlowConfig& cfg, const TriMesh& prev_mesh,
                      const Fields& prev_fields, double angle = 0.0);

/// Fixed-step ascent of the minimal relaxed energy over shapes of area
/// target_area. Inner failures are recorded and the flow continues;
/// MeshTooFine or NonPositiveRadius end the flow with a partial trace.
FlowResult gradient_flow(const FlowConfig& cfg, const RadialShape& shape0, const FlowProgress& progress = {});

/// Standard deviation over mean of the cost in the last `window` records.
double relative_spread(const FlowTrace& t, int window);
/// Means of consecutive windows of `window` records.
std::vector<double> window_means(const FlowTrace& t, int window);

} // namespace partopt
