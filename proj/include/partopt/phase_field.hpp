#pragma once

#include "partopt/assembly.hpp"
#include "partopt/errors.hpp"
#include "partopt/mesh.hpp"
#include "partopt/optim.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace partopt {

using Field = Eigen::VectorXd;
using Fields = std::vector<Eigen::VectorXd>;

/// Modica-Mortola parameters. The well is fixed to W(s) = s^2 (1-s)^2,
/// for which the perimeter factor is gamma = 2 ∫_0^1 sqrt(W) = 1/3.
struct MMParams {
    double epsilon = 0.05;

    static constexpr double gamma = 1.0 / 3.0;
    static double W(double s) { return s * s * (1.0 - s) * (1.0 - s); }

    /// Throws ValidationError unless epsilon > 0.
    void validate() const;
};

/// ε uᵀKu + (1/ε) vᵀMv with v_j = u_j (1 - u_j).
double energy_single(const Field& u, const SparseMatrix& M, const SparseMatrix& K, const MMParams& p);
/// 2ε K u + (2/ε) (M v) ⊙ (1 - 2u).
Field grad_single(const Field& u, const SparseMatrix& M, const SparseMatrix& K, const MMParams& p);

double energy_multi(const Fields& us, const SparseMatrix& M, const SparseMatrix& K, const MMParams& p);
Fields grad_multi(const Fields& us, const SparseMatrix& M, const SparseMatrix& K, const MMParams& p);

/// u + α m with α = (target - u·m) / (m·m), so that the result integrates
/// to `target` under the lumped quadrature ∫f = f·m.
Field project_single(const Field& u, const Field& m, double target);
/// Gradient variant: removes the component along m (target increment 0).
Field project_gradient_single(const Field& g, const Field& m);

/// Orthogonal projection of per-phase gradients onto
/// {∫g_i = 0 for every i, Σ_i g_i = 0 at every node}.
Fields project_gradient_multi(const Fields& gs, const Field& m);

inline constexpr double kWeightFloor = 1e-8;

/// One linear step of the weighted projection: u_i += (λ + μ_i) w_i with
/// w_i = sqrt(2 W(u_i)). No clamping. Weights are floored (kWeightFloor)
/// where a node or a phase violates feasibility without interfacial
/// support. Throws SingularSystem when the reduced system has condition
/// number above 1e12.
Fields project_multi_step(const Fields& us, const Field& m, const std::vector<double>& targets);

struct ProjectionReport {
    int iterations = 0;
    double integral_residual = 0.0; ///< max_i |∫u_i - target_i|
    double sum_residual = 0.0;      ///< max_node |Σ_i u_i - 1|
};

/// Repeats projection and clamping to [0,1] until both residuals are
/// <= 1e-8 (and as small as the iteration allows). Throws
/// InfeasibleAtPureNodes when nodes without interfacial weight stay
/// infeasible, NotConverged otherwise on failure.
Fields project_multi(const Fields& us, const Field& m, const std::vector<double>& targets,
                     ProjectionReport* report = nullptr);

ProjectionReport constraint_residuals(const Fields& us, const Field& m, const std::vector<double>& targets);

struct MinimizeOptions {
    double tol_g = -1.0; ///< <= 0 selects 1e-6 * sqrt(number of unknowns)
    int max_iter = 2000;
    int memory = 10;
    bool throw_on_failure = false;
};

struct MinimizeResult {
    Fields fields;
    double energy = 0.0;
    SolveReport report;
    std::vector<double> residual_history; ///< constraint residual per accepted iterate
    double final_residual = 0.0;
};

/// Raised by the minimizers when `throw_on_failure` is set; carries the
/// best iterate.
class MinimizeNotConverged : public NotConverged {
public:
    MinimizeNotConverged(const std::string& what, MinimizeResult best)
        : NotConverged(what, best.report.iterations, best.report.gradient_norm), best_(std::move(best)) {}
    const MinimizeResult& best() const { return best_; }

private:
    MinimizeResult best_;
};

/// Projected-gradient LBFGS on energy_single restricted to u·m = target.
/// At termination values are truncated to [0,1] and re-projected.
MinimizeResult minimize_single(const Field& u0, const FemSystem& fem, const MMParams& p, double target,
                               const MinimizeOptions& opt = {});

/// Projected-gradient LBFGS on energy_multi restricted to ∫u_i = targets_i,
/// Σ u_i = 1.
MinimizeResult minimize_multi(const Fields& us0, const FemSystem& fem, const MMParams& p,
                              const std::vector<double>& targets, const MinimizeOptions& opt = {});

/// Smoothed random fields projected onto the constraint set (n >= 1 phases).
Fields random_feasible_fields(const TriMesh& mesh, const FemSystem& fem, const std::vector<double>& targets,
                              std::uint64_t seed);

/// Laplacian smoothing passes x <- (x + mean of neighbours)/2 on the mesh graph.
Field smooth_field(const TriMesh& mesh, const Field& u, int passes);

struct ShapeGradientDensity {
    std::vector<double> values;  ///< aligned with mesh.boundary_nodes
    bool not_a_minimizer = false; ///< projected gradient norm above 10 tol_g
    double projected_gradient_norm = 0.0;
};

/// 𝒢 = Σ_i (ε|∇u_i|² + W(u_i)/ε) at the boundary nodes, with gradients
/// recovered to nodes by area-weighted averaging. A single field is treated
/// as the one-phase problem. With `include_multiplier` the volume term
/// -Σ_i μ_i (u_i - c_i) is added, μ_i being the multiplier of ∫u_i = c_i|Ω|
/// read off the discrete gradient and c_i the phase fraction.
ShapeGradientDensity shape_gradient_density(const Fields& us, const TriMesh& mesh, const FemSystem& fem,
                                            const MMParams& p, double tol_g = -1.0,
                                            bool include_multiplier = false);

} // namespace partopt
