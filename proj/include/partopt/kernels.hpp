#pragma once

#include "partopt/assembly.hpp"

#include <Eigen/Core>

#include <array>

namespace partopt::kernels {

enum class Operator { Mass, Stiffness };

/// Element matrix of one triangle.
std::array<std::array<double, 3>, 3> element_matrix(Point2 a, Point2 b, Point2 c, Operator op);

/// Straightforward single-threaded versions, kept as the reference the
/// OpenMP kernels are tested against.
namespace serial {
SparseMatrix assemble(const TriMesh& mesh, Operator op);
void spmv(const SparseMatrix& A, const double* x, double* y);
double dot(const double* x, const double* y, std::size_t n);
/// ε uᵀKu + (1/ε) vᵀMv with v = u(1-u); gradient written to `grad` when non-null.
double mm_energy(const SparseMatrix& M, const SparseMatrix& K, double eps, const Eigen::VectorXd& u,
                 Eigen::VectorXd* grad);
} // namespace serial

/// OpenMP versions. Results do not depend on the thread count: assembly
/// reduces each nonzero in triangle order and dot products sum fixed blocks
/// in a fixed order.
namespace parallel {
SparseMatrix assemble(const TriMesh& mesh, Operator op);
void spmv(const SparseMatrix& A, const double* x, double* y);
double dot(const double* x, const double* y, std::size_t n);
double mm_energy(const SparseMatrix& M, const SparseMatrix& K, double eps, const Eigen::VectorXd& u,
                 Eigen::VectorXd* grad);
} // namespace parallel

} // namespace partopt::kernels
