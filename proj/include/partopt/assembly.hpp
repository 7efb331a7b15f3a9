#pragma once

#include "partopt/mesh.hpp"

#include <Eigen/Core>

#include <vector>

namespace partopt {

/// Square matrix in compressed sparse row form; columns sorted within a row.
struct SparseMatrix {
    int n = 0;
    std::vector<int> row_ptr{0};
    std::vector<int> col;
    std::vector<double> val;

    std::size_t nonzeros() const { return val.size(); }
    double coeff(int i, int j) const;
    Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;
    /// A e.
    Eigen::VectorXd row_sums() const;
    /// max |A_ij - A_ji|.
    double max_asymmetry() const;
    Eigen::MatrixXd to_dense() const;
};

/// Exact P1 mass matrix (∫ φ_i φ_j).
SparseMatrix assemble_mass(const TriMesh& mesh);
/// Exact P1 stiffness matrix (∫ ∇φ_i · ∇φ_j).
SparseMatrix assemble_stiffness(const TriMesh& mesh);

/// ∫_{∂Ω} f g ds, trapezoid rule on each boundary edge.
double boundary_integral(const TriMesh& mesh, const Eigen::VectorXd& f, const Eigen::VectorXd& g);

/// Mass matrix, stiffness matrix and lumped mass vector m = M e of a mesh.
struct FemSystem {
    SparseMatrix M;
    SparseMatrix K;
    Eigen::VectorXd m;

    static FemSystem build(const TriMesh& mesh);
};

} // namespace partopt
