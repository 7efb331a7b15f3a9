#include "partopt/assembly.hpp"

#include "partopt/errors.hpp"
#include "partopt/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace partopt {

double SparseMatrix::coeff(int i, int j) const {
    const auto first = col.begin() + row_ptr[i], last = col.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(first, last, j);
    return (it != last && *it == j) ? val[it - col.begin()] : 0.0;
}

Eigen::VectorXd SparseMatrix::operator*(const Eigen::VectorXd& x) const {
    if (x.size() != n)
        throw DimensionMismatch("matrix-vector product with a vector of the wrong length");
    Eigen::VectorXd y(n);
    kernels::parallel::spmv(*this, x.data(), y.data());
    return y;
}

Eigen::VectorXd SparseMatrix::row_sums() const {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            s[i] += val[k];
    return s;
}

double SparseMatrix::max_asymmetry() const {
    double m = 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            m = std::max(m, std::abs(val[k] - coeff(col[k], i)));
    return m;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            D(i, col[k]) = val[k];
    return D;
}

SparseMatrix assemble_mass(const TriMesh& mesh) {
    return kernels::parallel::assemble(mesh, kernels::Operator::Mass);
}

SparseMatrix assemble_stiffness(const TriMesh& mesh) {
    return kernels::parallel::assemble(mesh, kernels::Operator::Stiffness);
}

double boundary_integral(const TriMesh& mesh, const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
    const auto N = static_cast<Eigen::Index>(mesh.num_nodes());
    if (f.size() != N || g.size() != N)
        throw DimensionMismatch("boundary_integral expects nodal vectors");
    double s = 0.0;
    for (const auto& e : mesh.boundary_edges) {
        const double len = distance(mesh.nodes[e[0]], mesh.nodes[e[1]]);
        s += 0.5 * len * (f[e[0]] * g[e[0]] + f[e[1]] * g[e[1]]);
    }
    return s;
}

FemSystem FemSystem::build(const TriMesh& mesh) {
    FemSystem s;
    s.M = assemble_mass(mesh);
    s.K = assemble_stiffness(mesh);
    s.m = s.M.row_sums();
    return s;
}

} // namespace partopt
