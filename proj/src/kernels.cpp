#include "partopt/kernels.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace partopt::kernels {

std::array<std::array<double, 3>, 3> element_matrix(Point2 a, Point2 b, Point2 c, Operator op) {
    const double area = 0.5 * cross(b - a, c - a);
    std::array<std::array<double, 3>, 3> E{};
    if (op == Operator::Mass) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                E[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
        return E;
    }
    const std::array<Point2, 3> p{a, b, c};
    std::array<double, 3> gx{}, gy{};
    for (int i = 0; i < 3; ++i) {
        const Point2 pj = p[(i + 1) % 3], pk = p[(i + 2) % 3];
        gx[i] = pj.y - pk.y;
        gy[i] = pk.x - pj.x;
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            E[i][j] = (gx[i] * gx[j] + gy[i] * gy[j]) / (4.0 * area);
    return E;
}

namespace {

constexpr std::size_t kBlock = 4096;

double mm_energy_impl(const SparseMatrix& M, const SparseMatrix& K, double eps, const Eigen::VectorXd& u,
                      Eigen::VectorXd* grad,
                      void (*mv)(const SparseMatrix&, const double*, double*),
                      double (*dt)(const double*, const double*, std::size_t)) {
    const std::size_t n = static_cast<std::size_t>(u.size());
    Eigen::VectorXd Ku(n), v(n), Mv(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = u[i] * (1.0 - u[i]);
    mv(K, u.data(), Ku.data());
    mv(M, v.data(), Mv.data());
    const double e = eps * dt(u.data(), Ku.data(), n) + dt(v.data(), Mv.data(), n) / eps;
    if (grad) {
        grad->resize(n);
        for (std::size_t i = 0; i < n; ++i)
            (*grad)[i] = 2.0 * eps * Ku[i] + (2.0 / eps) * Mv[i] * (1.0 - 2.0 * u[i]);
    }
    return e;
}

} // namespace

namespace serial {

SparseMatrix assemble(const TriMesh& mesh, Operator op) {
    const int n = static_cast<int>(mesh.num_nodes());
    std::vector<std::map<int, double>> rows(n);
    for (const auto& T : mesh.triangles) {
        const auto E = element_matrix(mesh.nodes[T[0]], mesh.nodes[T[1]], mesh.nodes[T[2]], op);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                rows[T[i]][T[j]] += E[i][j];
    }
    SparseMatrix A;
    A.n = n;
    A.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
        for (const auto& [c, v] : rows[i]) {
            A.col.push_back(c);
            A.val.push_back(v);
        }
        A.row_ptr[i + 1] = static_cast<int>(A.col.size());
    }
    return A;
}

void spmv(const SparseMatrix& A, const double* x, double* y) {
    for (int i = 0; i < A.n; ++i) {
        double s = 0.0;
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            s += A.val[k] * x[A.col[k]];
        y[i] = s;
    }
}

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += x[i] * y[i];
    return s;
}

double mm_energy(const SparseMatrix& M, const SparseMatrix& K, double eps, const Eigen::VectorXd& u,
                 Eigen::VectorXd* grad) {
    return mm_energy_impl(M, K, eps, u, grad, &serial::spmv, &serial::dot);
}

} // namespace serial

namespace parallel {

SparseMatrix assemble(const TriMesh& mesh, Operator op) {
    const int n = static_cast<int>(mesh.num_nodes());
    const long long nt = static_cast<long long>(mesh.triangles.size());
    struct Entry {
        int row, col;
        double val;
    };
    std::vector<Entry> trip(static_cast<std::size_t>(nt) * 9);

#pragma omp parallel for schedule(static)
    for (long long t = 0; t < nt; ++t) {
        const auto& T = mesh.triangles[t];
        const auto E = element_matrix(mesh.nodes[T[0]], mesh.nodes[T[1]], mesh.nodes[T[2]], op);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip[9 * t + 3 * i + j] = {T[i], T[j], E[i][j]};
    }

    // Stable counting sort by row keeps triangle order inside each row.
    std::vector<int> start(n + 1, 0);
    for (const auto& e : trip) ++start[e.row + 1];
    std::partial_sum(start.begin(), start.end(), start.begin());
    std::vector<Entry> by_row(trip.size());
    {
        std::vector<int> fill(start.begin(), start.end() - 1);
        for (const auto& e : trip) by_row[fill[e.row]++] = e;
    }

    std::vector<int> unique_count(n, 0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        auto first = by_row.begin() + start[i], last = by_row.begin() + start[i + 1];
        std::stable_sort(first, last, [](const Entry& a, const Entry& b) { return a.col < b.col; });
        int u = 0;
        for (auto it = first; it != last; ++it)
            if (it == first || it->col != (it - 1)->col) ++u;
        unique_count[i] = u;
    }

    SparseMatrix A;
    A.n = n;
    A.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) A.row_ptr[i + 1] = A.row_ptr[i] + unique_count[i];
    A.col.resize(A.row_ptr[n]);
    A.val.resize(A.row_ptr[n]);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        int k = A.row_ptr[i] - 1;
        for (int e = start[i]; e < start[i + 1]; ++e) {
            if (e == start[i] || by_row[e].col != by_row[e - 1].col) {
                ++k;
                A.col[k] = by_row[e].col;
                A.val[k] = 0.0;
            }
            A.val[k] += by_row[e].val;
        }
    }
    return A;
}

void spmv(const SparseMatrix& A, const double* x, double* y) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < A.n; ++i) {
        double s = 0.0;
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            s += A.val[k] * x[A.col[k]];
        y[i] = s;
    }
}

double dot(const double* x, const double* y, std::size_t n) {
    const long long nb = static_cast<long long>((n + kBlock - 1) / kBlock);
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < nb; ++b) {
        const std::size_t lo = b * kBlock, hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            s += x[i] * y[i];
        partial[b] = s;
    }
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

double mm_energy(const SparseMatrix& M, const SparseMatrix& K, double eps, const Eigen::VectorXd& u,
                 Eigen::VectorXd* grad) {
    return mm_energy_impl(M, K, eps, u, grad, &parallel::spmv, &parallel::dot);
}

} // namespace parallel

} // namespace partopt::kernels
