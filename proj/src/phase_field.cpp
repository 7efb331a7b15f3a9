#include "partopt/phase_field.hpp"

#include "partopt/kernels.hpp"

#include <cmath>

namespace partopt {

void MMParams::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw ValidationError("epsilon must be positive");
}

namespace {
void check_size(const Field& u, const SparseMatrix& M, const SparseMatrix& K) {
    if (u.size() != M.n || u.size() != K.n)
        throw DimensionMismatch("field length does not match the finite-element matrices");
}
} // namespace

double energy_single(const Field& u, const SparseMatrix& M, const SparseMatrix& K, const MMParams& p) {
    check_size(u, M, K);
    return kernels::parallel::mm_energy(M, K, p.epsilon, u, nullptr);
}

Field grad_single(const Field& u, const SparseMatrix& M, const SparseMatrix& K, const MMParams& p) {
    check_size(u, M, K);
    Field g;
    kernels::parallel::mm_energy(M, K, p.epsilon, u, &g);
    return g;
}

double energy_multi(const Fields& us, const SparseMatrix& M, const SparseMatrix& K, const MMParams& p) {
    double e = 0.0;
    for (const auto& u : us)
        e += energy_single(u, M, K, p);
    return e;
}

Fields grad_multi(const Fields& us, const SparseMatrix& M, const SparseMatrix& K, const MMParams& p) {
    Fields g;
    g.reserve(us.size());
    for (const auto& u : us)
        g.push_back(grad_single(u, M, K, p));
    return g;
}

Field smooth_field(const TriMesh& mesh, const Field& u, int passes) {
    const std::size_t N = mesh.num_nodes();
    std::vector<std::vector<int>> nb(N);
    for (const auto& T : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            nb[T[k]].push_back(T[(k + 1) % 3]);
            nb[T[k]].push_back(T[(k + 2) % 3]);
        }
    Field cur = u, next(u.size());
    for (int it = 0; it < passes; ++it) {
        for (std::size_t i = 0; i < N; ++i) {
            double s = 0.0;
            for (int j : nb[i]) s += cur[j];
            next[i] = nb[i].empty() ? cur[i] : 0.5 * (cur[i] + s / nb[i].size());
        }
        cur.swap(next);
    }
    return cur;
}

ShapeGradientDensity shape_gradient_density(const Fields& us, const TriMesh& mesh, const FemSystem& fem,
                                            const MMParams& p, double tol_g, bool include_multiplier) {
    p.validate();
    const std::size_t N = mesh.num_nodes();
    for (const auto& u : us)
        if (static_cast<std::size_t>(u.size()) != N)
            throw DimensionMismatch("field length does not match the mesh");

    ShapeGradientDensity out;
    const std::size_t unknowns = N * us.size();
    if (tol_g <= 0.0) tol_g = 1e-6 * std::sqrt(static_cast<double>(unknowns));
    if (us.size() == 1) {
        out.projected_gradient_norm = project_gradient_single(grad_single(us[0], fem.M, fem.K, p), fem.m).norm();
    } else {
        double s = 0.0;
        for (const auto& g : project_gradient_multi(grad_multi(us, fem.M, fem.K, p), fem.m))
            s += g.squaredNorm();
        out.projected_gradient_norm = std::sqrt(s);
    }
    out.not_a_minimizer = out.projected_gradient_norm > 10.0 * tol_g;

    // Per-triangle gradients, area-weighted onto the boundary nodes.
    std::vector<char> on_boundary(N, 0);
    for (int b : mesh.boundary_nodes) on_boundary[b] = 1;
    std::vector<double> weight(N, 0.0);
    std::vector<std::vector<Point2>> grad_acc(us.size(), std::vector<Point2>(N));
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& T = mesh.triangles[t];
        if (!on_boundary[T[0]] && !on_boundary[T[1]] && !on_boundary[T[2]])
            continue;
        const Point2 a = mesh.nodes[T[0]], b = mesh.nodes[T[1]], c = mesh.nodes[T[2]];
        const double area2 = cross(b - a, c - a);
        const std::array<Point2, 3> pts{a, b, c};
        for (std::size_t i = 0; i < us.size(); ++i) {
            Point2 g;
            for (int k = 0; k < 3; ++k) {
                const Point2 pj = pts[(k + 1) % 3], pk = pts[(k + 2) % 3];
                g += us[i][T[k]] * Point2(pj.y - pk.y, pk.x - pj.x);
            }
            g = g / area2;
            for (int k = 0; k < 3; ++k)
                if (on_boundary[T[k]])
                    grad_acc[i][T[k]] += 0.5 * area2 * g;
        }
        for (int k = 0; k < 3; ++k)
            if (on_boundary[T[k]])
                weight[T[k]] += 0.5 * area2;
    }

    // Volume multipliers and the matching fractions, used by the optional
    // -sum mu_i (u_i - c_i) term.
    std::vector<double> mu(us.size(), 0.0), frac(us.size(), 0.0);
    if (include_multiplier) {
        const double mm = fem.m.squaredNorm();
        const double area = fem.m.sum();
        if (us.size() == 1) {
            mu[0] = grad_single(us[0], fem.M, fem.K, p).dot(fem.m) / mm;
            frac[0] = us[0].dot(fem.m) / area;
        } else {
            const Fields g = grad_multi(us, fem.M, fem.K, p);
            Eigen::VectorXd gbar = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
            for (const auto& gi : g) gbar += gi;
            gbar /= static_cast<double>(us.size());
            for (std::size_t i = 0; i < us.size(); ++i) {
                mu[i] = (g[i] - gbar).dot(fem.m) / mm;
                frac[i] = us[i].dot(fem.m) / area;
            }
        }
    }

    out.values.resize(mesh.boundary_nodes.size());
    for (std::size_t k = 0; k < mesh.boundary_nodes.size(); ++k) {
        const int node = mesh.boundary_nodes[k];
        double G = 0.0;
        for (std::size_t i = 0; i < us.size(); ++i) {
            const Point2 g = grad_acc[i][node] / weight[node];
            G += p.epsilon * norm2(g) + MMParams::W(us[i][node]) / p.epsilon;
            G -= mu[i] * (us[i][node] - frac[i]);
        }
        out.values[k] = G;
    }
    return out;
}

} // namespace partopt
