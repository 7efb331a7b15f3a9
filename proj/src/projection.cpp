#include "partopt/phase_field.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace partopt {

Field project_single(const Field& u, const Field& m, double target) {
    if (u.size() != m.size())
        throw DimensionMismatch("field and lumped mass differ in length");
    const double alpha = (target - u.dot(m)) / m.squaredNorm();
    return u + alpha * m;
}

Field project_gradient_single(const Field& g, const Field& m) {
    return project_single(g, m, 0.0);
}

Fields project_gradient_multi(const Fields& gs, const Field& m) {
    const std::size_t n = gs.size();
    if (n == 0) return {};
    Field mean = Field::Zero(m.size());
    for (const auto& g : gs) mean += g;
    mean /= static_cast<double>(n);
    const double mm = m.squaredNorm();
    Fields out;
    out.reserve(n);
    for (const auto& g : gs) {
        Field h = g - mean;
        h -= (m.dot(h) / mm) * m;
        out.push_back(std::move(h));
    }
    return out;
}

ProjectionReport constraint_residuals(const Fields& us, const Field& m, const std::vector<double>& targets) {
    ProjectionReport r;
    Field sum = Field::Zero(m.size());
    for (std::size_t i = 0; i < us.size(); ++i) {
        r.integral_residual = std::max(r.integral_residual, std::abs(us[i].dot(m) - targets[i]));
        sum += us[i];
    }
    r.sum_residual = (sum.array() - 1.0).abs().maxCoeff();
    return r;
}

namespace {

void check_inputs(const Fields& us, const Field& m, const std::vector<double>& targets) {
    if (us.empty() || us.size() != targets.size())
        throw DimensionMismatch("number of fields and targets differ");
    for (const auto& u : us)
        if (u.size() != m.size())
            throw DimensionMismatch("field and lumped mass differ in length");
}

double weight(double s) { return std::sqrt(2.0 * MMParams::W(s)); }

} // namespace

Fields project_multi_step(const Fields& us, const Field& m, const std::vector<double>& targets) {
    check_inputs(us, m, targets);
    const std::size_t n = us.size();
    const Eigen::Index N = m.size();
    if (n == 1)
        return {Field::Ones(N)};

    const double area = m.sum();
    Eigen::MatrixXd w(N, n);
    for (std::size_t i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < N; ++k)
            w(k, i) = weight(us[i][k]);
    Field E = Field::Ones(N);
    for (const auto& u : us) E -= u;
    std::vector<double> F(n);
    for (std::size_t i = 0; i < n; ++i) F[i] = targets[i] - us[i].dot(m);

    // Floors: nodes infeasible without interfacial support, and phases
    // that miss their integral but have no interface at all.
    for (Eigen::Index k = 0; k < N; ++k)
        if (std::abs(E[k]) > 1e-6 && w.row(k).sum() < kWeightFloor)
            for (std::size_t i = 0; i < n; ++i) w(k, i) = std::max(w(k, i), kWeightFloor);
    for (std::size_t i = 0; i < n; ++i)
        if (w.col(i).dot(m) <= kWeightFloor * area && std::abs(F[i]) > 1e-6 * area)
            for (Eigen::Index k = 0; k < N; ++k) w(k, i) = std::max(w(k, i), kWeightFloor);

    const Field S = w.rowwise().sum();
    std::vector<double> Wint(n);
    std::vector<int> active;
    for (std::size_t i = 0; i < n; ++i) {
        Wint[i] = w.col(i).dot(m);
        if (Wint[i] > 0.0) active.push_back(static_cast<int>(i));
    }
    Fields out = us;
    if (active.empty())
        return out;
    const int na = static_cast<int>(active.size());

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(na, na);
    Field b = Field::Zero(na);
    for (Eigen::Index k = 0; k < N; ++k) {
        if (!(S[k] > 0.0)) continue;
        double corr = 0.0;
        for (int jj = 0; jj < na; ++jj) {
            const int j = active[jj];
            corr += F[j] * w(k, j) / Wint[j];
        }
        for (int ii = 0; ii < na; ++ii) {
            const int i = active[ii];
            const double wi = w(k, i);
            if (wi == 0.0) continue;
            b[ii] += m[k] * wi * (E[k] - corr) / S[k];
            for (int jj = 0; jj < na; ++jj) {
                const int j = active[jj];
                A(ii, jj) += m[k] * wi * w(k, j) / (Wint[j] * S[k]);
            }
        }
    }

    // One constraint is redundant: pin the last unknown to zero and drop
    // the last equation.
    Field lbar = Field::Zero(na);
    if (na > 1) {
        const Eigen::MatrixXd R = (Eigen::MatrixXd::Identity(na, na) - A).topLeftCorner(na - 1, na - 1);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double cond = sv[0] / sv[sv.size() - 1];
        if (!(cond <= 1e12))
            throw SingularSystem("projection system is ill-conditioned (condition estimate " +
                                 std::to_string(cond) + ")");
        lbar.head(na - 1) = svd.solve(b.head(na - 1));
    }

    std::vector<double> mu(n, 0.0);
    for (int ii = 0; ii < na; ++ii) {
        const int i = active[ii];
        mu[i] = (F[i] - lbar[ii]) / Wint[i];
    }
    for (Eigen::Index k = 0; k < N; ++k) {
        if (!(S[k] > 0.0)) continue;
        double s = E[k];
        for (int i : active) s -= mu[i] * w(k, i);
        const double lambda = s / S[k];
        for (int i : active)
            out[i][k] += (lambda + mu[i]) * w(k, i);
    }
    return out;
}

Fields project_multi(const Fields& us, const Field& m, const std::vector<double>& targets,
                     ProjectionReport* report) {
    check_inputs(us, m, targets);
    constexpr double kTol = 1e-8;
    const double tight = 1e-13 * std::max(1.0, m.sum());
    Fields cur = us;
    ProjectionReport r = constraint_residuals(cur, m, targets);
    int it = 0;
    double prev = std::max(r.integral_residual, r.sum_residual);
    for (; it < 100; ++it) {
        if (r.integral_residual <= tight && r.sum_residual <= 1e-13)
            break;
        Fields next = project_multi_step(cur, m, targets);
        for (auto& u : next) u = u.cwiseMax(0.0).cwiseMin(1.0);
        const ProjectionReport rn = constraint_residuals(next, m, targets);
        const double res = std::max(rn.integral_residual, rn.sum_residual);
        // Stop once feasible and no longer improving.
        if (prev <= kTol && res >= 0.5 * prev)
            break;
        cur = std::move(next);
        r = rn;
        prev = res;
    }
    r.iterations = it;
    if (report) *report = r;
    if (r.integral_residual > kTol || r.sum_residual > kTol) {
        Field S = Field::Zero(m.size()), E = Field::Ones(m.size());
        for (const auto& u : cur) {
            E -= u;
            for (Eigen::Index k = 0; k < m.size(); ++k) S[k] += weight(u[k]);
        }
        for (Eigen::Index k = 0; k < m.size(); ++k)
            if (S[k] == 0.0 && std::abs(E[k]) > kTol)
                throw InfeasibleAtPureNodes("nodal sum constraint violated at nodes without interfacial weight");
        throw NotConverged("multi-phase projection did not reach 1e-8", it,
                           std::max(r.integral_residual, r.sum_residual));
    }
    return cur;
}

} // namespace partopt
