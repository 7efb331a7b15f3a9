// Serial reference kernels against their OpenMP counterparts.
// Argument: mesh size h in units of 1e-3 (disk of radius 1).
#include "partopt/kernels.hpp"
#include "partopt/mesh.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <random>

using namespace partopt;

namespace {

const TriMesh& disk_mesh(int h_milli) {
    static std::map<int, TriMesh> cache;
    auto it = cache.find(h_milli);
    if (it == cache.end()) it = cache.emplace(h_milli, mesh_from_radial(RadialShape::disk(), h_milli * 1e-3)).first;
    return it->second;
}

Eigen::VectorXd random_vector(Eigen::Index n) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    Eigen::VectorXd v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

template <bool Parallel>
void BM_Assemble(benchmark::State& st) {
    const TriMesh& m = disk_mesh(static_cast<int>(st.range(0)));
    for (auto _ : st) {
        auto K = Parallel ? kernels::parallel::assemble(m, kernels::Operator::Stiffness)
                          : kernels::serial::assemble(m, kernels::Operator::Stiffness);
        benchmark::DoNotOptimize(K.val.data());
    }
    st.counters["nodes"] = static_cast<double>(m.num_nodes());
}

template <bool Parallel>
void BM_Spmv(benchmark::State& st) {
    const TriMesh& m = disk_mesh(static_cast<int>(st.range(0)));
    const SparseMatrix K = kernels::serial::assemble(m, kernels::Operator::Stiffness);
    const Eigen::VectorXd x = random_vector(K.n);
    Eigen::VectorXd y(K.n);
    for (auto _ : st) {
        if (Parallel) kernels::parallel::spmv(K, x.data(), y.data());
        else kernels::serial::spmv(K, x.data(), y.data());
        benchmark::DoNotOptimize(y.data());
    }
}

template <bool Parallel>
void BM_Dot(benchmark::State& st) {
    const Eigen::VectorXd x = random_vector(st.range(0)), y = random_vector(st.range(0));
    for (auto _ : st) {
        const double d = Parallel ? kernels::parallel::dot(x.data(), y.data(), x.size())
                                  : kernels::serial::dot(x.data(), y.data(), x.size());
        benchmark::DoNotOptimize(d);
    }
}

template <bool Parallel>
void BM_MMEnergy(benchmark::State& st) {
    const TriMesh& m = disk_mesh(static_cast<int>(st.range(0)));
    const SparseMatrix M = kernels::serial::assemble(m, kernels::Operator::Mass);
    const SparseMatrix K = kernels::serial::assemble(m, kernels::Operator::Stiffness);
    const Eigen::VectorXd u = random_vector(M.n);
    Eigen::VectorXd g;
    for (auto _ : st) {
        const double e = Parallel ? kernels::parallel::mm_energy(M, K, 0.05, u, &g)
                                  : kernels::serial::mm_energy(M, K, 0.05, u, &g);
        benchmark::DoNotOptimize(e);
    }
}

} // namespace

BENCHMARK(BM_Assemble<false>)->Name("assemble/serial")->Arg(25)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Assemble<true>)->Name("assemble/parallel")->Arg(25)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spmv<false>)->Name("spmv/serial")->Arg(25)->Arg(10)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Spmv<true>)->Name("spmv/parallel")->Arg(25)->Arg(10)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Dot<false>)->Name("dot/serial")->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Dot<true>)->Name("dot/parallel")->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MMEnergy<false>)->Name("mm_energy/serial")->Arg(25)->Arg(10)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MMEnergy<true>)->Name("mm_energy/parallel")->Arg(25)->Arg(10)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
