// Kernel timings: blockwise vs dense references, and serial (workers = 1)
// vs OpenMP paths of the population-level loops.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include <omp.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "fockforge/control.hpp"
#include "fockforge/dynamics.hpp"
#include "fockforge/gadam.hpp"
#include "fockforge/parallel.hpp"
#include "fockforge/robustness.hpp"

using namespace fockforge;

namespace {

JointState random_state(int ncut, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const FockCutoff c(ncut);
    Eigen::VectorXcd v(c.joint_dim());
    for (auto& x : v) x = cplx(nd(rng), nd(rng));
    return JointState(v.normalized(), c);
}

PulseSequence bench_sequence(int depth, int n) {
    PulseSequence s;
    for (int k = 0; k < depth; ++k) {
        s.taus.push_back(revival_time(n, 1, 1.0) / depth);
        s.betas.emplace_back(0.1 * (k + 1), -0.05 * k);
    }
    s.phi0 = 0.3;
    s.phi1 = 0.1;
    return s;
}

int max_workers() { return std::max(1, omp_get_max_threads()); }

void BM_JcBlockwise(benchmark::State& st) {
    const auto psi = random_state(static_cast<int>(st.range(0)), 1);
    const JCParams p{1.0, 0.3};
    for (auto _ : st) benchmark::DoNotOptimize(jc_propagate(psi, 1.7, p));
}

void BM_JcDenseExpm(benchmark::State& st) {
    const auto psi = random_state(static_cast<int>(st.range(0)), 1);
    const JCParams p{1.0, 0.3};
    for (auto _ : st) {
        const Eigen::VectorXcd out = jc_propagator_oracle(1.7, p, psi.cutoff) * psi.amplitudes;
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_DisplacementFactorized(benchmark::State& st) {
    const auto psi = random_state(static_cast<int>(st.range(0)), 2);
    for (auto _ : st) {
        auto out = psi;
        apply_displacement(cplx(0.8, 0.3), out);
        benchmark::DoNotOptimize(out.amplitudes.data());
    }
}

void BM_DisplacementDenseExpm(benchmark::State& st) {
    const int ncut = static_cast<int>(st.range(0));
    const auto psi = random_state(ncut, 2);
    const cplx beta(0.8, 0.3);
    const int m = displacement_working_dim(beta, psi.cutoff);
    for (auto _ : st) {
        Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(m, m);
        for (int n = 0; n + 1 < m; ++n) {
            g(n + 1, n) = beta * std::sqrt(n + 1.0);
            g(n, n + 1) = -std::conj(beta) * std::sqrt(n + 1.0);
        }
        const Eigen::MatrixXcd d = g.exp().topLeftCorner(ncut + 1, ncut + 1);
        const Eigen::MatrixXcd out =
            d * Eigen::Map<const Eigen::MatrixXcd>(psi.amplitudes.data(), ncut + 1, 2);
        benchmark::DoNotOptimize(out.data());
    }
}

// One generation's worth of fitness evaluations.
void population_eval(benchmark::State& st, int workers) {
    GAdamConfig cfg;
    const int n = 10, depth = 4;
    const SequenceLoss obj(Problem::make(n, depth, 1, JCParams{}, cplx(std::sqrt(n), 0), cfg),
                           cfg.fd_step);
    std::vector<std::vector<double>> thetas;
    for (int i = 0; i < 32; ++i) {
        auto s = bench_sequence(depth, n);
        s.phi0 += 0.01 * i;
        thetas.push_back(s.parameters());
    }
    std::vector<double> losses(thetas.size());
    for (auto _ : st) {
        parallel_for(thetas.size(), workers, [&](std::size_t i) { losses[i] = obj.value(thetas[i]); });
        benchmark::DoNotOptimize(losses.data());
    }
}
void BM_PopulationSerial(benchmark::State& st) { population_eval(st, 1); }
void BM_PopulationParallel(benchmark::State& st) { population_eval(st, max_workers()); }

void noise_mc(benchmark::State& st, int workers) {
    const int n = 10;
    const auto seq = bench_sequence(4, n);
    const FockCutoff c = default_cutoff(n, 2.0);
    for (auto _ : st) {
        benchmark::DoNotOptimize(noise_monte_carlo(seq, n, JCParams{}, cplx(std::sqrt(n), 0),
                                                   NoiseModel{0.01, 0.01, 64}, 1, c, 0.01,
                                                   workers));
    }
}
void BM_NoiseSerial(benchmark::State& st) { noise_mc(st, 1); }
void BM_NoiseParallel(benchmark::State& st) { noise_mc(st, max_workers()); }

void detuning(benchmark::State& st, int workers) {
    const int n = 10;
    const auto seq = bench_sequence(4, n);
    const FockCutoff c = default_cutoff(n, 2.0);
    std::vector<double> deltas;
    for (int i = -20; i <= 20; ++i) deltas.push_back(0.01 * i);
    for (auto _ : st) {
        benchmark::DoNotOptimize(
            detuning_scan(seq, n, JCParams{}, cplx(std::sqrt(n), 0), deltas, c, workers));
    }
}
void BM_DetuningSerial(benchmark::State& st) { detuning(st, 1); }
void BM_DetuningParallel(benchmark::State& st) { detuning(st, max_workers()); }

}  // namespace

BENCHMARK(BM_JcBlockwise)->Arg(40)->Arg(100)->Arg(200);
BENCHMARK(BM_JcDenseExpm)->Arg(40)->Arg(100);
BENCHMARK(BM_DisplacementFactorized)->Arg(40)->Arg(100)->Arg(200);
BENCHMARK(BM_DisplacementDenseExpm)->Arg(40)->Arg(100);
BENCHMARK(BM_PopulationSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PopulationParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_NoiseSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NoiseParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DetuningSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DetuningParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
