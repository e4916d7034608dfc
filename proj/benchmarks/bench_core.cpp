#include <benchmark/benchmark.h>

#include <random>

#include "logvol/dbht.hpp"
#include "logvol/memory_metrics.hpp"
#include "logvol/regression.hpp"
#include "logvol/stats_core.hpp"

using namespace logvol;

namespace {

Eigen::MatrixXd planted_similarity(int blocks, int per_block, std::uint64_t seed) {
    const int n = blocks * per_block;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.02);
    Eigen::MatrixXd s(n, n);
    for (int i = 0; i < n; ++i) {
        s(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double base = (i / per_block == j / per_block) ? 0.6 : 0.1;
            s(i, j) = base + g(rng);
            s(j, i) = s(i, j);
        }
    }
    return s;
}

Eigen::VectorXd ar1(int t_len, double phi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd x(t_len);
    x(0) = g(rng);
    for (int t = 1; t < t_len; ++t) x(t) = phi * x(t - 1) + g(rng);
    return x;
}

void bm_tmfg_build(benchmark::State& state) {
    const auto s = planted_similarity(5, static_cast<int>(state.range(0)) / 5, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_planar_graph(s));
    }
}
BENCHMARK(bm_tmfg_build)->Arg(60)->Arg(150);

void bm_dbht_cluster(benchmark::State& state) {
    const auto s = planted_similarity(5, static_cast<int>(state.range(0)) / 5, 2);
    const FilteredGraph g = build_planar_graph(s);
    const Eigen::MatrixXd d = (2.0 * (1.0 - s.array())).cwiseMax(0.0).sqrt();
    for (auto _ : state) {
        benchmark::DoNotOptimize(dbht_cluster(g, d));
    }
}
BENCHMARK(bm_dbht_cluster)->Arg(60)->Arg(150);

void bm_acf(benchmark::State& state) {
    const Eigen::VectorXd series = standardize(ar1(static_cast<int>(state.range(0)), 0.6, 3));
    const int l_max = static_cast<int>(state.range(0)) / 4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(acf(series, l_max));
    }
}
BENCHMARK(bm_acf)->Arg(2000)->Arg(4000);

void bm_memory_profile(benchmark::State& state) {
    const Eigen::VectorXd series = ar1(static_cast<int>(state.range(0)), 0.7, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(memory_profile(series));
    }
}
BENCHMARK(bm_memory_profile)->Arg(3000);

void bm_elastic_net_cv(benchmark::State& state) {
    const int t_len = static_cast<int>(state.range(0));
    const int m = 8;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd x(t_len, m);
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd col(t_len);
        for (int t = 0; t < t_len; ++t) col(t) = g(rng);
        x.col(j) = standardize(col);
    }
    Eigen::VectorXd noise(t_len);
    for (int t = 0; t < t_len; ++t) noise(t) = g(rng);
    const Eigen::VectorXd y = x.col(0) - 0.5 * x.col(3) + 0.5 * noise;
    for (auto _ : state) {
        benchmark::DoNotOptimize(elastic_net_cv(y, x, {0.0, 0.5, 1.0}, {}, 10));
    }
}
BENCHMARK(bm_elastic_net_cv)->Arg(3000);

void bm_theil_sen(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Eigen::VectorXd kappa(n);
    for (int lag = 1; lag <= n; ++lag) kappa(lag - 1) = std::pow(double(lag), -0.4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(theil_sen_loglog(kappa, 1, n));
    }
}
BENCHMARK(bm_theil_sen)->Arg(200)->Arg(600);

void bm_correlation(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int t_len = 3000;
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd rows(n, t_len);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd row(t_len);
        for (int t = 0; t < t_len; ++t) row(t) = g(rng);
        rows.row(i) = standardize(row).transpose();
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(correlation(rows));
    }
}
BENCHMARK(bm_correlation)->Arg(60)->Arg(120);

}  // namespace

BENCHMARK_MAIN();
