#pragma once

// Shared synthetic fixtures: planted similarity matrices, partition scoring,
// and small RNG helpers for the test suites.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace fixtures {

// Block-constant similarity with i.i.d. Gaussian jitter (symmetrized), unit
// diagonal. `sizes` gives the planted block sizes in vertex order.
inline Eigen::MatrixXd planted_similarity(const std::vector<int>& sizes, double rho_in,
                                          double rho_out, double jitter, std::uint64_t seed) {
    const int n = std::accumulate(sizes.begin(), sizes.end(), 0);
    std::vector<int> block;
    for (std::size_t b = 0; b < sizes.size(); ++b) {
        for (int i = 0; i < sizes[b]; ++i) block.push_back(static_cast<int>(b));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd s(n, n);
    for (int i = 0; i < n; ++i) {
        s(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double base = (block[i] == block[j]) ? rho_in : rho_out;
            const double value = base + jitter * gauss(rng);
            s(i, j) = value;
            s(j, i) = value;
        }
    }
    return s;
}

inline std::vector<int> planted_labels(const std::vector<int>& sizes) {
    std::vector<int> labels;
    for (std::size_t b = 0; b < sizes.size(); ++b) {
        for (int i = 0; i < sizes[b]; ++i) labels.push_back(static_cast<int>(b) + 1);
    }
    return labels;
}

// Adjusted Rand index between two partitions given as label vectors.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    std::map<int, int> ida, idb;
    for (int x : a) ida.emplace(x, static_cast<int>(ida.size()));
    for (int x : b) idb.emplace(x, static_cast<int>(idb.size()));
    const std::size_t ka = ida.size(), kb = idb.size();
    std::vector<std::vector<long>> table(ka, std::vector<long>(kb, 0));
    for (std::size_t i = 0; i < n; ++i) {
        ++table[static_cast<std::size_t>(ida[a[i]])][static_cast<std::size_t>(idb[b[i]])];
    }
    auto choose2 = [](long m) { return double(m) * double(m - 1) / 2.0; };
    double sum_ij = 0.0;
    std::vector<long> row_sum(ka, 0), col_sum(kb, 0);
    for (std::size_t i = 0; i < ka; ++i) {
        for (std::size_t j = 0; j < kb; ++j) {
            sum_ij += choose2(table[i][j]);
            row_sum[i] += table[i][j];
            col_sum[j] += table[i][j];
        }
    }
    double sum_a = 0.0, sum_b = 0.0;
    for (long r : row_sum) sum_a += choose2(r);
    for (long c : col_sum) sum_b += choose2(c);
    const double total = choose2(static_cast<long>(n));
    const double expected = sum_a * sum_b / total;
    const double maximum = 0.5 * (sum_a + sum_b);
    if (maximum == expected) return 1.0;
    return (sum_ij - expected) / (maximum - expected);
}

// Canonical form: relabel cluster ids by first occurrence so label vectors
// can be compared directly.
inline std::vector<int> canonical_labels(const std::vector<int>& labels) {
    std::map<int, int> remap;
    std::vector<int> out;
    out.reserve(labels.size());
    for (int x : labels) {
        auto [it, inserted] = remap.emplace(x, static_cast<int>(remap.size()) + 1);
        out.push_back(it->second);
    }
    return out;
}

inline Eigen::VectorXd gaussian_vector(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = gauss(rng);
    return v;
}

// Standardize with the population convention used across the library.
inline Eigen::VectorXd zscore(const Eigen::VectorXd& x) {
    const double mean = x.mean();
    const double sd = std::sqrt((x.array() - mean).square().sum() / double(x.size()));
    return (x.array() - mean) / sd;
}

inline void zscore_rows(Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double mean = m.row(i).mean();
        const double sd = std::sqrt((m.row(i).array() - mean).square().sum() / double(m.cols()));
        m.row(i) = (m.row(i).array() - mean) / sd;
    }
}

}  // namespace fixtures
