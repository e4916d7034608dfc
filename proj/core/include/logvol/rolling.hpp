#pragma once

#include <utility>
#include <vector>

#include "logvol/dbht.hpp"
#include "logvol/factor_pipeline.hpp"

namespace logvol {

struct WindowPlan {
    int n_windows = 0;
    int length = 0;
    int shift = 0;
    std::vector<std::pair<int, int>> ranges;  // [start, end) index pairs
};

// shift = floor((T - W) / (n - 1)), starts at 0, shift, 2*shift, ...
// Requires W <= T, n >= 2 and T - W >= n - 1.
WindowPlan make_windows(int total_days, int window_length, int n_windows);

struct PersistenceRecord {
    int cluster_id = 0;               // static cluster
    int windows_matched = 0;          // identity persistence
    int windows_memory_significant = 0;
};

struct RollingConfig {
    WeightScheme scheme = WeightScheme::equal;
    double alpha = 0.05;
    int workers = 1;
};

// Per window: market-mode removal on the window, the residual correlation
// G^m and its clustering Y^m; a static cluster is matched when some window
// cluster shares members beyond the Bonferroni-corrected hypergeometric
// threshold (divisor = clusters tested per window). Memory persistence
// applies the cluster-stage criterion to the matched window cluster, or to
// the static membership when no match exists.
std::vector<PersistenceRecord> rolling_pipeline(const LogVolPanel& panel,
                                                const WindowPlan& plan,
                                                const Clustering& static_clustering,
                                                const RollingConfig& config = {});

}  // namespace logvol
