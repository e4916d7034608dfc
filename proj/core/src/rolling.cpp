#include "logvol/rolling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "logvol/memory_metrics.hpp"
#include "logvol/parallel.hpp"

namespace logvol {

WindowPlan make_windows(int total_days, int window_length, int n_windows) {
    if (window_length < 1 || window_length > total_days) {
        throw std::invalid_argument("make_windows: need 1 <= W <= T");
    }
    if (n_windows < 2) {
        throw std::invalid_argument("make_windows: need n >= 2");
    }
    if (total_days - window_length < n_windows - 1) {
        throw std::invalid_argument("make_windows: not enough room to roll (T - W < n - 1)");
    }
    WindowPlan plan;
    plan.n_windows = n_windows;
    plan.length = window_length;
    plan.shift = (total_days - window_length) / (n_windows - 1);
    for (int m = 0; m < n_windows; ++m) {
        const int start = m * plan.shift;
        plan.ranges.emplace_back(start, start + window_length);
    }
    return plan;
}

namespace {

struct WindowOutcome {
    std::vector<int> matched;             // per static cluster, 0/1
    std::vector<int> memory_significant;  // per static cluster, 0/1
};

// Cluster-stage ratio for one member set on window data: eta(c minus the
// leave-one-out cluster mode fit) over eta(c).
bool cluster_stage_significant(const Eigen::MatrixXd& residual_std,
                               const std::vector<Eigen::Index>& members,
                               WeightScheme scheme) {
    if (members.size() < 2) {
        return false;  // no leave-one-out mode to remove
    }
    std::vector<double> ratios;
    for (std::size_t m = 0; m < members.size(); ++m) {
        const Eigen::Index stock = members[m];
        Eigen::VectorXd mode = Eigen::VectorXd::Zero(residual_std.cols());
        if (scheme == WeightScheme::equal) {
            for (std::size_t j = 0; j < members.size(); ++j) {
                if (members[j] != stock) mode += residual_std.row(members[j]).transpose();
            }
            mode /= double(members.size() - 1);
        } else {
            // Eigen weights over the submatrix excluding the stock.
            std::vector<Eigen::Index> others;
            for (Eigen::Index j : members) {
                if (j != stock) others.push_back(j);
            }
            Eigen::MatrixXd sub(others.size(), residual_std.cols());
            for (std::size_t j = 0; j < others.size(); ++j) {
                sub.row(static_cast<Eigen::Index>(j)) = residual_std.row(others[j]);
            }
            const CorrelationMatrix g = correlation(sub, {}, 1e-6);
            const WeightVector w = eigen_weights(g);
            for (std::size_t j = 0; j < others.size(); ++j) {
                mode += w.weights(static_cast<Eigen::Index>(j)) *
                        residual_std.row(others[j]).transpose();
            }
        }
        const Eigen::VectorXd c = residual_std.row(stock).transpose();
        double eta_before = 0.0, eta_after = 0.0;
        try {
            eta_before = memory_profile(c).eta;
            const OlsFit fit = ols_fit(c, mode);
            eta_after = memory_profile(fit.residuals).eta;
        } catch (const std::exception&) {
            continue;  // degenerate series within the window
        }
        if (eta_before > 0.0 && eta_after > 0.0) {
            ratios.push_back(eta_after / eta_before);
        }
    }
    if (ratios.empty()) return false;
    const MedianMad stats = median_mad(std::move(ratios));
    return stats.median + stats.mad < 1.0;
}

}  // namespace

std::vector<PersistenceRecord> rolling_pipeline(const LogVolPanel& panel,
                                                const WindowPlan& plan,
                                                const Clustering& static_clustering,
                                                const RollingConfig& config) {
    static_clustering.validate();
    const Eigen::Index n = panel.n_stocks();
    if (static_cast<Eigen::Index>(static_clustering.labels.size()) != n) {
        throw std::invalid_argument("rolling_pipeline: clustering does not cover the panel");
    }
    if (plan.length < 100) {
        throw std::invalid_argument("rolling_pipeline: window shorter than the memory minimum");
    }
    if (plan.ranges.empty() ||
        plan.ranges.back().second > static_cast<int>(panel.n_times())) {
        throw std::invalid_argument("rolling_pipeline: plan does not fit the panel");
    }
    const auto static_groups = static_clustering.members();
    const int k_static = static_clustering.k;

    std::vector<WindowOutcome> outcomes(plan.ranges.size());
    parallel_for(plan.ranges.size(), config.workers, [&](std::size_t m) {
        const auto [start, end] = plan.ranges[m];
        const Eigen::Index w_len = end - start;

        LogVolPanel window;
        window.tickers = panel.tickers;
        window.omega = panel.omega.middleCols(start, w_len);
        standardize_rows(window.omega, window.tickers);
        window.floor_count.assign(static_cast<std::size_t>(n), 0);

        const ModeSeries mode = market_mode(window, config.scheme);
        const MarketRemoval removal = remove_market(window, mode);
        const CorrelationMatrix g = correlation(removal.residual_std, window.tickers);
        const auto sim = similarity_from_residual(g);
        const FilteredGraph graph = build_planar_graph(sim.similarity);
        const Clustering window_clustering = dbht_cluster(graph, sim.distance);
        const auto window_groups = window_clustering.members();

        WindowOutcome out;
        out.matched.assign(static_cast<std::size_t>(k_static), 0);
        out.memory_significant.assign(static_cast<std::size_t>(k_static), 0);

        const double divisor = double(k_static) * double(window_clustering.k);
        const double threshold = config.alpha / divisor;
        for (int k = 0; k < k_static; ++k) {
            const auto& x_members = static_groups[static_cast<std::size_t>(k)];
            double best_p = 1.0;
            int best_window_cluster = -1;
            for (std::size_t c = 0; c < window_groups.size(); ++c) {
                const auto& y_members = window_groups[c];
                std::int64_t overlap = 0;
                for (Eigen::Index v : y_members) {
                    if (std::binary_search(x_members.begin(), x_members.end(), v)) ++overlap;
                }
                const double p = hypergeometric_enrichment(
                    static_cast<std::int64_t>(n),
                    static_cast<std::int64_t>(x_members.size()),
                    static_cast<std::int64_t>(y_members.size()), overlap);
                if (p < best_p) {
                    best_p = p;
                    best_window_cluster = static_cast<int>(c);
                }
            }
            const bool matched = best_p < threshold;
            out.matched[static_cast<std::size_t>(k)] = matched ? 1 : 0;

            const auto& memory_set =
                matched ? window_groups[static_cast<std::size_t>(best_window_cluster)]
                        : x_members;
            out.memory_significant[static_cast<std::size_t>(k)] =
                cluster_stage_significant(removal.residual_std, memory_set, config.scheme)
                    ? 1
                    : 0;
        }
        outcomes[m] = std::move(out);
    });

    std::vector<PersistenceRecord> records(static_cast<std::size_t>(k_static));
    for (int k = 0; k < k_static; ++k) {
        records[static_cast<std::size_t>(k)].cluster_id = k + 1;
    }
    for (const auto& out : outcomes) {
        for (int k = 0; k < k_static; ++k) {
            records[static_cast<std::size_t>(k)].windows_matched +=
                out.matched[static_cast<std::size_t>(k)];
            records[static_cast<std::size_t>(k)].windows_memory_significant +=
                out.memory_significant[static_cast<std::size_t>(k)];
        }
    }
    return records;
}

}  // namespace logvol
