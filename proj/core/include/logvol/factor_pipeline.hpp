#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "logvol/dbht.hpp"
#include "logvol/memory_metrics.hpp"
#include "logvol/panel_io.hpp"
#include "logvol/regression.hpp"
#include "logvol/stats_core.hpp"

namespace logvol {

// Standardized log-absolute-return panel omega_i(t); floor_count records how
// many exact-zero returns were clamped per stock before logging.
struct LogVolPanel {
    std::vector<std::string> tickers;
    Eigen::MatrixXd omega;  // N x T, rows mean 0 variance 1
    std::vector<int> floor_count;

    Eigen::Index n_stocks() const { return omega.rows(); }
    Eigen::Index n_times() const { return omega.cols(); }
};

// Row-wise log-differences of the price panel, standardized per stock.
// A constant price row has zero return variance and is reported by ticker.
Eigen::MatrixXd log_returns(const PricePanel& panel);

// omega = ln|r| on standardized returns; exact zeros are clamped to the
// smallest nonzero |r| of that stock before logging, then rows are
// standardized again.
LogVolPanel log_abs_transform(const Eigen::MatrixXd& returns,
                              std::vector<std::string> tickers);

enum class ModeKind { market, cluster };

// A weighted cross-sectional average series: the market mode over all
// stocks, or a cluster mode over the members of one cluster.
struct ModeSeries {
    ModeKind kind = ModeKind::market;
    int cluster_id = 0;  // 1-based for cluster modes
    Eigen::VectorXd values;
    WeightVector weights;                 // aligned with `members`
    std::vector<Eigen::Index> members;    // stock indices the weights apply to
};

ModeSeries market_mode(const LogVolPanel& panel, WeightScheme scheme);

// Per-stock OLS of omega_i on the market mode. residual_std holds the
// re-standardized residual rows for the downstream correlation step;
// residual_scale keeps the raw residual sigma for reconstruction.
struct MarketRemoval {
    Eigen::MatrixXd residual_std;   // N x T
    Eigen::VectorXd residual_scale; // population sigma of each raw residual row
    std::vector<OlsFit> fits;
};

MarketRemoval remove_market(const LogVolPanel& panel, const ModeSeries& mode);

// One mode per cluster: weights from the leading eigenvector of the
// cluster submatrix of G, or equal weights 1/m_k.
std::vector<ModeSeries> cluster_modes(const Eigen::MatrixXd& residual_std,
                                      const CorrelationMatrix& G,
                                      const Clustering& clustering, WeightScheme scheme);

// The design matrix used for one stock's joint cluster/interaction fit: the
// stock's own cluster mode is rebuilt without the stock itself (equal
// weights renormalized over the remaining members), every column is then
// standardized. Zero-variance columns (a singleton's own mode) stay zero
// and are excluded from the fit.
struct StockDesign {
    Eigen::MatrixXd columns;       // T x K, standardized where valid
    Eigen::VectorXd col_means;
    Eigen::VectorXd col_sigmas;    // 0 marks an excluded column
    int own_cluster = 0;           // 1-based
};

StockDesign build_stock_design(Eigen::Index stock, const Eigen::MatrixXd& residual_std,
                               const std::vector<ModeSeries>& modes,
                               const Clustering& clustering, WeightScheme scheme);

struct ElasticNetGrids {
    std::vector<double> a_grid;       // empty: 0, 0.1, ..., 1.0
    int n_lambda = 50;
    double lambda_min_ratio = 1e-4;
    int folds = 10;
    int n_perm = 199;
};

// Joint elastic-net fit of one stock's market residual on all cluster
// modes; returns the fit plus the two remaining filtration stages.
struct StockDecomposition {
    ElasticNetFit fit;                       // betas on standardized mode columns
    Eigen::VectorXd cluster_removed;         // c_i minus its own-cluster term
    Eigen::VectorXd residual;                // epsilon_i
    StockDesign design;
};

StockDecomposition remove_cluster_and_interactions(Eigen::Index stock,
                                                   const Eigen::MatrixXd& residual_std,
                                                   const std::vector<ModeSeries>& modes,
                                                   const Clustering& clustering,
                                                   WeightScheme scheme,
                                                   const ElasticNetGrids& grids,
                                                   std::uint64_t seed,
                                                   bool compute_p_values = true);

// --- full decomposition driver ----------------------------------------------

struct DecompositionOptions {
    WeightScheme scheme = WeightScheme::equal;
    ElasticNetGrids grids;
    std::uint64_t seed = 0;
    int workers = 1;
    bool compute_p_values = true;
    std::optional<Clustering> fixed_clustering;  // bypass DBHT when provided
};

// Everything from the market mode through the per-stock joint fits, with the
// four filtration stage panels assembled. Per-stock fits are seeded
// independently (seed + stock index), so the result is identical for any
// worker count.
struct Decomposition {
    ModeSeries market;
    MarketRemoval removal;
    CorrelationMatrix g;
    std::optional<FilteredGraph> graph;  // absent when a fixed clustering is supplied
    Clustering clustering;
    std::vector<ModeSeries> modes;
    std::vector<StockDecomposition> stocks;
    Eigen::MatrixXd stage_cluster_removed;  // N x T
    Eigen::MatrixXd stage_residual;         // N x T
};

Decomposition run_decomposition(const LogVolPanel& panel, const DecompositionOptions& options);

// --- memory filtration -------------------------------------------------------

struct StockFiltration {
    std::string ticker;
    int cluster_id = 0;
    double eta_pl = 0.0, eta_mm = 0.0, eta_cm = 0.0, eta_im = 0.0;
    bool included = false;               // all four stage etas positive
    std::array<double, 3> ratios{};      // MM/PL, CM/MM, IM/CM
    std::array<double, 4> fractions{};   // market, cluster, interactions, residual
};

struct GroupFiltration {
    int cluster_id = 0;                  // 0 marks the whole-market group
    int n_stocks = 0;
    int n_included = 0;
    std::array<MedianMad, 3> ratio_stats{};
    std::array<bool, 3> significant{};   // median + MAD < 1, per stage
    std::array<double, 4> fractions{};   // renormalized medians of stock fractions
};

struct FiltrationReport {
    std::vector<StockFiltration> stocks;
    GroupFiltration market;
    std::vector<GroupFiltration> clusters;
};

// Four-stage eta per stock (plain, market-removed, cluster-removed, full
// residual), stage ratios, group medians/MADs and significance flags, and
// contribution fractions clamped at zero and renormalized to sum 1.
// Stocks with a non-positive eta at any stage are excluded from the
// aggregates and flagged in the per-stock rows.
FiltrationReport memory_filtration(const Eigen::MatrixXd& stage_plain,
                                   const Eigen::MatrixXd& stage_market_removed,
                                   const Eigen::MatrixXd& stage_cluster_removed,
                                   const Eigen::MatrixXd& stage_residual,
                                   const Clustering& clustering,
                                   const std::vector<std::string>& tickers,
                                   int workers = 1);

// Same aggregation from precomputed per-stock etas (N x 4 columns: plain,
// market-removed, cluster-removed, residual).
FiltrationReport filtration_from_etas(const Eigen::MatrixXd& stage_etas,
                                      const Clustering& clustering,
                                      const std::vector<std::string>& tickers);

// Cluster ids whose cluster-stage median + MAD is below one.
std::vector<int> select_cluster_factors(const FiltrationReport& report);

struct EnrichmentResult {
    int cluster_id = 0;
    std::string dominant_sector;
    double p = 1.0;
    bool significant = false;
};

// Modal sector per cluster with its hypergeometric over-representation
// p-value; significant when p < alpha / bonferroni_divisor.
std::vector<EnrichmentResult> sector_enrichment(const Clustering& clustering,
                                                const std::vector<std::string>& sector_labels,
                                                double alpha, double bonferroni_divisor);

// The paper's conservative default: half the number of (cluster, sector)
// hypothesis pairs.
double default_bonferroni_divisor(int n_clusters, int n_sectors);

}  // namespace logvol
