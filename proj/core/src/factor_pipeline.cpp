#include "logvol/factor_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "logvol/parallel.hpp"

namespace logvol {

Eigen::MatrixXd log_returns(const PricePanel& panel) {
    panel.validate();
    const Eigen::Index n = panel.n_stocks();
    const Eigen::Index t_len = panel.n_dates() - 1;
    Eigen::MatrixXd returns(n, t_len);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index t = 0; t < t_len; ++t) {
            returns(i, t) = std::log(panel.prices(i, t + 1)) - std::log(panel.prices(i, t));
        }
        const double mean = returns.row(i).mean();
        const double var = (returns.row(i).array() - mean).square().sum() / double(t_len);
        if (!(var > 0.0)) {
            throw std::runtime_error("log_returns: zero return variance for ticker " +
                                     panel.tickers[static_cast<std::size_t>(i)]);
        }
        returns.row(i) = (returns.row(i).array() - mean) / std::sqrt(var);
    }
    return returns;
}

LogVolPanel log_abs_transform(const Eigen::MatrixXd& returns,
                              std::vector<std::string> tickers) {
    const Eigen::Index n = returns.rows();
    const Eigen::Index t_len = returns.cols();
    if (!tickers.empty() && static_cast<Eigen::Index>(tickers.size()) != n) {
        throw std::invalid_argument("log_abs_transform: ticker count mismatch");
    }
    if (tickers.empty()) {
        for (Eigen::Index i = 0; i < n; ++i) tickers.push_back("s" + std::to_string(i));
    }

    LogVolPanel panel;
    panel.tickers = std::move(tickers);
    panel.omega.resize(n, t_len);
    panel.floor_count.assign(static_cast<std::size_t>(n), 0);

    for (Eigen::Index i = 0; i < n; ++i) {
        double floor = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < t_len; ++t) {
            const double a = std::abs(returns(i, t));
            if (a > 0.0) floor = std::min(floor, a);
        }
        if (!std::isfinite(floor)) {
            throw std::runtime_error("log_abs_transform: all returns are zero for ticker " +
                                     panel.tickers[static_cast<std::size_t>(i)]);
        }
        int clamped = 0;
        for (Eigen::Index t = 0; t < t_len; ++t) {
            double a = std::abs(returns(i, t));
            if (a == 0.0) {
                a = floor;
                ++clamped;
            }
            panel.omega(i, t) = std::log(a);
        }
        panel.floor_count[static_cast<std::size_t>(i)] = clamped;
    }
    standardize_rows(panel.omega, panel.tickers);
    return panel;
}

ModeSeries market_mode(const LogVolPanel& panel, WeightScheme scheme) {
    const Eigen::Index n = panel.n_stocks();
    if (n < 2) {
        throw std::invalid_argument("market_mode: need at least 2 stocks");
    }
    ModeSeries mode;
    mode.kind = ModeKind::market;
    mode.cluster_id = 0;
    if (scheme == WeightScheme::equal) {
        mode.weights = equal_weights(n);
    } else {
        const CorrelationMatrix E = correlation(panel.omega, panel.tickers);
        mode.weights = eigen_weights(E);
    }
    mode.members.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) mode.members[static_cast<std::size_t>(i)] = i;
    mode.values = panel.omega.transpose() * mode.weights.weights;
    return mode;
}

MarketRemoval remove_market(const LogVolPanel& panel, const ModeSeries& mode) {
    const Eigen::Index n = panel.n_stocks();
    const Eigen::Index t_len = panel.n_times();
    if (mode.values.size() != t_len) {
        throw std::invalid_argument("remove_market: mode length mismatch");
    }
    MarketRemoval out;
    out.residual_std.resize(n, t_len);
    out.residual_scale.resize(n);
    out.fits.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        OlsFit fit = ols_fit(panel.omega.row(i).transpose(), mode.values);
        const double var = fit.residuals.squaredNorm() / double(t_len);
        if (var > 0.0) {
            const double sigma = std::sqrt(var);
            out.residual_scale(i) = sigma;
            out.residual_std.row(i) = (fit.residuals / sigma).transpose();
        } else {
            // A stock fully explained by the market: keep the zero residual
            // row; downstream correlation rejects it if it is ever reached.
            out.residual_scale(i) = 0.0;
            out.residual_std.row(i).setZero();
        }
        out.fits.push_back(std::move(fit));
    }
    return out;
}

std::vector<ModeSeries> cluster_modes(const Eigen::MatrixXd& residual_std,
                                      const CorrelationMatrix& G,
                                      const Clustering& clustering, WeightScheme scheme) {
    clustering.validate();
    if (static_cast<Eigen::Index>(clustering.labels.size()) != residual_std.rows()) {
        throw std::invalid_argument("cluster_modes: clustering does not cover the panel");
    }
    const auto groups = clustering.members();
    std::vector<ModeSeries> modes;
    modes.reserve(groups.size());
    for (std::size_t k = 0; k < groups.size(); ++k) {
        const auto& members = groups[k];
        ModeSeries mode;
        mode.kind = ModeKind::cluster;
        mode.cluster_id = static_cast<int>(k) + 1;
        mode.members = members;
        if (members.size() == 1) {
            mode.weights.scheme = scheme;
            mode.weights.weights = Eigen::VectorXd::Ones(1);
            mode.values = residual_std.row(members[0]).transpose();
        } else {
            if (scheme == WeightScheme::equal) {
                mode.weights = equal_weights(static_cast<Eigen::Index>(members.size()));
            } else {
                mode.weights = eigen_weights(cluster_submatrix(G, members));
            }
            Eigen::VectorXd values = Eigen::VectorXd::Zero(residual_std.cols());
            for (std::size_t m = 0; m < members.size(); ++m) {
                values += mode.weights.weights(static_cast<Eigen::Index>(m)) *
                          residual_std.row(members[m]).transpose();
            }
            mode.values = std::move(values);
        }
        modes.push_back(std::move(mode));
    }
    return modes;
}

StockDesign build_stock_design(Eigen::Index stock, const Eigen::MatrixXd& residual_std,
                               const std::vector<ModeSeries>& modes,
                               const Clustering& clustering, WeightScheme scheme) {
    const Eigen::Index t_len = residual_std.cols();
    const int own = clustering.labels[static_cast<std::size_t>(stock)];

    StockDesign design;
    design.own_cluster = own;
    design.columns.resize(t_len, static_cast<Eigen::Index>(modes.size()));
    design.col_means.resize(static_cast<Eigen::Index>(modes.size()));
    design.col_sigmas.resize(static_cast<Eigen::Index>(modes.size()));

    for (std::size_t k = 0; k < modes.size(); ++k) {
        const auto& mode = modes[k];
        Eigen::VectorXd col;
        if (mode.cluster_id == own) {
            // Leave-one-out rebuild of the stock's own mode.
            col = Eigen::VectorXd::Zero(t_len);
            std::vector<std::pair<Eigen::Index, double>> kept;
            for (std::size_t m = 0; m < mode.members.size(); ++m) {
                if (mode.members[m] != stock) {
                    kept.emplace_back(mode.members[m],
                                      mode.weights.weights(static_cast<Eigen::Index>(m)));
                }
            }
            if (scheme == WeightScheme::equal && !kept.empty()) {
                const double w = 1.0 / double(kept.size());
                for (auto& [idx, weight] : kept) weight = w;
            }
            for (const auto& [idx, weight] : kept) {
                col += weight * residual_std.row(idx).transpose();
            }
        } else {
            col = mode.values;
        }
        const Eigen::Index j = static_cast<Eigen::Index>(k);
        const double mean = col.mean();
        const double var = (col.array() - mean).square().sum() / double(t_len);
        if (var > 1e-24) {
            const double sigma = std::sqrt(var);
            design.columns.col(j) = (col.array() - mean) / sigma;
            design.col_means(j) = mean;
            design.col_sigmas(j) = sigma;
        } else {
            design.columns.col(j).setZero();
            design.col_means(j) = mean;
            design.col_sigmas(j) = 0.0;  // excluded column
        }
    }
    return design;
}

StockDecomposition remove_cluster_and_interactions(Eigen::Index stock,
                                                   const Eigen::MatrixXd& residual_std,
                                                   const std::vector<ModeSeries>& modes,
                                                   const Clustering& clustering,
                                                   WeightScheme scheme,
                                                   const ElasticNetGrids& grids,
                                                   std::uint64_t seed,
                                                   bool compute_p_values) {
    if (stock < 0 || stock >= residual_std.rows()) {
        throw std::out_of_range("remove_cluster_and_interactions: stock index out of range");
    }
    StockDecomposition out;
    out.design = build_stock_design(stock, residual_std, modes, clustering, scheme);
    const Eigen::VectorXd y = residual_std.row(stock).transpose();

    std::vector<double> a_grid = grids.a_grid.empty() ? default_a_grid() : grids.a_grid;
    std::vector<double> lambda_grid =
        default_lambda_grid(y, out.design.columns, grids.n_lambda, grids.lambda_min_ratio);

    ElasticNetOptions opts;
    opts.column_check_tol = -1.0;  // zero columns are intentional placeholders

    // Market-removed residuals cancel cross-sectionally by construction, so
    // the mode columns carry a structurally degenerate direction; through
    // the leave-one-out own mode it mechanically reconstructs -c_i/m and a
    // plain fit inflates coefficients along it. Ridge-suppress directions
    // whose Gram eigenvalue sits far below the typical scale.
    {
        const Eigen::MatrixXd& X = out.design.columns;
        const double t = double(X.rows());
        const Eigen::RowVectorXd mx = X.colwise().mean();
        const Eigen::MatrixXd Xc = X.rowwise() - mx;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((Xc.transpose() * Xc) / t);
        if (es.info() == Eigen::Success && es.eigenvalues().size() >= 2) {
            const Eigen::VectorXd& eigs = es.eigenvalues();
            std::vector<double> positive;
            for (Eigen::Index j = 0; j < eigs.size(); ++j) {
                if (eigs(j) > 1e-12) positive.push_back(eigs(j));
            }
            if (positive.size() >= 2) {
                const double scale = median(positive);
                Eigen::MatrixXd ridge = Eigen::MatrixXd::Zero(eigs.size(), eigs.size());
                bool any = false;
                for (Eigen::Index j = 0; j < eigs.size(); ++j) {
                    if (eigs(j) > 1e-12 && eigs(j) < 0.05 * scale) {
                        ridge += scale * es.eigenvectors().col(j) *
                                 es.eigenvectors().col(j).transpose();
                        any = true;
                    }
                }
                if (any) opts.gram_ridge = std::move(ridge);
            }
        }
    }

    out.fit = elastic_net_cv(y, out.design.columns, a_grid, lambda_grid, grids.folds, opts);
    if (compute_p_values) {
        out.fit.p_values =
            predictor_significance(out.fit, y, out.design.columns, grids.n_perm, seed, opts);
    }

    const Eigen::Index own_col = static_cast<Eigen::Index>(out.design.own_cluster - 1);
    if (own_col < 0 || own_col >= out.fit.betas.size()) {
        throw std::logic_error("remove_cluster_and_interactions: modes not aligned with clusters");
    }
    out.cluster_removed = y - out.fit.betas(own_col) * out.design.columns.col(own_col);
    out.residual = (y.array() - out.fit.intercept).matrix() - out.design.columns * out.fit.betas;
    return out;
}

Decomposition run_decomposition(const LogVolPanel& panel, const DecompositionOptions& options) {
    Decomposition d;
    d.market = market_mode(panel, options.scheme);
    d.removal = remove_market(panel, d.market);
    d.g = correlation(d.removal.residual_std, panel.tickers);
    if (options.fixed_clustering) {
        d.clustering = *options.fixed_clustering;
        d.clustering.validate();
        if (d.clustering.labels.size() != static_cast<std::size_t>(panel.n_stocks())) {
            throw std::invalid_argument("run_decomposition: clustering does not cover the panel");
        }
    } else {
        const auto sim = similarity_from_residual(d.g);
        d.graph = build_planar_graph(sim.similarity);
        d.clustering = dbht_cluster(*d.graph, sim.distance);
    }
    d.modes = cluster_modes(d.removal.residual_std, d.g, d.clustering, options.scheme);

    const Eigen::Index n = panel.n_stocks();
    const Eigen::Index t_len = panel.n_times();
    d.stocks.resize(static_cast<std::size_t>(n));
    d.stage_cluster_removed.resize(n, t_len);
    d.stage_residual.resize(n, t_len);
    parallel_for(static_cast<std::size_t>(n), options.workers, [&](std::size_t i) {
        StockDecomposition sd = remove_cluster_and_interactions(
            static_cast<Eigen::Index>(i), d.removal.residual_std, d.modes, d.clustering,
            options.scheme, options.grids, options.seed + i, options.compute_p_values);
        d.stage_cluster_removed.row(static_cast<Eigen::Index>(i)) =
            sd.cluster_removed.transpose();
        d.stage_residual.row(static_cast<Eigen::Index>(i)) = sd.residual.transpose();
        d.stocks[i] = std::move(sd);
    });
    return d;
}

namespace {

// Clamp negative stage drops to zero and renormalize to shares of 1.
std::array<double, 4> contribution_fractions(double pl, double mm, double cm, double im) {
    std::array<double, 4> f{(pl - mm) / pl, (mm - cm) / pl, (cm - im) / pl, im / pl};
    double sum = 0.0;
    for (auto& v : f) {
        v = std::max(0.0, v);
        sum += v;
    }
    if (sum > 0.0) {
        for (auto& v : f) v /= sum;
    }
    return f;
}

GroupFiltration aggregate_group(int cluster_id, const std::vector<StockFiltration>& stocks,
                                const std::vector<std::size_t>& members) {
    GroupFiltration g;
    g.cluster_id = cluster_id;
    g.n_stocks = static_cast<int>(members.size());
    std::array<std::vector<double>, 3> ratio_samples;
    std::array<std::vector<double>, 4> fraction_samples;
    for (std::size_t idx : members) {
        const auto& s = stocks[idx];
        if (!s.included) continue;
        ++g.n_included;
        for (int r = 0; r < 3; ++r) ratio_samples[static_cast<std::size_t>(r)].push_back(s.ratios[static_cast<std::size_t>(r)]);
        for (int c = 0; c < 4; ++c) fraction_samples[static_cast<std::size_t>(c)].push_back(s.fractions[static_cast<std::size_t>(c)]);
    }
    if (g.n_included > 0) {
        for (int r = 0; r < 3; ++r) {
            g.ratio_stats[static_cast<std::size_t>(r)] =
                median_mad(ratio_samples[static_cast<std::size_t>(r)]);
            g.significant[static_cast<std::size_t>(r)] =
                g.ratio_stats[static_cast<std::size_t>(r)].median +
                    g.ratio_stats[static_cast<std::size_t>(r)].mad <
                1.0;
        }
        double sum = 0.0;
        for (int c = 0; c < 4; ++c) {
            g.fractions[static_cast<std::size_t>(c)] =
                median(fraction_samples[static_cast<std::size_t>(c)]);
            sum += g.fractions[static_cast<std::size_t>(c)];
        }
        if (sum > 0.0) {
            for (auto& v : g.fractions) v /= sum;
        }
    }
    return g;
}

}  // namespace

FiltrationReport memory_filtration(const Eigen::MatrixXd& stage_plain,
                                   const Eigen::MatrixXd& stage_market_removed,
                                   const Eigen::MatrixXd& stage_cluster_removed,
                                   const Eigen::MatrixXd& stage_residual,
                                   const Clustering& clustering,
                                   const std::vector<std::string>& tickers,
                                   int workers) {
    const Eigen::Index n = stage_plain.rows();
    const Eigen::Index t_len = stage_plain.cols();
    auto check = [&](const Eigen::MatrixXd& m, const char* name) {
        if (m.rows() != n || m.cols() != t_len) {
            throw std::invalid_argument(std::string("memory_filtration: shape mismatch for ") +
                                        name);
        }
    };
    check(stage_market_removed, "market-removed stage");
    check(stage_cluster_removed, "cluster-removed stage");
    check(stage_residual, "residual stage");
    clustering.validate();
    if (static_cast<Eigen::Index>(clustering.labels.size()) != n) {
        throw std::invalid_argument("memory_filtration: clustering does not cover the panel");
    }

    const std::array<const Eigen::MatrixXd*, 4> stages{
        &stage_plain, &stage_market_removed, &stage_cluster_removed, &stage_residual};
    Eigen::MatrixXd etas(n, 4);
    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t i) {
        for (std::size_t st = 0; st < 4; ++st) {
            etas(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(st)) =
                memory_profile(stages[st]->row(static_cast<Eigen::Index>(i)).transpose()).eta;
        }
    });
    return filtration_from_etas(etas, clustering, tickers);
}

FiltrationReport filtration_from_etas(const Eigen::MatrixXd& stage_etas,
                                      const Clustering& clustering,
                                      const std::vector<std::string>& tickers) {
    const Eigen::Index n = stage_etas.rows();
    if (stage_etas.cols() != 4) {
        throw std::invalid_argument("filtration_from_etas: need 4 stage columns");
    }
    clustering.validate();
    if (static_cast<Eigen::Index>(clustering.labels.size()) != n) {
        throw std::invalid_argument("filtration_from_etas: clustering does not cover the panel");
    }

    FiltrationReport report;
    report.stocks.resize(static_cast<std::size_t>(n));
    for (Eigen::Index idx = 0; idx < n; ++idx) {
        const std::size_t i = static_cast<std::size_t>(idx);
        StockFiltration& row = report.stocks[i];
        row.ticker = (i < tickers.size()) ? tickers[i] : "s" + std::to_string(i);
        row.cluster_id = clustering.labels[i];
        row.eta_pl = stage_etas(idx, 0);
        row.eta_mm = stage_etas(idx, 1);
        row.eta_cm = stage_etas(idx, 2);
        row.eta_im = stage_etas(idx, 3);
        row.included = row.eta_pl > 0.0 && row.eta_mm > 0.0 && row.eta_cm > 0.0 &&
                       row.eta_im > 0.0;
        if (row.included) {
            row.ratios = {row.eta_mm / row.eta_pl, row.eta_cm / row.eta_mm,
                          row.eta_im / row.eta_cm};
            row.fractions =
                contribution_fractions(row.eta_pl, row.eta_mm, row.eta_cm, row.eta_im);
        }
    }

    std::vector<std::size_t> all(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    report.market = aggregate_group(0, report.stocks, all);

    const auto groups = clustering.members();
    for (std::size_t k = 0; k < groups.size(); ++k) {
        std::vector<std::size_t> members;
        members.reserve(groups[k].size());
        for (Eigen::Index idx : groups[k]) members.push_back(static_cast<std::size_t>(idx));
        report.clusters.push_back(
            aggregate_group(static_cast<int>(k) + 1, report.stocks, members));
    }
    return report;
}

std::vector<int> select_cluster_factors(const FiltrationReport& report) {
    std::vector<int> selected;
    for (const auto& g : report.clusters) {
        if (g.n_included > 0 && g.significant[1]) {
            selected.push_back(g.cluster_id);
        }
    }
    return selected;
}

double default_bonferroni_divisor(int n_clusters, int n_sectors) {
    return 0.5 * double(n_clusters) * double(n_sectors);
}

std::vector<EnrichmentResult> sector_enrichment(const Clustering& clustering,
                                                const std::vector<std::string>& sector_labels,
                                                double alpha, double bonferroni_divisor) {
    clustering.validate();
    const std::size_t n = clustering.labels.size();
    if (sector_labels.size() != n) {
        throw std::invalid_argument("sector_enrichment: every stock needs a sector label");
    }
    if (!(alpha > 0.0 && alpha < 1.0) || !(bonferroni_divisor > 0.0)) {
        throw std::invalid_argument("sector_enrichment: bad alpha or divisor");
    }
    std::map<std::string, std::int64_t> sector_sizes;
    for (const auto& s : sector_labels) ++sector_sizes[s];

    const double threshold = alpha / bonferroni_divisor;
    std::vector<EnrichmentResult> results;
    const auto groups = clustering.members();
    for (std::size_t k = 0; k < groups.size(); ++k) {
        std::map<std::string, std::int64_t> counts;
        for (Eigen::Index idx : groups[k]) {
            ++counts[sector_labels[static_cast<std::size_t>(idx)]];
        }
        // Modal sector; lexicographically first on ties (map order).
        std::string dominant;
        std::int64_t best = -1;
        for (const auto& [sector, count] : counts) {
            if (count > best) {
                best = count;
                dominant = sector;
            }
        }
        EnrichmentResult r;
        r.cluster_id = static_cast<int>(k) + 1;
        r.dominant_sector = dominant;
        r.p = hypergeometric_enrichment(static_cast<std::int64_t>(n), sector_sizes[dominant],
                                        static_cast<std::int64_t>(groups[k].size()), best);
        r.significant = r.p < threshold;
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace logvol
