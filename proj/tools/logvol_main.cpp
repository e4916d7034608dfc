// Batch CLI for the cluster-driven log-volatility factor model. Each
// subcommand reads the previous phase's artifacts from the output directory
// and writes its own, so expensive phases are resumable. Every output is a
// pure function of (manifest, input, seed); timestamps only ever land in
// run_meta.json.

#include <CLI11.hpp>

#include <array>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "artifact_io.hpp"
#include "logvol/baselines.hpp"
#include "logvol/dbht.hpp"
#include "logvol/factor_pipeline.hpp"
#include "logvol/memory_metrics.hpp"
#include "logvol/panel_io.hpp"
#include "logvol/parallel.hpp"
#include "logvol/rolling.hpp"
#include "logvol/synth.hpp"

namespace fs = std::filesystem;
using namespace logvol;
using logvol::cli::json;

namespace {

struct DependencyError : std::runtime_error {
    DependencyError(const std::string& artifact, const std::string& command)
        : std::runtime_error("missing artifact " + artifact + "; run `logvol " + command +
                             "` first"),
          required(command) {}
    std::string required;
};

struct Manifest {
    std::string input;
    std::string out;
    std::string sectors;  // defaults to <out>/sectors.csv
    std::uint64_t seed = 0;
    int workers = 0;  // 0: one thread per core
    double cleaning_p = 0.9;
    WeightScheme scheme = WeightScheme::equal;
    double alpha = 0.05;
    double bonferroni_divisor = 0.0;  // 0: 0.5 * K * n_sectors
    ElasticNetGrids grids;
    int n_factors = 0;  // 0: selected clusters + 1
    int rolling_window = 1600;
    int rolling_count = 50;
    bool emit_curves = false;
    SynthSpec synth;

    json to_json() const;
};

json Manifest::to_json() const {
    json j;
    j["input"] = input;
    j["out"] = out;
    j["sectors"] = sectors;
    j["seed"] = seed;
    j["workers"] = workers;
    j["cleaning_p"] = cleaning_p;
    j["scheme"] = scheme == WeightScheme::equal ? "equal" : "eigen";
    j["alpha"] = alpha;
    j["bonferroni_divisor"] = bonferroni_divisor;
    j["elastic_net"] = {{"a_grid", grids.a_grid},
                        {"n_lambda", grids.n_lambda},
                        {"lambda_min_ratio", grids.lambda_min_ratio},
                        {"folds", grids.folds},
                        {"n_perm", grids.n_perm}};
    j["n_factors"] = n_factors;
    j["rolling"] = {{"window", rolling_window}, {"count", rolling_count}};
    j["emit_curves"] = emit_curves;
    json s;
    s["n_stocks"] = synth.n_stocks;
    s["n_days"] = synth.n_days;
    s["cluster_sizes"] = synth.cluster_sizes;
    s["market_strength"] = synth.market_strength;
    s["cluster_strengths"] = synth.cluster_strengths;
    json inters = json::array();
    for (const auto& it : synth.interactions) {
        inters.push_back({{"from", it.from_cluster},
                          {"to", it.to_cluster},
                          {"loading", it.loading},
                          {"fraction", it.fraction}});
    }
    s["interactions"] = inters;
    s["noise_level"] = synth.noise_level;
    s["noise_memory"] = synth.noise_memory;
    s["gap_fraction"] = synth.gap_fraction;
    s["start_date"] = synth.start_date;
    j["synth"] = s;
    return j;
}

WeightScheme parse_scheme(const std::string& s) {
    if (s == "equal") return WeightScheme::equal;
    if (s == "eigen") return WeightScheme::eigen;
    throw std::invalid_argument("scheme must be 'equal' or 'eigen', got '" + s + "'");
}

Manifest parse_manifest(const json& j) {
    Manifest m;
    if (j.contains("input")) m.input = j.at("input").get<std::string>();
    if (j.contains("out")) m.out = j.at("out").get<std::string>();
    if (j.contains("sectors")) m.sectors = j.at("sectors").get<std::string>();
    if (j.contains("seed")) m.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("workers")) m.workers = j.at("workers").get<int>();
    if (j.contains("cleaning_p")) m.cleaning_p = j.at("cleaning_p").get<double>();
    if (j.contains("scheme")) m.scheme = parse_scheme(j.at("scheme").get<std::string>());
    if (j.contains("alpha")) m.alpha = j.at("alpha").get<double>();
    if (j.contains("bonferroni_divisor")) {
        m.bonferroni_divisor = j.at("bonferroni_divisor").get<double>();
    }
    if (j.contains("elastic_net")) {
        const auto& e = j.at("elastic_net");
        if (e.contains("a_grid")) m.grids.a_grid = e.at("a_grid").get<std::vector<double>>();
        if (e.contains("n_lambda")) m.grids.n_lambda = e.at("n_lambda").get<int>();
        if (e.contains("lambda_min_ratio")) {
            m.grids.lambda_min_ratio = e.at("lambda_min_ratio").get<double>();
        }
        if (e.contains("folds")) m.grids.folds = e.at("folds").get<int>();
        if (e.contains("n_perm")) m.grids.n_perm = e.at("n_perm").get<int>();
    }
    if (j.contains("n_factors")) m.n_factors = j.at("n_factors").get<int>();
    if (j.contains("rolling")) {
        const auto& r = j.at("rolling");
        if (r.contains("window")) m.rolling_window = r.at("window").get<int>();
        if (r.contains("count")) m.rolling_count = r.at("count").get<int>();
    }
    if (j.contains("emit_curves")) m.emit_curves = j.at("emit_curves").get<bool>();
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        if (s.contains("n_stocks")) m.synth.n_stocks = s.at("n_stocks").get<int>();
        if (s.contains("n_days")) m.synth.n_days = s.at("n_days").get<int>();
        if (s.contains("cluster_sizes")) {
            m.synth.cluster_sizes = s.at("cluster_sizes").get<std::vector<int>>();
        }
        if (s.contains("market_strength")) {
            m.synth.market_strength = s.at("market_strength").get<double>();
        }
        if (s.contains("cluster_strengths")) {
            m.synth.cluster_strengths = s.at("cluster_strengths").get<std::vector<double>>();
        }
        if (s.contains("interactions")) {
            for (const auto& it : s.at("interactions")) {
                InteractionSpec spec;
                spec.from_cluster = it.at("from").get<int>();
                spec.to_cluster = it.at("to").get<int>();
                spec.loading = it.at("loading").get<double>();
                if (it.contains("fraction")) spec.fraction = it.at("fraction").get<double>();
                m.synth.interactions.push_back(spec);
            }
        }
        if (s.contains("noise_level")) m.synth.noise_level = s.at("noise_level").get<double>();
        if (s.contains("noise_memory")) {
            m.synth.noise_memory = s.at("noise_memory").get<double>();
        }
        if (s.contains("gap_fraction")) {
            m.synth.gap_fraction = s.at("gap_fraction").get<double>();
        }
        if (s.contains("start_date")) {
            m.synth.start_date = s.at("start_date").get<std::string>();
        }
    }
    return m;
}

// Environment overrides carry the LOGVOL_ prefix, e.g. LOGVOL_SEED=7.
void apply_env_overrides(Manifest& m) {
    auto get = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (v && *v) return std::string(v);
        return std::nullopt;
    };
    if (auto v = get("LOGVOL_INPUT")) m.input = *v;
    if (auto v = get("LOGVOL_OUT")) m.out = *v;
    if (auto v = get("LOGVOL_SECTORS")) m.sectors = *v;
    if (auto v = get("LOGVOL_SEED")) m.seed = std::stoull(*v);
    if (auto v = get("LOGVOL_WORKERS")) m.workers = std::stoi(*v);
    if (auto v = get("LOGVOL_CLEANING_P")) m.cleaning_p = std::stod(*v);
    if (auto v = get("LOGVOL_SCHEME")) m.scheme = parse_scheme(*v);
    if (auto v = get("LOGVOL_ALPHA")) m.alpha = std::stod(*v);
    if (auto v = get("LOGVOL_BONFERRONI_DIVISOR")) m.bonferroni_divisor = std::stod(*v);
    if (auto v = get("LOGVOL_N_FACTORS")) m.n_factors = std::stoi(*v);
}

fs::path out_path(const Manifest& m, const std::string& name) {
    return fs::path(m.out) / name;
}

void require_artifact(const Manifest& m, const std::string& name, const std::string& command) {
    if (!fs::exists(out_path(m, name))) {
        throw DependencyError(name, command);
    }
}

void write_provenance(const Manifest& m, const std::string& command) {
    fs::create_directories(m.out);
    cli::write_json(out_path(m, "manifest.json"), m.to_json());
    // The single timestamped file; everything else is bit-reproducible.
    json meta;
    meta["command"] = command;
    meta["timestamp_utc"] = static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    cli::write_json(out_path(m, "run_meta.json"), meta);
}

// --- phase loaders -----------------------------------------------------------

LogVolPanel load_omega(const Manifest& m) {
    require_artifact(m, "omega.tsv", "transform");
    const cli::LabeledMatrix lm = cli::read_matrix(out_path(m, "omega.tsv"));
    LogVolPanel panel;
    panel.tickers = lm.labels;
    panel.omega = lm.values;
    panel.floor_count.assign(panel.tickers.size(), 0);
    return panel;
}

Clustering load_clustering(const Manifest& m, const std::vector<std::string>& tickers) {
    require_artifact(m, "clustering.csv", "decompose");
    return cli::read_clustering(out_path(m, "clustering.csv"), tickers);
}

// --- subcommands ---------------------------------------------------------------

int cmd_synth(const Manifest& m) {
    const SynthPanel sp = generate_panel(m.synth);
    write_provenance(m, "synth");
    save_raw_series(sp.series, out_path(m, "prices.csv"));
    cli::write_sectors(out_path(m, "sectors.csv"), sp.panel.tickers, sp.truth.sectors);

    json truth;
    truth["membership"] = sp.truth.membership;
    truth["sectors"] = sp.truth.sectors;
    truth["tickers"] = sp.panel.tickers;
    std::vector<double> mb(sp.truth.market_beta.data(),
                           sp.truth.market_beta.data() + sp.truth.market_beta.size());
    std::vector<double> cb(sp.truth.cluster_beta.data(),
                           sp.truth.cluster_beta.data() + sp.truth.cluster_beta.size());
    truth["market_beta"] = mb;
    truth["cluster_beta"] = cb;
    cli::write_json(out_path(m, "ground_truth.json"), truth);

    std::vector<std::string> factor_labels{"market"};
    for (std::size_t c = 1; c < static_cast<std::size_t>(sp.truth.factors.rows()); ++c) {
        factor_labels.push_back("cluster_" + std::to_string(c));
    }
    cli::write_matrix(out_path(m, "factors.tsv"), factor_labels, sp.truth.factors);
    std::cout << "synth: wrote " << sp.panel.n_stocks() << " tickers x "
              << sp.panel.n_dates() << " dates\n";
    return 0;
}

int cmd_clean(const Manifest& m) {
    fs::path input = m.input.empty() ? out_path(m, "prices.csv") : fs::path(m.input);
    if (!fs::exists(input)) {
        if (m.input.empty()) throw DependencyError("prices.csv", "synth");
        throw std::runtime_error("input file not found: " + input.string());
    }
    const auto series = load_prices(input);
    CleanReport report;
    const PricePanel panel = clean_panel(series, m.cleaning_p, &report);
    write_provenance(m, "clean");
    save_panel(panel, out_path(m, "panel.csv"));
    save_panel_sidecar(panel, report, out_path(m, "panel_meta.json"));
    std::cout << "clean: kept " << panel.n_stocks() << " of " << series.size()
              << " tickers, " << panel.n_dates() << " dates\n";
    return 0;
}

int cmd_transform(const Manifest& m) {
    require_artifact(m, "panel.csv", "clean");
    const PricePanel panel = load_panel(out_path(m, "panel.csv"));
    const Eigen::MatrixXd returns = log_returns(panel);
    const LogVolPanel lv = log_abs_transform(returns, panel.tickers);
    write_provenance(m, "transform");
    cli::write_matrix(out_path(m, "omega.tsv"), lv.tickers, lv.omega);
    json meta;
    meta["floor_count"] = lv.floor_count;
    meta["tickers"] = lv.tickers;
    cli::write_json(out_path(m, "transform_meta.json"), meta);
    std::cout << "transform: " << lv.n_stocks() << " log-volatility series of length "
              << lv.n_times() << "\n";
    return 0;
}

int cmd_decompose(const Manifest& m) {
    const LogVolPanel panel = load_omega(m);

    DecompositionOptions opts;
    opts.scheme = m.scheme;
    opts.grids = m.grids;
    opts.seed = m.seed;
    opts.workers = m.workers;
    const Decomposition d = run_decomposition(panel, opts);

    write_provenance(m, "decompose");
    cli::write_clustering(out_path(m, "clustering.csv"), panel.tickers, d.clustering);
    cli::write_vector(out_path(m, "market_mode.tsv"), "market_mode", d.market.values);

    json market_fits = json::array();
    for (std::size_t i = 0; i < d.removal.fits.size(); ++i) {
        const auto& fit = d.removal.fits[i];
        market_fits.push_back({{"ticker", panel.tickers[i]},
                               {"beta", fit.beta},
                               {"alpha", fit.alpha},
                               {"p_beta", fit.p_beta},
                               {"p_alpha", fit.p_alpha},
                               {"residual_scale", d.removal.residual_scale(
                                                      static_cast<Eigen::Index>(i))}});
    }
    cli::write_json(out_path(m, "market_fits.json"), market_fits);

    save_correlation(d.g, out_path(m, "g_matrix.tsv").string());
    if (d.graph) {
        std::ofstream edges(out_path(m, "graph_edges.csv"));
        edges << "ticker_i,ticker_j,similarity\n";
        for (const auto& e : d.graph->edges) {
            edges << panel.tickers[static_cast<std::size_t>(e.i)] << ','
                  << panel.tickers[static_cast<std::size_t>(e.j)] << ','
                  << cli::format_double(e.weight) << '\n';
        }
    }
    {
        // Heat-map export: stocks reordered by cluster id.
        std::vector<Eigen::Index> order;
        for (const auto& group : d.clustering.members()) {
            order.insert(order.end(), group.begin(), group.end());
        }
        CorrelationMatrix reordered = cluster_submatrix(d.g, order);
        save_correlation(reordered, out_path(m, "heatmap_g.tsv").string());
    }

    std::vector<std::string> mode_labels;
    Eigen::MatrixXd mode_matrix(d.modes.size(), panel.n_times());
    for (std::size_t k = 0; k < d.modes.size(); ++k) {
        mode_labels.push_back("cluster_" + std::to_string(k + 1));
        mode_matrix.row(static_cast<Eigen::Index>(k)) = d.modes[k].values.transpose();
    }
    cli::write_matrix(out_path(m, "cluster_modes.tsv"), mode_labels, mode_matrix);

    cli::write_matrix(out_path(m, "stage_market_removed.tsv"), panel.tickers,
                      d.removal.residual_std);
    cli::write_matrix(out_path(m, "stage_cluster_removed.tsv"), panel.tickers,
                      d.stage_cluster_removed);
    cli::write_matrix(out_path(m, "stage_residual.tsv"), panel.tickers, d.stage_residual);

    json en_fits = json::array();
    for (std::size_t i = 0; i < d.stocks.size(); ++i) {
        const auto& sd = d.stocks[i];
        std::vector<double> betas(sd.fit.betas.data(), sd.fit.betas.data() + sd.fit.betas.size());
        std::vector<double> p_values(sd.fit.p_values.data(),
                                     sd.fit.p_values.data() + sd.fit.p_values.size());
        en_fits.push_back({{"ticker", panel.tickers[i]},
                           {"cluster", sd.design.own_cluster},
                           {"betas", betas},
                           {"intercept", sd.fit.intercept},
                           {"a", sd.fit.a},
                           {"lambda", sd.fit.lambda},
                           {"cv_error", sd.fit.cv_error},
                           {"p_values", p_values}});
    }
    cli::write_json(out_path(m, "en_fits.json"), en_fits);
    std::cout << "decompose: K=" << d.clustering.k << " clusters\n";
    return 0;
}

int cmd_memory(const Manifest& m) {
    const LogVolPanel panel = load_omega(m);
    require_artifact(m, "stage_market_removed.tsv", "decompose");
    const auto stage_mm = cli::read_matrix(out_path(m, "stage_market_removed.tsv"));
    const auto stage_cm = cli::read_matrix(out_path(m, "stage_cluster_removed.tsv"));
    const auto stage_im = cli::read_matrix(out_path(m, "stage_residual.tsv"));

    const Eigen::Index n = panel.n_stocks();
    const std::array<const Eigen::MatrixXd*, 4> stages{&panel.omega, &stage_mm.values,
                                                       &stage_cm.values, &stage_im.values};
    const std::array<const char*, 4> stage_names{"plain", "market_removed", "cluster_removed",
                                                 "residual"};

    std::vector<std::array<MemoryProfile, 4>> profiles(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), m.workers, [&](std::size_t i) {
        for (std::size_t st = 0; st < 4; ++st) {
            profiles[i][st] =
                memory_profile(stages[st]->row(static_cast<Eigen::Index>(i)).transpose());
        }
    });

    write_provenance(m, "memory");
    json records = json::array();
    Eigen::MatrixXd etas(n, 4);
    for (Eigen::Index idx = 0; idx < n; ++idx) {
        const std::size_t i = static_cast<std::size_t>(idx);
        json rec;
        rec["ticker"] = panel.tickers[i];
        for (std::size_t st = 0; st < 4; ++st) {
            const MemoryProfile& p = profiles[i][st];
            json stage;
            stage["l_cut"] = p.l_cut;
            if (p.beta_vol) {
                stage["beta_vol"] = *p.beta_vol;
            } else {
                stage["beta_vol"] = nullptr;
            }
            stage["eta"] = p.eta;
            stage["truncated"] = p.truncated;
            rec[stage_names[st]] = stage;
            etas(idx, static_cast<Eigen::Index>(st)) = p.eta;
        }
        records.push_back(rec);
    }
    cli::write_json(out_path(m, "memory_profiles.json"), records);
    cli::write_matrix(out_path(m, "memory_etas.tsv"), panel.tickers, etas);

    if (m.emit_curves) {
        const fs::path curve_dir = out_path(m, "curves");
        fs::create_directories(curve_dir);
        for (Eigen::Index idx = 0; idx < n; ++idx) {
            const std::size_t i = static_cast<std::size_t>(idx);
            const MemoryProfile& p = profiles[i][0];
            std::ofstream acf_out(curve_dir / ("acf_" + panel.tickers[i] + ".tsv"));
            acf_out << "lag\tkappa\n";
            for (Eigen::Index lag = 1; lag <= p.acf.size(); ++lag) {
                acf_out << lag << '\t' << cli::format_double(p.acf(lag - 1)) << '\n';
            }
            std::ofstream eta_out(curve_dir / ("eta_curve_" + panel.tickers[i] + ".tsv"));
            eta_out << "lag\teta\n";
            for (Eigen::Index lag = 1; lag <= p.eta_curve.size(); ++lag) {
                eta_out << lag << '\t' << cli::format_double(p.eta_curve(lag - 1)) << '\n';
            }
        }
    }
    std::cout << "memory: profiled " << n << " stocks over 4 stages\n";
    return 0;
}

int cmd_filtrate(const Manifest& m) {
    const LogVolPanel panel = load_omega(m);
    const Clustering clustering = load_clustering(m, panel.tickers);
    require_artifact(m, "memory_etas.tsv", "memory");
    const auto etas = cli::read_matrix(out_path(m, "memory_etas.tsv"));

    const FiltrationReport report =
        filtration_from_etas(etas.values, clustering, panel.tickers);
    write_provenance(m, "filtrate");

    {
        std::ofstream out(out_path(m, "filtration_stocks.csv"));
        out << "ticker,cluster_id,included,eta_pl,eta_mm,eta_cm,eta_im,"
               "ratio_mm,ratio_cm,ratio_im,frac_market,frac_cluster,frac_interac,frac_resid\n";
        for (const auto& s : report.stocks) {
            out << s.ticker << ',' << s.cluster_id << ',' << (s.included ? 1 : 0) << ','
                << cli::format_double(s.eta_pl) << ',' << cli::format_double(s.eta_mm) << ','
                << cli::format_double(s.eta_cm) << ',' << cli::format_double(s.eta_im);
            for (double r : s.ratios) out << ',' << cli::format_double(r);
            for (double f : s.fractions) out << ',' << cli::format_double(f);
            out << '\n';
        }
    }
    {
        std::ofstream out(out_path(m, "filtration_groups.csv"));
        out << "scope,cluster_id,n_stocks,n_included,"
               "mm_median,mm_mad,mm_sig,cm_median,cm_mad,cm_sig,im_median,im_mad,im_sig,"
               "frac_market,frac_cluster,frac_interac,frac_resid\n";
        auto emit = [&](const GroupFiltration& g, const std::string& scope) {
            out << scope << ',' << g.cluster_id << ',' << g.n_stocks << ',' << g.n_included;
            for (int r = 0; r < 3; ++r) {
                out << ',' << cli::format_double(g.ratio_stats[static_cast<std::size_t>(r)].median)
                    << ',' << cli::format_double(g.ratio_stats[static_cast<std::size_t>(r)].mad)
                    << ',' << (g.significant[static_cast<std::size_t>(r)] ? 1 : 0);
            }
            for (double f : g.fractions) out << ',' << cli::format_double(f);
            out << '\n';
        };
        emit(report.market, "market");
        for (const auto& g : report.clusters) emit(g, "cluster");
    }
    const std::vector<int> selected = select_cluster_factors(report);
    json sel;
    sel["selected_clusters"] = selected;
    cli::write_json(out_path(m, "selected_clusters.json"), sel);
    std::cout << "filtrate: " << selected.size() << " of " << report.clusters.size()
              << " cluster factors significant\n";
    return 0;
}

int cmd_enrich(const Manifest& m) {
    const LogVolPanel panel = load_omega(m);
    const Clustering clustering = load_clustering(m, panel.tickers);
    const fs::path sector_path =
        m.sectors.empty() ? out_path(m, "sectors.csv") : fs::path(m.sectors);
    if (!fs::exists(sector_path)) {
        throw std::runtime_error("sector labels not found at " + sector_path.string() +
                                 " (set manifest field 'sectors')");
    }
    const auto sectors = cli::read_sectors(sector_path, panel.tickers);
    std::set<std::string> distinct(sectors.begin(), sectors.end());
    const double divisor =
        m.bonferroni_divisor > 0.0
            ? m.bonferroni_divisor
            : default_bonferroni_divisor(clustering.k, static_cast<int>(distinct.size()));
    const auto results = sector_enrichment(clustering, sectors, m.alpha, divisor);

    write_provenance(m, "enrich");
    std::ofstream out(out_path(m, "enrichment.csv"));
    out << "cluster_id,size,dominant_sector,p,significant\n";
    const auto groups = clustering.members();
    for (const auto& r : results) {
        out << r.cluster_id << ','
            << groups[static_cast<std::size_t>(r.cluster_id - 1)].size() << ','
            << r.dominant_sector << ',' << cli::format_double(r.p) << ','
            << (r.significant ? 1 : 0) << '\n';
    }
    std::cout << "enrich: tested " << results.size() << " clusters at alpha/" << divisor
              << "\n";
    return 0;
}

int cmd_compare(const Manifest& m) {
    const LogVolPanel panel = load_omega(m);
    require_artifact(m, "stage_residual.tsv", "decompose");
    const auto stage_im = cli::read_matrix(out_path(m, "stage_residual.tsv"));
    require_artifact(m, "memory_etas.tsv", "memory");
    const auto etas = cli::read_matrix(out_path(m, "memory_etas.tsv"));
    require_artifact(m, "selected_clusters.json", "filtrate");
    const json sel = cli::read_json(out_path(m, "selected_clusters.json"));

    int n_factors = m.n_factors;
    if (n_factors <= 0) {
        n_factors = static_cast<int>(sel.at("selected_clusters").size()) + 1;
    }
    n_factors = std::max(1, std::min<int>(n_factors, static_cast<int>(panel.n_stocks()) - 1));

    const Eigen::VectorXd baseline = etas.values.col(0);
    const Eigen::MatrixXd pca_res = pca_residual_panel(panel.omega, n_factors);
    const int fa_factors =
        std::min(n_factors, static_cast<int>(panel.n_stocks() - 1) / 2);
    const FaResult fa = fa_fit_varimax(panel.omega, fa_factors);

    write_provenance(m, "compare");
    std::ofstream out(out_path(m, "cdf.csv"));
    out << "fraction,cumulative_share,model_name\n";
    auto emit = [&](const std::vector<CdfPoint>& cdf, const std::string& name) {
        for (const auto& p : cdf) {
            out << cli::format_double(p.fraction) << ','
                << cli::format_double(p.cumulative_share) << ',' << name << '\n';
        }
    };
    emit(residual_memory_cdf(stage_im.values, baseline), "factor_model");
    emit(residual_memory_cdf(pca_res, baseline), "pca");
    emit(residual_memory_cdf(fa.residual, baseline), "fa");
    std::cout << "compare: factor model vs pca vs fa at F=" << n_factors << "\n";
    return 0;
}

int cmd_rolling(const Manifest& m) {
    const LogVolPanel panel = load_omega(m);
    const Clustering clustering = load_clustering(m, panel.tickers);
    const WindowPlan plan = make_windows(static_cast<int>(panel.n_times()), m.rolling_window,
                                         m.rolling_count);
    RollingConfig config;
    config.scheme = m.scheme;
    config.alpha = m.alpha;
    config.workers = m.workers;
    const auto records = rolling_pipeline(panel, plan, clustering, config);

    write_provenance(m, "rolling");
    std::ofstream out(out_path(m, "rolling.csv"));
    out << "cluster_id,windows_matched,windows_memory_significant\n";
    for (const auto& r : records) {
        out << r.cluster_id << ',' << r.windows_matched << ','
            << r.windows_memory_significant << '\n';
    }
    std::cout << "rolling: " << plan.n_windows << " windows of " << plan.length
              << " days, shift " << plan.shift << "\n";
    return 0;
}

int cmd_report(const Manifest& m) {
    const LogVolPanel panel = load_omega(m);
    require_artifact(m, "memory_profiles.json", "memory");
    const json profiles = cli::read_json(out_path(m, "memory_profiles.json"));
    require_artifact(m, "filtration_groups.csv", "filtrate");
    require_artifact(m, "enrichment.csv", "enrich");

    // Per-stock plain-stage metrics plus the average volatility correlation.
    const CorrelationMatrix e = correlation(panel.omega, panel.tickers);
    std::vector<double> etas, betas, lcuts, rhos;
    std::vector<double> etas_b, lcuts_b, rhos_b;  // stocks with a fitted exponent
    {
        std::ofstream rb(out_path(m, "fig_rho_vs_beta.csv"));
        std::ofstream eb(out_path(m, "fig_eta_vs_beta.csv"));
        std::ofstream er(out_path(m, "fig_eta_vs_rho.csv"));
        std::ofstream le(out_path(m, "fig_lcut_vs_eta.csv"));
        std::ofstream lb(out_path(m, "fig_lcut_vs_beta.csv"));
        rb << "ticker,rho_vol,beta_vol\n";
        eb << "ticker,eta,beta_vol\n";
        er << "ticker,eta,rho_vol\n";
        le << "ticker,l_cut,eta\n";
        lb << "ticker,l_cut,beta_vol\n";
        for (Eigen::Index i = 0; i < panel.n_stocks(); ++i) {
            const auto& rec = profiles.at(static_cast<std::size_t>(i)).at("plain");
            const double eta = rec.at("eta").get<double>();
            const int l_cut = rec.at("l_cut").get<int>();
            const double rho = avg_cross_correlation(e, i);
            const std::string& ticker = panel.tickers[static_cast<std::size_t>(i)];
            etas.push_back(eta);
            lcuts.push_back(double(l_cut));
            rhos.push_back(rho);
            er << ticker << ',' << cli::format_double(eta) << ','
               << cli::format_double(rho) << '\n';
            le << ticker << ',' << l_cut << ',' << cli::format_double(eta) << '\n';
            if (!rec.at("beta_vol").is_null()) {
                const double beta = rec.at("beta_vol").get<double>();
                betas.push_back(beta);
                etas_b.push_back(eta);
                lcuts_b.push_back(double(l_cut));
                rhos_b.push_back(rho);
                rb << ticker << ',' << cli::format_double(rho) << ','
                   << cli::format_double(beta) << '\n';
                eb << ticker << ',' << cli::format_double(eta) << ','
                   << cli::format_double(beta) << '\n';
                lb << ticker << ',' << l_cut << ',' << cli::format_double(beta) << '\n';
            }
        }
    }

    json tests;
    auto run_test = [&](const std::vector<double>& x, const std::vector<double>& y,
                        Alternative alt, const char* name) {
        if (x.size() >= 3) {
            try {
                const SpearmanResult r = spearman(x, y, alt);
                tests[name] = {{"rho", r.rho},
                               {"p", r.p},
                               {"alternative", alt == Alternative::greater
                                                   ? "greater"
                                                   : (alt == Alternative::less ? "less"
                                                                               : "two_sided")}};
            } catch (const std::exception& ex) {
                tests[name] = {{"error", ex.what()}};
            }
        }
    };
    run_test(rhos_b, betas, Alternative::less, "rho_vs_beta");
    run_test(etas_b, betas, Alternative::less, "eta_vs_beta");
    run_test(etas, rhos, Alternative::greater, "eta_vs_rho");
    run_test(lcuts, etas, Alternative::greater, "lcut_vs_eta");
    run_test(lcuts_b, betas, Alternative::less, "lcut_vs_beta");

    // Table-shaped summary: one row per cluster.
    struct GroupRow {
        int cluster = 0;
        int size = 0;
        bool sig = false;
        double market = 0, cluster_frac = 0, interac = 0, resid = 0;
    };
    std::vector<GroupRow> rows;
    {
        std::ifstream in(out_path(m, "filtration_groups.csv"));
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.rfind("cluster,", 0) != 0) continue;
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            GroupRow r;
            r.cluster = std::stoi(cells[1]);
            r.size = std::stoi(cells[2]);
            r.sig = cells[9] == "1";  // cluster-stage significance flag
            r.market = std::stod(cells[13]);
            r.cluster_frac = std::stod(cells[14]);
            r.interac = std::stod(cells[15]);
            r.resid = std::stod(cells[16]);
            rows.push_back(r);
        }
    }
    std::map<int, std::pair<std::string, double>> enrichment;
    {
        std::ifstream in(out_path(m, "enrichment.csv"));
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            enrichment[std::stoi(cells[0])] = {cells[2], std::stod(cells[3])};
        }
    }

    write_provenance(m, "report");
    cli::write_json(out_path(m, "spearman_tests.json"), tests);
    {
        std::ofstream out(out_path(m, "report.csv"));
        out << "k,size,dominant_sector,p,cluster_sig,market,cluster,interac,resid\n";
        char buf[32];
        for (const auto& r : rows) {
            const auto it = enrichment.find(r.cluster);
            out << r.cluster << ',' << r.size << ','
                << (it != enrichment.end() ? it->second.first : "") << ',';
            if (it != enrichment.end()) {
                std::snprintf(buf, sizeof(buf), "%.6f", it->second.second);
                out << buf;
            }
            out << ',' << (r.sig ? "T" : "F");
            for (double v : {r.market, r.cluster_frac, r.interac, r.resid}) {
                std::snprintf(buf, sizeof(buf), "%.3f", v);
                out << ',' << buf;
            }
            out << '\n';
        }
    }
    std::cout << "report: " << rows.size() << " cluster rows\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cluster-driven log-volatility factor model"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string manifest_path;
    std::string out_override;
    int workers_override = -1;
    std::int64_t seed_override = -1;
    app.add_option("--manifest", manifest_path, "Run manifest (JSON)");
    app.add_option("--out", out_override, "Output directory (overrides manifest)");
    app.add_option("--workers", workers_override, "Worker threads (0 = all cores)");
    app.add_option("--seed", seed_override, "Random seed (overrides manifest)");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"synth", "Generate a synthetic price panel with planted structure"},
        {"clean", "Align and gap-fill raw prices into a panel"},
        {"transform", "Log-returns and standardized log-volatilities"},
        {"decompose", "Market mode, clustering, cluster modes, joint fits"},
        {"memory", "Per-stock memory profiles for all four stages"},
        {"filtrate", "Stage ratios, significance flags, contribution fractions"},
        {"enrich", "Sector over-representation per cluster"},
        {"compare", "Residual-memory CDFs: factor model vs PCA vs FA"},
        {"rolling", "Rolling-window cluster and memory persistence"},
        {"report", "Assemble the summary table and figure data"},
    };
    for (const auto& [name, desc] : commands) {
        app.add_subcommand(name, desc);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        json mj = json::object();
        if (!manifest_path.empty()) {
            mj = cli::read_json(manifest_path);
        }
        Manifest m = parse_manifest(mj);
        apply_env_overrides(m);
        if (!out_override.empty()) m.out = out_override;
        if (workers_override >= 0) m.workers = workers_override;
        if (seed_override >= 0) {
            m.seed = static_cast<std::uint64_t>(seed_override);
            m.synth.seed = m.seed;
        } else {
            m.synth.seed = m.seed;
        }
        if (m.out.empty()) {
            std::cerr << R"({"error":"usage","message":"no output directory: pass --out or set manifest field 'out'"})"
                      << "\n";
            return 2;
        }

        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "synth") return cmd_synth(m);
        if (cmd == "clean") return cmd_clean(m);
        if (cmd == "transform") return cmd_transform(m);
        if (cmd == "decompose") return cmd_decompose(m);
        if (cmd == "memory") return cmd_memory(m);
        if (cmd == "filtrate") return cmd_filtrate(m);
        if (cmd == "enrich") return cmd_enrich(m);
        if (cmd == "compare") return cmd_compare(m);
        if (cmd == "rolling") return cmd_rolling(m);
        if (cmd == "report") return cmd_report(m);
        std::cerr << R"({"error":"usage","message":"unknown command"})" << "\n";
        return 2;
    } catch (const DependencyError& e) {
        json err;
        err["error"] = "missing_dependency";
        err["required"] = e.required;
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        json err;
        err["error"] = "runtime";
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
