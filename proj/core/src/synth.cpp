#include "logvol/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace logvol {

void SynthSpec::validate() const {
    if (n_stocks < 2 || n_days < 10) {
        throw std::invalid_argument("SynthSpec: need n_stocks >= 2 and n_days >= 10");
    }
    if (cluster_sizes.empty()) {
        throw std::invalid_argument("SynthSpec: cluster_sizes must be non-empty");
    }
    const int total = std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), 0);
    if (total != n_stocks) {
        throw std::invalid_argument("SynthSpec: cluster sizes must sum to n_stocks");
    }
    for (int s : cluster_sizes) {
        if (s < 1) throw std::invalid_argument("SynthSpec: empty cluster size");
    }
    if (cluster_strengths.size() != cluster_sizes.size()) {
        throw std::invalid_argument("SynthSpec: one memory strength per cluster required");
    }
    for (double s : cluster_strengths) {
        if (s < 0.0 || s > 1.0) throw std::invalid_argument("SynthSpec: strengths in [0,1]");
    }
    if (market_strength < 0.0 || market_strength > 1.0) {
        throw std::invalid_argument("SynthSpec: market strength in [0,1]");
    }
    const int k = static_cast<int>(cluster_sizes.size());
    for (const auto& inter : interactions) {
        if (inter.from_cluster < 1 || inter.from_cluster > k || inter.to_cluster < 1 ||
            inter.to_cluster > k || inter.from_cluster == inter.to_cluster) {
            throw std::invalid_argument("SynthSpec: bad interaction cluster ids");
        }
        if (inter.fraction <= 0.0 || inter.fraction > 1.0) {
            throw std::invalid_argument("SynthSpec: interaction fraction in (0,1]");
        }
    }
    if (noise_level < 0.0) {
        throw std::invalid_argument("SynthSpec: noise level must be >= 0");
    }
    if (noise_memory < 0.0 || noise_memory > 1.0) {
        throw std::invalid_argument("SynthSpec: noise memory in [0,1]");
    }
    if (gap_fraction < 0.0 || gap_fraction >= 1.0) {
        throw std::invalid_argument("SynthSpec: gap fraction in [0,1)");
    }
}

double strength_to_exponent(double strength) {
    // strength 0+ .. 1 maps to beta 1.2 .. 0.25.
    return 1.2 - 0.95 * strength;
}

namespace {

constexpr int kComponents = 5;
constexpr double kTauLo = 2.0;
constexpr double kTauHi = 300.0;

double component_tau(int j) {
    return kTauLo * std::pow(kTauHi / kTauLo, double(j) / double(kComponents - 1));
}

// Log-log Theil-Sen slope of the superposed theoretical ACF
// sum_j tau_j^{-gamma} e^{-L/tau_j} over lags 2..100.
double theoretical_slope(double gamma) {
    std::vector<double> xs, ys;
    for (int lag = 2; lag <= 100; ++lag) {
        double num = 0.0, den = 0.0;
        for (int j = 0; j < kComponents; ++j) {
            const double tau = component_tau(j);
            const double w2 = std::pow(tau, -gamma);
            num += w2 * std::exp(-double(lag) / tau);
            den += w2;
        }
        xs.push_back(std::log(double(lag)));
        ys.push_back(std::log(num / den));
    }
    std::vector<double> slopes;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            slopes.push_back((ys[j] - ys[i]) / (xs[j] - xs[i]));
        }
    }
    std::nth_element(slopes.begin(), slopes.begin() + slopes.size() / 2, slopes.end());
    double m = slopes[slopes.size() / 2];
    if (slopes.size() % 2 == 0) {
        const double lower = *std::max_element(slopes.begin(), slopes.begin() + slopes.size() / 2);
        m = 0.5 * (lower + m);
    }
    return -m;
}

// Weight exponent hitting the target ACF exponent, by bisection; the
// realized slope is monotone increasing in gamma.
double calibrate_weight_exponent(double beta_target) {
    double lo = 0.0, hi = 8.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (theoretical_slope(mid) < beta_target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Eigen::VectorXd long_memory_series(int t_len, double strength, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd out(t_len);
    if (strength <= 0.0) {
        for (int t = 0; t < t_len; ++t) out(t) = gauss(rng);
        return out;
    }

    const double beta = strength_to_exponent(strength);
    const double gamma = calibrate_weight_exponent(beta);
    double phi[kComponents], weight[kComponents];
    double weight_norm = 0.0;
    for (int j = 0; j < kComponents; ++j) {
        const double tau = component_tau(j);
        phi[j] = std::exp(-1.0 / tau);
        weight[j] = std::pow(tau, -0.5 * gamma);
        weight_norm += weight[j] * weight[j];
    }
    weight_norm = std::sqrt(weight_norm);

    double state[kComponents];
    for (int j = 0; j < kComponents; ++j) {
        // Stationary start; components are kept at unit variance.
        state[j] = gauss(rng);
    }
    for (int t = 0; t < t_len; ++t) {
        double value = 0.0;
        for (int j = 0; j < kComponents; ++j) {
            if (t > 0) {
                state[j] = phi[j] * state[j] +
                           std::sqrt(1.0 - phi[j] * phi[j]) * gauss(rng);
            }
            value += weight[j] * state[j];
        }
        out(t) = value / weight_norm;
    }
    return out;
}

SynthPanel generate_panel(const SynthSpec& spec) {
    spec.validate();
    const int n = spec.n_stocks;
    const int t_len = spec.n_days;
    const int k = static_cast<int>(spec.cluster_sizes.size());

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SynthPanel out;
    out.truth.factors.resize(1 + k, t_len);
    out.truth.factors.row(0) = long_memory_series(t_len, spec.market_strength, rng).transpose();
    for (int c = 0; c < k; ++c) {
        out.truth.factors.row(1 + c) =
            long_memory_series(t_len, spec.cluster_strengths[static_cast<std::size_t>(c)], rng)
                .transpose();
    }

    out.truth.membership.reserve(static_cast<std::size_t>(n));
    for (int c = 0; c < k; ++c) {
        for (int m = 0; m < spec.cluster_sizes[static_cast<std::size_t>(c)]; ++m) {
            out.truth.membership.push_back(c + 1);
            out.truth.sectors.push_back("S" + std::to_string(c + 1));
        }
    }

    out.truth.market_beta.resize(n);
    out.truth.cluster_beta.resize(n);
    for (int i = 0; i < n; ++i) {
        out.truth.market_beta(i) = 0.5 + unit(rng);   // U[0.5, 1.5]
        out.truth.cluster_beta(i) = 0.5 + unit(rng);
    }
    out.truth.interaction_beta = Eigen::MatrixXd::Zero(n, k);
    {
        int offset = 0;
        for (int c = 0; c < k; ++c) {
            const int m = spec.cluster_sizes[static_cast<std::size_t>(c)];
            for (const auto& inter : spec.interactions) {
                if (inter.from_cluster == c + 1) {
                    const int affected =
                        std::max(1, static_cast<int>(std::floor(inter.fraction * m)));
                    for (int j = 0; j < affected; ++j) {
                        out.truth.interaction_beta(offset + j, inter.to_cluster - 1) +=
                            inter.loading;
                    }
                }
            }
            offset += m;
        }
    }

    // Log-volatility: market + own cluster + interactions + noise.
    Eigen::MatrixXd omega(n, t_len);
    for (int i = 0; i < n; ++i) {
        const int own = out.truth.membership[static_cast<std::size_t>(i)];
        Eigen::VectorXd w = out.truth.market_beta(i) * out.truth.factors.row(0).transpose();
        w += out.truth.cluster_beta(i) * out.truth.factors.row(own).transpose();
        for (int c = 0; c < k; ++c) {
            const double loading = out.truth.interaction_beta(i, c);
            if (loading != 0.0) {
                w += loading * out.truth.factors.row(c + 1).transpose();
            }
        }
        w += spec.noise_level * long_memory_series(t_len, spec.noise_memory, rng);
        omega.row(i) = w.transpose();
    }

    // Returns r = sign * exp(omega), scaled to a realistic daily magnitude;
    // standardizing ln|r| downstream removes the affine scaling exactly.
    Eigen::MatrixXd prices(n, t_len + 1);
    for (int i = 0; i < n; ++i) {
        const double mean = omega.row(i).mean();
        const double sd = std::sqrt((omega.row(i).array() - mean).square().sum() / double(t_len));
        double log_price = std::log(100.0);
        prices(i, 0) = 100.0;
        for (int t = 0; t < t_len; ++t) {
            const double z = (sd > 0.0) ? (omega(i, t) - mean) / sd : 0.0;
            const double magnitude = std::exp(0.5 * z - 4.6);
            const double sign = (unit(rng) < 0.5) ? -1.0 : 1.0;
            const double r = sign * magnitude;
            log_price += r;
            prices(i, t + 1) = std::exp(log_price);
        }
    }

    // Weekday calendar.
    std::vector<Date> dates;
    Date d = Date::parse(spec.start_date);
    while (d.is_weekend()) d = d.next_weekday();
    for (int t = 0; t <= t_len; ++t) {
        dates.push_back(d);
        d = d.next_weekday();
    }

    out.panel.dates = dates;
    out.panel.prices = prices;
    for (int i = 0; i < n; ++i) {
        out.panel.tickers.push_back("SYN" + std::to_string(i));
    }
    out.panel.validate();

    // Raw series with optional gaps (never the first date, so every series
    // has a price to drag).
    for (int i = 0; i < n; ++i) {
        RawSeries s;
        s.ticker = out.panel.tickers[static_cast<std::size_t>(i)];
        for (int t = 0; t <= t_len; ++t) {
            if (t > 0 && spec.gap_fraction > 0.0 && unit(rng) < spec.gap_fraction) {
                continue;
            }
            s.dates.push_back(dates[static_cast<std::size_t>(t)]);
            s.prices.push_back(prices(i, t));
        }
        out.series.push_back(std::move(s));
    }
    return out;
}

}  // namespace logvol
