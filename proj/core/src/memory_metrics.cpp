#include "logvol/memory_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "logvol/stats_core.hpp"

namespace logvol {

Eigen::VectorXd acf(const Eigen::VectorXd& series, int l_max) {
    const Eigen::Index t_len = series.size();
    if (l_max < 1) {
        throw std::invalid_argument("acf: need l_max >= 1");
    }
    if (static_cast<Eigen::Index>(l_max) >= t_len) {
        throw std::invalid_argument("acf: l_max must be < T");
    }
    const double mean = series.mean();
    const Eigen::VectorXd s = series.array() - mean;
    const double var = s.squaredNorm() / double(t_len);
    if (!(var > 0.0)) {
        throw std::runtime_error("acf: zero-variance series");
    }
    Eigen::VectorXd kappa(l_max);
    for (int lag = 1; lag <= l_max; ++lag) {
        const Eigen::Index n = t_len - lag;
        const double prod = s.head(n).dot(s.tail(n));
        kappa(lag - 1) = (prod / double(n)) / var;
    }
    return kappa;
}

BartlettCut bartlett_cut(const Eigen::VectorXd& kappa, Eigen::Index t_len, double level,
                         bool cumulative) {
    if (kappa.size() == 0) {
        throw std::invalid_argument("bartlett_cut: empty ACF");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("bartlett_cut: level must be in (0,1)");
    }
    if (t_len < 2) {
        throw std::invalid_argument("bartlett_cut: need T >= 2");
    }
    const double z = normal_quantile(1.0 - 0.5 * level);
    double cum = 0.0;  // sum of kappa(j)^2 for j < L
    for (int lag = 1; lag <= kappa.size(); ++lag) {
        const double band =
            cumulative ? z * std::sqrt((1.0 + 2.0 * cum) / double(t_len))
                       : z * std::sqrt(1.0 / double(t_len));
        const double k = kappa(lag - 1);
        if (k < band) {
            return BartlettCut{lag, false};
        }
        cum += k * k;
    }
    return BartlettCut{static_cast<int>(kappa.size()), true};
}

double theil_sen_slope(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    if (ys.size() != n) {
        throw std::invalid_argument("theil_sen_slope: length mismatch");
    }
    if (n < 2) {
        throw std::invalid_argument("theil_sen_slope: need at least 2 points");
    }
    std::vector<double> slopes;
    slopes.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = xs[j] - xs[i];
            if (dx == 0.0) {
                throw std::invalid_argument("theil_sen_slope: duplicate x value");
            }
            slopes.push_back((ys[j] - ys[i]) / dx);
        }
    }
    return median(std::move(slopes));
}

double theil_sen_loglog(const Eigen::VectorXd& kappa, int lag_lo, int lag_hi) {
    if (lag_lo < 1 || lag_hi > kappa.size() || lag_lo > lag_hi) {
        throw std::invalid_argument("theil_sen_loglog: bad lag range");
    }
    std::vector<double> xs, ys;
    for (int lag = lag_lo; lag <= lag_hi; ++lag) {
        const double k = kappa(lag - 1);
        if (k > 0.0) {
            xs.push_back(std::log(double(lag)));
            ys.push_back(std::log(k));
        }
    }
    if (xs.size() < 2) {
        throw std::runtime_error("theil_sen_loglog: fewer than 2 positive ACF lags in range");
    }
    return -theil_sen_slope(xs, ys);
}

EtaResult eta(const Eigen::VectorXd& kappa, int l_cut) {
    if (l_cut < 1) {
        throw std::invalid_argument("eta: need l_cut >= 1");
    }
    if (l_cut > kappa.size()) {
        throw std::invalid_argument("eta: l_cut exceeds available lags");
    }
    EtaResult out;
    out.curve.resize(l_cut);
    out.curve(0) = 0.0;  // degenerate interval [1, 1]
    for (int lag = 2; lag <= l_cut; ++lag) {
        out.curve(lag - 1) =
            out.curve(lag - 2) + 0.5 * (kappa(lag - 2) + kappa(lag - 1));
    }
    out.eta = out.curve(l_cut - 1);
    return out;
}

MemoryProfile memory_profile(const Eigen::VectorXd& series) {
    const Eigen::Index t_len = series.size();
    if (t_len < 100) {
        throw std::invalid_argument("memory_profile: need T >= 100");
    }
    const Eigen::VectorXd s = standardize(series);
    const int l_max = static_cast<int>(std::min<Eigen::Index>(t_len / 4, 1000));

    MemoryProfile profile;
    profile.acf = acf(s, l_max);
    const BartlettCut cut = bartlett_cut(profile.acf, t_len, 0.05);
    profile.l_cut = cut.l_cut;
    profile.truncated = cut.truncated;

    int positive = 0;
    for (int lag = 1; lag <= profile.l_cut; ++lag) {
        if (profile.acf(lag - 1) > 0.0) ++positive;
    }
    if (positive >= 2) {
        profile.beta_vol = theil_sen_loglog(profile.acf, 1, profile.l_cut);
    }

    const EtaResult e = eta(profile.acf, profile.l_cut);
    profile.eta = e.eta;
    profile.eta_curve = e.curve;
    return profile;
}

}  // namespace logvol
