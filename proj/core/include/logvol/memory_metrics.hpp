#pragma once

#include <optional>
#include <span>

#include <Eigen/Core>

namespace logvol {

// kappa(L) for L = 1..l_max: lagged products over T-L terms, normalized by
// the sample variance (mean removed), so the result is scale- and
// shift-invariant.
Eigen::VectorXd acf(const Eigen::VectorXd& series, int l_max);

struct BartlettCut {
    int l_cut = 1;
    bool truncated = false;  // no lag fell inside the band; l_cut pinned to l_max
};

// Smallest L with kappa(L) below the Bartlett band
// z_{1-level/2} * sqrt((1 + 2 sum_{j<L} kappa(j)^2) / T). Set
// `cumulative` false for the flat 1/sqrt(T) band.
BartlettCut bartlett_cut(const Eigen::VectorXd& kappa, Eigen::Index t_len, double level,
                         bool cumulative = true);

// Median of all pairwise slopes. xs must be pairwise distinct.
double theil_sen_slope(std::span<const double> xs, std::span<const double> ys);

// Power-law exponent: beta_vol = -(Theil-Sen slope of (ln L, ln kappa(L)))
// over the positive-kappa lags in [lag_lo, lag_hi]. Throws if fewer than 2
// such lags exist.
double theil_sen_loglog(const Eigen::VectorXd& kappa, int lag_lo, int lag_hi);

struct EtaResult {
    double eta = 0.0;
    Eigen::VectorXd curve;  // partial integrals over [1, L'] for L' = 1..l_cut
};

// Trapezoidal integral of kappa over integer lags 1..l_cut; curve(1) = 0.
EtaResult eta(const Eigen::VectorXd& kappa, int l_cut);

struct MemoryProfile {
    Eigen::VectorXd acf;              // kappa(1..l_max)
    int l_cut = 1;
    bool truncated = false;
    std::optional<double> beta_vol;   // absent when < 2 positive lags in [1, l_cut]
    double eta = 0.0;
    Eigen::VectorXd eta_curve;
};

// Full per-series memory profile: standardize, ACF to min(T/4, 1000),
// Bartlett cut at the 5% level, Theil-Sen over [1, l_cut], eta over the
// same range. Requires T >= 100.
MemoryProfile memory_profile(const Eigen::VectorXd& series);

}  // namespace logvol
