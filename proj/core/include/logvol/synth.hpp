#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "logvol/panel_io.hpp"

namespace logvol {

// A cross-cluster interaction: the leading `fraction` of `from_cluster`'s
// members load on the factor of `to_cluster`. Cluster ids are 1-based.
// With fraction 1 the interaction is a common component of the whole
// cluster and becomes indistinguishable from the cluster's own mode.
struct InteractionSpec {
    int from_cluster = 0;
    int to_cluster = 0;
    double loading = 0.0;
    double fraction = 0.5;
};

// Generative mirror of the factor decomposition: log-volatility built
// additively from a market factor, one factor per cluster and optional
// interactions, each factor a long-memory process when its strength is
// positive. The seed fixes the full output bit-for-bit.
struct SynthSpec {
    int n_stocks = 60;
    int n_days = 3000;  // return observations; prices have n_days + 1 dates
    std::vector<int> cluster_sizes;
    double market_strength = 0.0;  // memory strength in [0, 1]
    std::vector<double> cluster_strengths;
    std::vector<InteractionSpec> interactions;
    double noise_level = 1.0;
    // Memory strength of the idiosyncratic component itself; 0 gives plain
    // white noise. A small positive value keeps every stock's residual
    // memory bounded away from zero, as observed in real panels.
    double noise_memory = 0.0;
    std::uint64_t seed = 0;
    double gap_fraction = 0.0;  // per-cell probability of a missing quote
    std::string start_date = "2000-01-03";

    void validate() const;
};

struct GroundTruth {
    std::vector<int> membership;      // 1-based cluster id per stock
    std::vector<std::string> sectors; // "S<k>" mirror of the membership
    Eigen::VectorXd market_beta;
    Eigen::VectorXd cluster_beta;
    Eigen::MatrixXd interaction_beta; // N x K loadings on foreign cluster factors
    Eigen::MatrixXd factors;          // (1 + K) x T: market first, then clusters
};

struct SynthPanel {
    PricePanel panel;                 // gap-free panel
    std::vector<RawSeries> series;    // with gaps knocked out when requested
    GroundTruth truth;
};

// Memory strength in (0, 1] maps linearly onto a target ACF power-law
// exponent; stronger memory decays slower.
double strength_to_exponent(double strength);

// Long-memory factor: five AR(1) components with log-spaced decay times,
// weighted so the superposed ACF approximates L^(-beta) over lags 1..300.
// strength <= 0 yields plain white noise.
Eigen::VectorXd long_memory_series(int t_len, double strength, std::mt19937_64& rng);

SynthPanel generate_panel(const SynthSpec& spec);

}  // namespace logvol
