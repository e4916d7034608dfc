#pragma once

#include <vector>

#include <Eigen/Core>

#include "logvol/stats_core.hpp"

namespace logvol {

// Residual of each omega row after projecting onto the span of the top-F
// eigenvectors of the volatility correlation matrix E. Requires 1 <= F < N.
Eigen::MatrixXd pca_residual_panel(const Eigen::MatrixXd& omega, int n_components);

// Eigen-decomposition of E sorted by descending eigenvalue, exposed for
// reconstruction checks and scoring.
struct PcaDecomposition {
    Eigen::VectorXd eigenvalues;   // descending
    Eigen::MatrixXd eigenvectors;  // columns aligned with eigenvalues
};
PcaDecomposition pca_decompose(const CorrelationMatrix& E);

struct VarimaxResult {
    Eigen::MatrixXd rotated;
    Eigen::MatrixXd rotation;  // orthonormal, rotated = loadings * rotation
    double criterion = 0.0;    // variance-of-squared-loadings objective
    int sweeps = 0;
};

// Kaiser varimax via pairwise planar rotations; the criterion is
// non-decreasing across sweeps.
VarimaxResult varimax(const Eigen::MatrixXd& loadings, double tol = 1e-10,
                      int max_sweeps = 200);

struct LoadingMatrix {
    Eigen::MatrixXd loadings;      // N x F, varimax-rotated
    Eigen::VectorXd uniquenesses;  // 1 - communality per stock
    int n_factors = 0;
    bool heywood_flagged = false;  // some communality was clamped below 1
};

struct FaResult {
    LoadingMatrix loading_matrix;
    Eigen::MatrixXd residual;  // N x T panel minus regression-score reconstruction
    Eigen::MatrixXd scores;    // F x T Thomson factor scores
    int iterations = 0;
};

// Iterated principal-axis factoring on E (communalities seeded with the max
// absolute row correlation), varimax rotation, Thomson regression scores.
// Requires 1 <= F < N/2.
FaResult fa_fit_varimax(const Eigen::MatrixXd& omega, int n_factors);

struct CdfPoint {
    double fraction = 0.0;          // residual memory share for one stock
    double cumulative_share = 0.0;  // fraction of stocks at or below it
};

// Empirical CDF of eta(residual row) / baseline eta, clamped at zero.
// Stocks with non-positive baseline eta are skipped.
std::vector<CdfPoint> residual_memory_cdf(const Eigen::MatrixXd& residual_panel,
                                          const Eigen::VectorXd& baseline_eta);

}  // namespace logvol
