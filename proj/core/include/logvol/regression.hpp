#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace logvol {

// Simple-regression fit of y on a single regressor, with two-sided t tests
// of H0: coefficient = 0 and the residual series.
struct OlsFit {
    double beta = 0.0;
    double alpha = 0.0;
    double p_beta = 1.0;
    double p_alpha = 1.0;
    Eigen::VectorXd residuals;
};

OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::VectorXd& x);

// Minimizes (1/(2T)) ||y - b0 - X beta||^2 + lambda * P_a(beta) with
// P_a(beta) = sum_j ((1-a)/2 beta_j^2 + a |beta_j|) by cyclic coordinate
// descent; the intercept is unpenalized. At a=0 this is ridge regression
// with closed form (X'X + T lambda I)^{-1} X'y on centered data; at a=1
// it is the lasso.
struct ElasticNetSolution {
    Eigen::VectorXd betas;
    double intercept = 0.0;
    long sweeps = 0;
};

// Thrown when coordinate descent hits the sweep cap; carries the last iterate.
struct ElasticNetConvergenceError : std::runtime_error {
    ElasticNetConvergenceError(const std::string& msg, Eigen::VectorXd last)
        : std::runtime_error(msg), last_betas(std::move(last)) {}
    Eigen::VectorXd last_betas;
};

struct ElasticNetOptions {
    double tol = 1e-7;       // max coefficient change per sweep
    long max_sweeps = 100000;
    double column_check_tol = 1e-6;  // standardization precondition tolerance; <0 disables
    // Optional extra PSD quadratic 0.5 beta' R beta added to the objective.
    // Used to suppress structurally degenerate design directions (e.g. the
    // exact cross-sectional cancellation of market-removed residuals) while
    // leaving the L1 part and the remaining directions untouched.
    std::optional<Eigen::MatrixXd> gram_ridge;
};

ElasticNetSolution elastic_net_solve(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                     double a, double lambda,
                                     const ElasticNetOptions& opts = {});

// Cross-validated fit: contiguous-block K folds scored by the mean of the
// per-fold squared errors; ties break toward the sparser model (larger
// lambda, then larger a).
struct ElasticNetFit {
    Eigen::VectorXd betas;
    double intercept = 0.0;
    double a = 0.0;
    double lambda = 0.0;
    double cv_error = 0.0;
    Eigen::VectorXd p_values;  // filled by predictor_significance
};

// Default lambda path: n log-spaced points from lambda_max (smallest lambda
// killing every beta at a=1) down to min_ratio * lambda_max.
std::vector<double> default_lambda_grid(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                        int n = 50, double min_ratio = 1e-4);
std::vector<double> default_a_grid();

ElasticNetFit elastic_net_cv(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                             std::vector<double> a_grid, std::vector<double> lambda_grid,
                             int folds, const ElasticNetOptions& opts = {});

// Circular-shift permutation test per selected predictor: p is the
// plus-one-corrected fraction of shifts whose refit |beta| reaches the
// observed |beta|. Unselected predictors (beta == 0) get p = 1.
Eigen::VectorXd predictor_significance(const ElasticNetFit& fit, const Eigen::VectorXd& y,
                                       const Eigen::MatrixXd& X, int n_perm,
                                       std::uint64_t seed,
                                       const ElasticNetOptions& opts = {});

}  // namespace logvol
