#include "logvol/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "logvol/stats_core.hpp"

namespace logvol {

OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
    const Eigen::Index t_len = y.size();
    if (x.size() != t_len) {
        throw std::invalid_argument("ols_fit: length mismatch");
    }
    if (t_len < 3) {
        throw std::invalid_argument("ols_fit: need T >= 3");
    }
    const double xbar = x.mean();
    const double ybar = y.mean();
    const double sxx = (x.array() - xbar).square().sum();
    if (!(sxx > 0.0)) {
        throw std::runtime_error("ols_fit: constant regressor");
    }
    const double sxy = ((x.array() - xbar) * (y.array() - ybar)).sum();

    OlsFit fit;
    fit.beta = sxy / sxx;
    fit.alpha = ybar - fit.beta * xbar;
    fit.residuals = y.array() - fit.alpha - fit.beta * x.array();

    const double dof = double(t_len) - 2.0;
    const double sigma2 = fit.residuals.squaredNorm() / dof;
    const double se_beta = std::sqrt(sigma2 / sxx);
    const double se_alpha =
        std::sqrt(sigma2 * (1.0 / double(t_len) + xbar * xbar / sxx));

    auto two_sided = [&](double coef, double se) {
        if (!(se > 0.0)) return coef == 0.0 ? 1.0 : 0.0;
        const double t = coef / se;
        return 2.0 * (1.0 - student_t_cdf(std::abs(t), dof));
    };
    fit.p_beta = two_sided(fit.beta, se_beta);
    fit.p_alpha = two_sided(fit.alpha, se_alpha);
    return fit;
}

namespace {

inline double soft_threshold(double u, double t) {
    if (u > t) return u - t;
    if (u < -t) return u + t;
    return 0.0;
}

// Coordinate descent in covariance form: gram = Xc'Xc/T, xy = Xc'yc/T on
// centered data. Each sweep costs O(M^2) independent of T.
struct CdProblem {
    Eigen::MatrixXd gram;
    Eigen::VectorXd xy;
    double yty = 0.0;  // yc'yc / T
    Eigen::Index t_len = 0;

    double objective(const Eigen::VectorXd& beta, double a, double lambda) const {
        const double quad = beta.dot(gram * beta);
        const double fit = 0.5 * (yty - 2.0 * xy.dot(beta) + quad);
        const double pen = lambda * ((1.0 - a) * 0.5 * beta.squaredNorm() +
                                     a * beta.cwiseAbs().sum());
        return fit + pen;
    }
};

CdProblem make_problem(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                       Eigen::VectorXd* x_means, double* y_mean,
                       const ElasticNetOptions& opts = {}) {
    CdProblem p;
    p.t_len = y.size();
    const double t = double(p.t_len);
    const Eigen::VectorXd mx = X.colwise().mean();
    const double my = y.mean();
    const Eigen::MatrixXd Xc = X.rowwise() - mx.transpose();
    const Eigen::VectorXd yc = y.array() - my;
    p.gram = (Xc.transpose() * Xc) / t;
    p.xy = (Xc.transpose() * yc) / t;
    p.yty = yc.squaredNorm() / t;
    if (opts.gram_ridge) {
        if (opts.gram_ridge->rows() != X.cols() || opts.gram_ridge->cols() != X.cols()) {
            throw std::invalid_argument("elastic net: gram_ridge shape mismatch");
        }
        p.gram += *opts.gram_ridge;
    }
    if (x_means) *x_means = mx;
    if (y_mean) *y_mean = my;
    return p;
}

Eigen::VectorXd cd_solve(const CdProblem& p, double a, double lambda,
                         const ElasticNetOptions& opts, Eigen::VectorXd beta,
                         long* sweeps_taken = nullptr) {
    const Eigen::Index m = p.gram.rows();
    if (beta.size() != m) beta = Eigen::VectorXd::Zero(m);
    const double l1 = lambda * a;
    const double l2 = lambda * (1.0 - a);

    double prev_obj = p.objective(beta, a, lambda);
    for (long sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            const double vj = p.gram(j, j);
            if (!(vj > 0.0)) {
                // Zero-variance column: coefficient pinned to zero.
                if (beta(j) != 0.0) {
                    max_change = std::max(max_change, std::abs(beta(j)));
                    beta(j) = 0.0;
                }
                continue;
            }
            const double rho = p.xy(j) - p.gram.row(j).dot(beta) + vj * beta(j);
            const double updated = soft_threshold(rho, l1) / (vj + l2);
            max_change = std::max(max_change, std::abs(updated - beta(j)));
            beta(j) = updated;
        }
        if (sweep % 100 == 0) {
            const double obj = p.objective(beta, a, lambda);
            if (obj > prev_obj + 1e-10 * std::max(1.0, std::abs(prev_obj))) {
                throw std::logic_error("elastic net objective increased across sweeps");
            }
            prev_obj = obj;
        }
        if (max_change < opts.tol) {
            if (sweeps_taken) *sweeps_taken = sweep;
            return beta;
        }
    }
    throw ElasticNetConvergenceError(
        "elastic net did not converge within " + std::to_string(opts.max_sweeps) + " sweeps",
        std::move(beta));
}

void check_standardized_columns(const Eigen::MatrixXd& X, double tol) {
    if (tol < 0.0) return;
    const double t = double(X.rows());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double mean = X.col(j).mean();
        const double var = X.col(j).squaredNorm() / t - mean * mean;
        if (std::abs(mean) > tol || std::abs(var - 1.0) > tol) {
            throw std::invalid_argument("elastic net: column " + std::to_string(j) +
                                        " not standardized (mean 0, variance 1)");
        }
    }
}

}  // namespace

ElasticNetSolution elastic_net_solve(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                     double a, double lambda, const ElasticNetOptions& opts) {
    if (y.size() != X.rows()) {
        throw std::invalid_argument("elastic_net_solve: length mismatch");
    }
    if (y.size() < 2) {
        throw std::invalid_argument("elastic_net_solve: need T >= 2");
    }
    if (a < 0.0 || a > 1.0 || lambda < 0.0) {
        throw std::invalid_argument("elastic_net_solve: a in [0,1], lambda >= 0 required");
    }
    check_standardized_columns(X, opts.column_check_tol);

    Eigen::VectorXd x_means;
    double y_mean = 0.0;
    const CdProblem p = make_problem(y, X, &x_means, &y_mean, opts);
    ElasticNetSolution sol;
    sol.betas = cd_solve(p, a, lambda, opts, Eigen::VectorXd::Zero(X.cols()), &sol.sweeps);
    sol.intercept = y_mean - x_means.dot(sol.betas);
    return sol;
}

std::vector<double> default_a_grid() {
    std::vector<double> a(11);
    for (int i = 0; i <= 10; ++i) a[static_cast<std::size_t>(i)] = 0.1 * i;
    return a;
}

std::vector<double> default_lambda_grid(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                        int n, double min_ratio) {
    if (n < 1 || !(min_ratio > 0.0) || min_ratio >= 1.0) {
        throw std::invalid_argument("default_lambda_grid: bad grid parameters");
    }
    const CdProblem p = make_problem(y, X, nullptr, nullptr);
    double lambda_max = p.xy.cwiseAbs().maxCoeff();
    if (!(lambda_max > 0.0)) lambda_max = 1.0;  // degenerate: y orthogonal to all columns
    std::vector<double> grid(static_cast<std::size_t>(n));
    if (n == 1) {
        grid[0] = lambda_max;
        return grid;
    }
    const double log_hi = std::log(lambda_max);
    const double log_lo = std::log(lambda_max * min_ratio);
    for (int i = 0; i < n; ++i) {
        const double f = double(i) / double(n - 1);
        grid[static_cast<std::size_t>(i)] = std::exp(log_hi + f * (log_lo - log_hi));
    }
    return grid;
}

ElasticNetFit elastic_net_cv(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                             std::vector<double> a_grid, std::vector<double> lambda_grid,
                             int folds, const ElasticNetOptions& opts) {
    const Eigen::Index t_len = y.size();
    const Eigen::Index m = X.cols();
    if (X.rows() != t_len) {
        throw std::invalid_argument("elastic_net_cv: length mismatch");
    }
    if (folds < 2) {
        throw std::invalid_argument("elastic_net_cv: need folds >= 2");
    }
    if (t_len / folds < 2) {
        throw std::invalid_argument("elastic_net_cv: fold size < 2");
    }
    if (a_grid.empty()) a_grid = default_a_grid();
    if (lambda_grid.empty()) lambda_grid = default_lambda_grid(y, X);
    check_standardized_columns(X, opts.column_check_tol);

    // Descending lambda for warm starts along the path.
    std::sort(lambda_grid.begin(), lambda_grid.end(), std::greater<double>());

    // Contiguous time blocks.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;
    for (int f = 0; f < folds; ++f) {
        const Eigen::Index lo = t_len * f / folds;
        const Eigen::Index hi = t_len * (f + 1) / folds;
        blocks.emplace_back(lo, hi);
    }

    struct FoldData {
        CdProblem problem;
        Eigen::VectorXd x_means;
        double y_mean = 0.0;
        Eigen::MatrixXd x_test;
        Eigen::VectorXd y_test;
    };
    std::vector<FoldData> fold_data;
    fold_data.reserve(static_cast<std::size_t>(folds));
    for (const auto& [lo, hi] : blocks) {
        const Eigen::Index n_test = hi - lo;
        const Eigen::Index n_train = t_len - n_test;
        Eigen::MatrixXd x_train(n_train, m);
        Eigen::VectorXd y_train(n_train);
        x_train.topRows(lo) = X.topRows(lo);
        y_train.head(lo) = y.head(lo);
        x_train.bottomRows(t_len - hi) = X.bottomRows(t_len - hi);
        y_train.tail(t_len - hi) = y.tail(t_len - hi);

        FoldData fd;
        fd.problem = make_problem(y_train, x_train, &fd.x_means, &fd.y_mean, opts);
        fd.x_test = X.middleRows(lo, n_test);
        fd.y_test = y.segment(lo, n_test);
        fold_data.push_back(std::move(fd));
    }

    struct GridPoint {
        double a = 0.0;
        double lambda = 0.0;
        double err = 0.0;  // mean of per-fold MSEs
    };
    std::vector<GridPoint> grid_points;
    grid_points.reserve(a_grid.size() * lambda_grid.size());

    for (double a : a_grid) {
        std::vector<Eigen::VectorXd> warm(fold_data.size(), Eigen::VectorXd::Zero(m));
        for (double lambda : lambda_grid) {
            std::vector<double> fold_mse;
            fold_mse.reserve(fold_data.size());
            for (std::size_t f = 0; f < fold_data.size(); ++f) {
                const auto& fd = fold_data[f];
                warm[f] = cd_solve(fd.problem, a, lambda, opts, std::move(warm[f]));
                const double intercept = fd.y_mean - fd.x_means.dot(warm[f]);
                const Eigen::VectorXd pred =
                    (fd.x_test * warm[f]).array() + intercept;
                fold_mse.push_back((fd.y_test - pred).squaredNorm() /
                                   double(fd.y_test.size()));
            }
            GridPoint p;
            p.a = a;
            p.lambda = lambda;
            for (double mse : fold_mse) p.err += mse;
            p.err /= double(fold_mse.size());
            grid_points.push_back(p);
        }
    }

    // Minimum mean out-of-fold error; exact ties break toward the sparser
    // model (larger lambda, then larger a).
    const GridPoint* chosen = &grid_points.front();
    for (const auto& p : grid_points) {
        if (p.err < chosen->err ||
            (p.err == chosen->err &&
             (p.lambda > chosen->lambda ||
              (p.lambda == chosen->lambda && p.a > chosen->a)))) {
            chosen = &p;
        }
    }
    const double best_a = chosen->a;
    const double best_lambda = chosen->lambda;
    const double best_err = chosen->err;

    ElasticNetOptions full_opts = opts;
    const ElasticNetSolution sol = elastic_net_solve(y, X, best_a, best_lambda, full_opts);
    ElasticNetFit fit;
    fit.betas = sol.betas;
    fit.intercept = sol.intercept;
    fit.a = best_a;
    fit.lambda = best_lambda;
    fit.cv_error = best_err;
    fit.p_values = Eigen::VectorXd::Constant(m, 1.0);
    return fit;
}

Eigen::VectorXd predictor_significance(const ElasticNetFit& fit, const Eigen::VectorXd& y,
                                       const Eigen::MatrixXd& X, int n_perm,
                                       std::uint64_t seed,
                                       const ElasticNetOptions& options) {
    if (n_perm < 99) {
        throw std::invalid_argument("predictor_significance: need n_perm >= 99");
    }
    const Eigen::Index t_len = y.size();
    const Eigen::Index m = X.cols();
    if (X.rows() != t_len || fit.betas.size() != m) {
        throw std::invalid_argument("predictor_significance: shape mismatch");
    }
    ElasticNetOptions opts = options;
    opts.column_check_tol = -1.0;  // circular shifts preserve standardization exactly

    Eigen::VectorXd p_values = Eigen::VectorXd::Constant(m, 1.0);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> offset_dist(1, t_len - 1);

    Eigen::MatrixXd x_perm = X;
    for (Eigen::Index j = 0; j < m; ++j) {
        if (fit.betas(j) == 0.0) {
            continue;  // unselected predictor: p = 1 by convention
        }
        const double observed = std::abs(fit.betas(j));
        int count = 0;
        for (int r = 0; r < n_perm; ++r) {
            const Eigen::Index off = offset_dist(rng);
            for (Eigen::Index t = 0; t < t_len; ++t) {
                x_perm(t, j) = X((t + off) % t_len, j);
            }
            const ElasticNetSolution sol =
                elastic_net_solve(y, x_perm, fit.a, fit.lambda, opts);
            if (std::abs(sol.betas(j)) >= observed) {
                ++count;
            }
        }
        x_perm.col(j) = X.col(j);
        p_values(j) = double(1 + count) / double(n_perm + 1);
    }
    return p_values;
}

}  // namespace logvol
