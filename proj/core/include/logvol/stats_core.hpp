#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace logvol {

// Labeled correlation matrix: symmetric, unit diagonal, entries in [-1, 1].
struct CorrelationMatrix {
    std::vector<std::string> labels;
    Eigen::MatrixXd values;

    Eigen::Index size() const { return values.rows(); }
    void validate(double tol = 1e-12) const;
};

enum class WeightScheme { eigen, equal };

// Mode weights: equal scheme is exactly 1/N per stock; eigen scheme is the
// unit-norm leading eigenvector with sign fixed so the entry sum is >= 0.
struct WeightVector {
    Eigen::VectorXd weights;
    WeightScheme scheme = WeightScheme::equal;
};

// z-score with the population convention (variance normalized by n), so a
// standardized row x satisfies (1/n) sum x_t^2 = 1 exactly. Throws on zero
// variance, naming `label` when given.
Eigen::VectorXd standardize(const Eigen::VectorXd& x, const std::string& label = {});

// Standardizes each row in place; returns the per-row population sigmas.
Eigen::VectorXd standardize_rows(Eigen::MatrixXd& rows,
                                 const std::vector<std::string>& labels = {});

// values[i][j] = (1/T) sum_t row_i(t) row_j(t) over standardized rows, with
// the diagonal renormalized to exactly 1. Rows must be standardized within
// `check_tol` (mean 0, population variance 1) or the offending row is named.
CorrelationMatrix correlation(const Eigen::MatrixXd& rows,
                              std::vector<std::string> labels = {},
                              double check_tol = 1e-8);

// Mean of row i excluding the diagonal.
double avg_cross_correlation(const CorrelationMatrix& E, Eigen::Index i);

enum class Alternative { two_sided, greater, less };

struct SpearmanResult {
    double rho = 0.0;
    double p = 1.0;
};

// Spearman rank correlation (average ranks on ties) with the large-sample
// t approximation on n-2 degrees of freedom. Throws on constant input.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y,
                        Alternative alternative);

struct MedianMad {
    double median = 0.0;
    double mad = 0.0;
};

// Median with the midpoint convention for even lengths; mad = median(|v - median|).
double median(std::vector<double> values);
MedianMad median_mad(std::vector<double> values);

// One-sided over-representation p-value P[X >= x] for X hypergeometric with
// `population` items, `special` marked, `draws` drawn. Log-gamma accumulation,
// stable for populations up to 1e6.
double hypergeometric_enrichment(std::int64_t population, std::int64_t special,
                                 std::int64_t draws, std::int64_t observed);

struct LeadingEigen {
    double lambda_max = 0.0;
    WeightVector v;
};

// Largest eigenvalue and its sign-fixed unit eigenvector. The residual
// ||Cv - lambda v||_inf <= 1e-8 is verified before returning.
LeadingEigen leading_eigenvector(const CorrelationMatrix& C);

// Principal submatrix restricted to `members` (kept in the given order).
CorrelationMatrix cluster_submatrix(const CorrelationMatrix& G,
                                    const std::vector<Eigen::Index>& members);

WeightVector equal_weights(Eigen::Index n);
WeightVector eigen_weights(const CorrelationMatrix& C);

// Writes the matrix as labeled delimited text (tab-separated, row and column
// headers), the format used for heat-map data exports.
void save_correlation(const CorrelationMatrix& C, const std::string& path);

// --- shared distribution kernels -------------------------------------------

double normal_cdf(double z);
// Inverse standard normal CDF; |error| < 1e-13 after the refinement step.
double normal_quantile(double p);
// P(T <= t) for Student's t with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);
// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);
// Average ranks (1-based), ties get the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace logvol
