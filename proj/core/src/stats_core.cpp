#include "logvol/stats_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace logvol {

namespace {

std::string row_name(const std::vector<std::string>& labels, Eigen::Index i) {
    if (i >= 0 && static_cast<std::size_t>(i) < labels.size()) {
        return labels[static_cast<std::size_t>(i)];
    }
    return "row " + std::to_string(i);
}

double log_choose(std::int64_t n, std::int64_t k) {
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

}  // namespace

void CorrelationMatrix::validate(double tol) const {
    const Eigen::Index n = values.rows();
    if (values.cols() != n) {
        throw std::invalid_argument("CorrelationMatrix: not square");
    }
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != n) {
        throw std::invalid_argument("CorrelationMatrix: label count mismatch");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(values(i, i) - 1.0) > tol) {
            throw std::invalid_argument("CorrelationMatrix: non-unit diagonal at " +
                                        row_name(labels, i));
        }
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (std::abs(values(i, j) - values(j, i)) > tol) {
                throw std::invalid_argument("CorrelationMatrix: asymmetry at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            }
            if (values(i, j) < -1.0 - tol || values(i, j) > 1.0 + tol) {
                throw std::invalid_argument("CorrelationMatrix: entry out of [-1,1]");
            }
        }
    }
}

Eigen::VectorXd standardize(const Eigen::VectorXd& x, const std::string& label) {
    const double n = static_cast<double>(x.size());
    if (x.size() < 2) {
        throw std::invalid_argument("standardize: need at least 2 samples" +
                                    (label.empty() ? "" : " (" + label + ")"));
    }
    const double mean = x.mean();
    const double var = (x.array() - mean).square().sum() / n;
    if (!(var > 0.0)) {
        throw std::runtime_error("standardize: zero variance" +
                                 (label.empty() ? "" : " for " + label));
    }
    return (x.array() - mean) / std::sqrt(var);
}

Eigen::VectorXd standardize_rows(Eigen::MatrixXd& rows, const std::vector<std::string>& labels) {
    Eigen::VectorXd sigmas(rows.rows());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        const double n = static_cast<double>(rows.cols());
        const double mean = rows.row(i).mean();
        const double var = (rows.row(i).array() - mean).square().sum() / n;
        if (!(var > 0.0)) {
            throw std::runtime_error("standardize: zero variance for " + row_name(labels, i));
        }
        const double sigma = std::sqrt(var);
        rows.row(i) = (rows.row(i).array() - mean) / sigma;
        sigmas(i) = sigma;
    }
    return sigmas;
}

CorrelationMatrix correlation(const Eigen::MatrixXd& rows, std::vector<std::string> labels,
                              double check_tol) {
    const Eigen::Index n = rows.rows();
    const Eigen::Index t_len = rows.cols();
    if (t_len < 2) {
        throw std::invalid_argument("correlation: need T >= 2");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mean = rows.row(i).mean();
        const double var = rows.row(i).squaredNorm() / double(t_len) - mean * mean;
        if (std::abs(mean) > check_tol || std::abs(var - 1.0) > check_tol) {
            throw std::invalid_argument("correlation: row not standardized: " +
                                        row_name(labels, i));
        }
    }
    CorrelationMatrix out;
    out.labels = std::move(labels);
    out.values = (rows * rows.transpose()) / double(t_len);
    // The diagonal is the standardized variance; pin it to exactly 1.
    out.values.diagonal().setOnes();
    out.values = ((out.values + out.values.transpose()) * 0.5).eval();
    return out;
}

double avg_cross_correlation(const CorrelationMatrix& E, Eigen::Index i) {
    const Eigen::Index n = E.size();
    if (n < 2) {
        throw std::invalid_argument("avg_cross_correlation: need N >= 2");
    }
    if (i < 0 || i >= n) {
        throw std::out_of_range("avg_cross_correlation: index out of range");
    }
    return (E.values.row(i).sum() - E.values(i, i)) / double(n - 1);
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * (double(i + 1) + double(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y,
                        Alternative alternative) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("spearman: length mismatch");
    }
    const std::size_t n = x.size();
    if (n < 3) {
        throw std::invalid_argument("spearman: need n >= 3");
    }
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);

    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / double(n);
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / double(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        throw std::runtime_error("spearman: constant input vector (degenerate ranks)");
    }
    double rho = sxy / std::sqrt(sxx * syy);
    rho = std::clamp(rho, -1.0, 1.0);

    const double dof = double(n) - 2.0;
    double p_greater;
    if (rho >= 1.0) {
        p_greater = 0.0;
    } else if (rho <= -1.0) {
        p_greater = 1.0;
    } else {
        const double t = rho * std::sqrt(dof / (1.0 - rho * rho));
        p_greater = 1.0 - student_t_cdf(t, dof);
    }
    SpearmanResult out;
    out.rho = rho;
    switch (alternative) {
        case Alternative::greater: out.p = p_greater; break;
        case Alternative::less: out.p = 1.0 - p_greater; break;
        case Alternative::two_sided: out.p = 2.0 * std::min(p_greater, 1.0 - p_greater); break;
    }
    out.p = std::clamp(out.p, 0.0, 1.0);
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("median: empty input");
    }
    const std::size_t n = values.size();
    const std::size_t mid = n / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double m = values[mid];
    if (n % 2 == 0) {
        const double lower = *std::max_element(values.begin(), values.begin() + mid);
        m = 0.5 * (lower + m);
    }
    return m;
}

MedianMad median_mad(std::vector<double> values) {
    MedianMad out;
    out.median = median(values);
    for (auto& v : values) v = std::abs(v - out.median);
    out.mad = median(std::move(values));
    return out;
}

double hypergeometric_enrichment(std::int64_t population, std::int64_t special,
                                 std::int64_t draws, std::int64_t observed) {
    if (population < 0 || special < 0 || draws < 0 || special > population ||
        draws > population) {
        throw std::invalid_argument("hypergeometric_enrichment: impossible parameters");
    }
    if (observed < 0 || observed > std::min(special, draws)) {
        throw std::invalid_argument("hypergeometric_enrichment: observed outside [0, min(K,n)]");
    }
    const std::int64_t support_lo =
        std::max<std::int64_t>(0, draws - (population - special));
    const std::int64_t hi = std::min(special, draws);
    if (observed <= support_lo) return 1.0;  // the tail covers the whole support
    const std::int64_t lo = observed;

    const double log_denom = log_choose(population, draws);
    // Accumulate in log space with a running max shift.
    double max_log = -std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t k = lo; k <= hi; ++k) {
        const double lg =
            log_choose(special, k) + log_choose(population - special, draws - k) - log_denom;
        logs.push_back(lg);
        max_log = std::max(max_log, lg);
    }
    double sum = 0.0;
    for (double lg : logs) sum += std::exp(lg - max_log);
    const double p = std::exp(max_log) * sum;
    return std::min(p, 1.0);
}

LeadingEigen leading_eigenvector(const CorrelationMatrix& C) {
    const Eigen::Index n = C.size();
    if (n < 1) {
        throw std::invalid_argument("leading_eigenvector: empty matrix");
    }
    if (!C.values.isApprox(C.values.transpose(), 1e-10)) {
        throw std::invalid_argument("leading_eigenvector: matrix not symmetric");
    }
    const Eigen::MatrixXd sym = 0.5 * (C.values + C.values.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("leading_eigenvector: eigensolver did not converge");
    }
    LeadingEigen out;
    out.lambda_max = solver.eigenvalues()(n - 1);
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1);
    v.normalize();
    double s = v.sum();
    if (s < 0.0 || (s == 0.0 && v(0) < 0.0)) {
        v = -v;
    }
    const double residual = (sym * v - out.lambda_max * v).cwiseAbs().maxCoeff();
    if (residual > 1e-8) {
        throw std::runtime_error("leading_eigenvector: residual bound violated (" +
                                 std::to_string(residual) + ")");
    }
    out.v.weights = std::move(v);
    out.v.scheme = WeightScheme::eigen;
    return out;
}

CorrelationMatrix cluster_submatrix(const CorrelationMatrix& G,
                                    const std::vector<Eigen::Index>& members) {
    if (members.empty()) {
        throw std::invalid_argument("cluster_submatrix: empty member set");
    }
    const Eigen::Index n = G.size();
    for (Eigen::Index idx : members) {
        if (idx < 0 || idx >= n) {
            throw std::out_of_range("cluster_submatrix: member index out of range");
        }
    }
    CorrelationMatrix out;
    const Eigen::Index m = static_cast<Eigen::Index>(members.size());
    out.values.resize(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            out.values(a, b) = G.values(members[static_cast<std::size_t>(a)],
                                        members[static_cast<std::size_t>(b)]);
        }
    }
    if (!G.labels.empty()) {
        for (Eigen::Index a = 0; a < m; ++a) {
            out.labels.push_back(G.labels[static_cast<std::size_t>(members[static_cast<std::size_t>(a)])]);
        }
    }
    return out;
}

WeightVector equal_weights(Eigen::Index n) {
    if (n < 1) {
        throw std::invalid_argument("equal_weights: need n >= 1");
    }
    WeightVector w;
    w.scheme = WeightScheme::equal;
    w.weights = Eigen::VectorXd::Constant(n, 1.0 / double(n));
    return w;
}

WeightVector eigen_weights(const CorrelationMatrix& C) {
    return leading_eigenvector(C).v;
}

void save_correlation(const CorrelationMatrix& C, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    const Eigen::Index n = C.size();
    auto label = [&](Eigen::Index i) {
        return C.labels.empty() ? "v" + std::to_string(i)
                                : C.labels[static_cast<std::size_t>(i)];
    };
    out << "label";
    for (Eigen::Index j = 0; j < n; ++j) out << '\t' << label(j);
    out << '\n';
    char buf[32];
    for (Eigen::Index i = 0; i < n; ++i) {
        out << label(i);
        for (Eigen::Index j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof(buf), "%.10g", C.values(i, j));
            out << '\t' << buf;
        }
        out << '\n';
    }
}

// --- distribution kernels ----------------------------------------------------

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("normal_quantile: p must be in (0,1)");
    }
    // Acklam's rational approximation followed by one Halley refinement.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley step.
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

namespace {

// Continued fraction for the incomplete beta function (Lentz's method).
double beta_cf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
    if (dof <= 0.0) {
        throw std::invalid_argument("student_t_cdf: dof must be positive");
    }
    if (t == 0.0) return 0.5;
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

}  // namespace logvol
