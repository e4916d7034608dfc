#include "logvol/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "logvol/memory_metrics.hpp"

namespace logvol {

PcaDecomposition pca_decompose(const CorrelationMatrix& E) {
    const Eigen::Index n = E.size();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(E.values);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("pca_decompose: eigensolver failed");
    }
    PcaDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.eigenvalues(i) = solver.eigenvalues()(n - 1 - i);
        out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    return out;
}

Eigen::MatrixXd pca_residual_panel(const Eigen::MatrixXd& omega, int n_components) {
    const Eigen::Index n = omega.rows();
    if (n_components < 1 || n_components >= n) {
        throw std::invalid_argument("pca_residual_panel: need 1 <= F < N");
    }
    const CorrelationMatrix E = correlation(omega);
    const PcaDecomposition pca = pca_decompose(E);
    const Eigen::MatrixXd V = pca.eigenvectors.leftCols(n_components);
    // Scores are the component time series V' omega; the reconstruction is
    // the projection V V' omega in stock space.
    return omega - V * (V.transpose() * omega);
}

namespace {

double varimax_criterion(const Eigen::MatrixXd& L) {
    const double n = double(L.rows());
    double crit = 0.0;
    for (Eigen::Index j = 0; j < L.cols(); ++j) {
        const Eigen::ArrayXd sq = L.col(j).array().square();
        const double s2 = sq.sum();
        crit += sq.square().sum() - s2 * s2 / n;
    }
    return crit;
}

}  // namespace

VarimaxResult varimax(const Eigen::MatrixXd& loadings, double tol, int max_sweeps) {
    const Eigen::Index f = loadings.cols();
    VarimaxResult out;
    out.rotated = loadings;
    out.rotation = Eigen::MatrixXd::Identity(f, f);
    out.criterion = varimax_criterion(out.rotated);
    if (f < 2) {
        return out;
    }
    const double n = double(loadings.rows());

    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        const double before = out.criterion;
        for (Eigen::Index p = 0; p < f; ++p) {
            for (Eigen::Index q = p + 1; q < f; ++q) {
                const Eigen::ArrayXd x = out.rotated.col(p).array();
                const Eigen::ArrayXd y = out.rotated.col(q).array();
                const Eigen::ArrayXd u = x.square() - y.square();
                const Eigen::ArrayXd v = 2.0 * x * y;
                const double a = u.sum();
                const double b = v.sum();
                const double c = (u.square() - v.square()).sum();
                const double d = 2.0 * (u * v).sum();
                const double num = d - 2.0 * a * b / n;
                const double den = c - (a * a - b * b) / n;
                if (num == 0.0 && den == 0.0) continue;
                const double phi = 0.25 * std::atan2(num, den);
                if (std::abs(phi) < 1e-14) continue;
                const double cs = std::cos(phi);
                const double sn = std::sin(phi);
                Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(f, f);
                rot(p, p) = cs;
                rot(q, q) = cs;
                rot(p, q) = -sn;
                rot(q, p) = sn;
                out.rotated = out.rotated * rot;
                out.rotation = out.rotation * rot;
            }
        }
        out.criterion = varimax_criterion(out.rotated);
        out.sweeps = sweep;
        if (out.criterion < before - 1e-9 * std::max(1.0, std::abs(before))) {
            throw std::logic_error("varimax criterion decreased across a sweep");
        }
        if (out.criterion - before <= tol * std::max(1.0, std::abs(before))) {
            break;
        }
    }
    return out;
}

FaResult fa_fit_varimax(const Eigen::MatrixXd& omega, int n_factors) {
    const Eigen::Index n = omega.rows();
    if (n_factors < 1 || 2 * n_factors >= n) {
        throw std::invalid_argument("fa_fit_varimax: need 1 <= F < N/2");
    }
    const CorrelationMatrix E = correlation(omega);

    // Initial communalities: max absolute off-diagonal row correlation.
    Eigen::VectorXd communality(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double best = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) best = std::max(best, std::abs(E.values(i, j)));
        }
        communality(i) = best;
    }

    bool heywood = false;
    Eigen::MatrixXd loadings;
    int iterations = 0;
    for (int iter = 1; iter <= 200; ++iter) {
        iterations = iter;
        Eigen::MatrixXd reduced = E.values;
        reduced.diagonal() = communality;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(reduced);
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("fa_fit_varimax: eigensolver failed");
        }
        loadings.resize(n, n_factors);
        for (int m = 0; m < n_factors; ++m) {
            const Eigen::Index idx = n - 1 - m;
            const double lam = std::max(0.0, solver.eigenvalues()(idx));
            loadings.col(m) = solver.eigenvectors().col(idx) * std::sqrt(lam);
        }
        Eigen::VectorXd updated = loadings.array().square().rowwise().sum().matrix();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (updated(i) > 1.0) {
                updated(i) = 1.0 - 1e-6;  // Heywood case
                heywood = true;
            }
        }
        const double change = (updated - communality).cwiseAbs().maxCoeff();
        communality = updated;
        if (change < 1e-6) break;
    }

    const VarimaxResult rot = varimax(loadings);

    FaResult out;
    out.loading_matrix.loadings = rot.rotated;
    out.loading_matrix.n_factors = n_factors;
    out.loading_matrix.heywood_flagged = heywood;
    out.loading_matrix.uniquenesses =
        (1.0 - rot.rotated.array().square().rowwise().sum()).cwiseMax(0.0).matrix();
    out.iterations = iterations;

    // Thomson regression scores: F(t) = L' E^{-1} omega(t).
    Eigen::LDLT<Eigen::MatrixXd> ldlt(E.values);
    if (ldlt.info() != Eigen::Success) {
        throw std::runtime_error("fa_fit_varimax: correlation matrix not factorizable");
    }
    const Eigen::MatrixXd weights = ldlt.solve(rot.rotated);  // N x F
    out.scores = weights.transpose() * omega;                 // F x T
    out.residual = omega - rot.rotated * out.scores;
    return out;
}

std::vector<CdfPoint> residual_memory_cdf(const Eigen::MatrixXd& residual_panel,
                                          const Eigen::VectorXd& baseline_eta) {
    const Eigen::Index n = residual_panel.rows();
    if (baseline_eta.size() != n) {
        throw std::invalid_argument("residual_memory_cdf: baseline size mismatch");
    }
    std::vector<double> fractions;
    fractions.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(baseline_eta(i) > 0.0)) continue;
        const MemoryProfile p = memory_profile(residual_panel.row(i).transpose());
        fractions.push_back(std::max(0.0, p.eta / baseline_eta(i)));
    }
    std::sort(fractions.begin(), fractions.end());
    std::vector<CdfPoint> cdf;
    cdf.reserve(fractions.size());
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        cdf.push_back({fractions[i], double(i + 1) / double(fractions.size())});
    }
    return cdf;
}

}  // namespace logvol
