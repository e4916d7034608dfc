#include <doctest.h>

#include <cmath>
#include <random>

#include "logvol/memory_metrics.hpp"
#include "logvol/stats_core.hpp"
#include "logvol/synth.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace logvol;

namespace {

Eigen::VectorXd ar1_series(int t_len, double phi, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd x(t_len);
    x(0) = g(rng) / std::sqrt(1.0 - phi * phi);
    for (int t = 1; t < t_len; ++t) x(t) = phi * x(t - 1) + g(rng);
    return x;
}

}  // namespace

TEST_SUITE("memory_metrics") {

TEST_CASE("white noise has a flat ACF") {
    std::mt19937_64 rng(41);
    const Eigen::VectorXd s = fixtures::zscore(fixtures::gaussian_vector(10000, rng));
    const Eigen::VectorXd kappa = acf(s, 100);
    CHECK(kappa.cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("AR(1) ACF at lag 1 is phi") {
    std::mt19937_64 rng(42);
    const Eigen::VectorXd s = fixtures::zscore(ar1_series(100000, 0.5, rng));
    const Eigen::VectorXd kappa = acf(s, 10);
    CHECK(kappa(0) == doctest::Approx(0.5).epsilon(0.02));  // analytic +/- MC noise
}

TEST_CASE("period-2 pattern has ACF near 1 at lag 2") {
    Eigen::VectorXd s(1000);
    for (int t = 0; t < 1000; ++t) s(t) = (t % 2 == 0) ? 1.0 : -1.0;
    const Eigen::VectorXd kappa = acf(fixtures::zscore(s), 4);
    CHECK(kappa(1) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("acf validates the lag bound") {
    std::mt19937_64 rng(43);
    const Eigen::VectorXd s = fixtures::gaussian_vector(50, rng);
    CHECK_THROWS_AS(acf(s, 50), std::invalid_argument);
    CHECK_THROWS_AS(acf(s, 0), std::invalid_argument);
}

TEST_CASE("bartlett cut: all-zero ACF cuts immediately") {
    const Eigen::VectorXd kappa = Eigen::VectorXd::Zero(20);
    const BartlettCut cut = bartlett_cut(kappa, 10000, 0.05);
    CHECK(cut.l_cut == 1);
    CHECK_FALSE(cut.truncated);
}

TEST_CASE("bartlett cut: white noise cuts early in >= 95% of seeds") {
    int early = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        std::mt19937_64 rng(seed);
        const Eigen::VectorXd s = fixtures::zscore(fixtures::gaussian_vector(2000, rng));
        const Eigen::VectorXd kappa = acf(s, 200);
        const BartlettCut cut = bartlett_cut(kappa, 2000, 0.05);
        if (cut.l_cut <= 5) ++early;
    }
    CHECK(early >= 190);
}

TEST_CASE("bartlett cut grows with planted memory strength") {
    std::vector<int> cuts;
    for (double strength : {0.3, 0.6, 0.9}) {
        std::mt19937_64 rng(44);
        const Eigen::VectorXd s = long_memory_series(20000, strength, rng);
        const Eigen::VectorXd kappa = acf(fixtures::zscore(s), 1000);
        cuts.push_back(bartlett_cut(kappa, 20000, 0.05).l_cut);
    }
    CHECK(cuts[0] < cuts[1]);
    CHECK(cuts[1] < cuts[2]);
}

TEST_CASE("bartlett cut truncates when nothing falls below the band") {
    const Eigen::VectorXd kappa = Eigen::VectorXd::Constant(15, 0.9);
    const BartlettCut cut = bartlett_cut(kappa, 10000, 0.05);
    CHECK(cut.l_cut == 15);
    CHECK(cut.truncated);
}

TEST_CASE("theil-sen: exact power law gives the exact exponent") {
    Eigen::VectorXd kappa(100);
    for (int lag = 1; lag <= 100; ++lag) kappa(lag - 1) = std::pow(double(lag), -0.5);
    CHECK(theil_sen_loglog(kappa, 1, 100) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("theil-sen: known pairwise slope median") {
    // Points (1,1), (2,2), (3,10): slopes {1, 4.5, 8}, median 4.5.
    const std::vector<double> xs{1.0, 2.0, 3.0};
    const std::vector<double> ys{1.0, 2.0, 10.0};
    CHECK(theil_sen_slope(xs, ys) == doctest::Approx(4.5));
    CHECK(theil_sen_slope(xs, ys) == doctest::Approx(oracle::theil_sen_all_pairs(xs, ys)));
}

TEST_CASE("theil-sen equals the all-pairs oracle on 100 random fixtures") {
    std::mt19937_64 rng(45);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng() % 49);
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = double(i) + 1.0;  // distinct x
            ys[i] = -0.7 * xs[i] + g(rng);
        }
        CHECK(theil_sen_slope(xs, ys) == oracle::theil_sen_all_pairs(xs, ys));
    }
}

TEST_CASE("theil-sen robustness: removing any single point moves the fit < 20%") {
    std::mt19937_64 rng(46);
    std::normal_distribution<double> g(0.0, 0.05);
    const int n = 15;
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
        xs[static_cast<std::size_t>(i)] = std::log(double(i + 1));
        ys[static_cast<std::size_t>(i)] = -0.5 * xs[static_cast<std::size_t>(i)] + g(rng);
    }
    const double full = oracle::theil_sen_all_pairs(xs, ys);
    for (int drop = 0; drop < n; ++drop) {
        std::vector<double> x2, y2;
        for (int i = 0; i < n; ++i) {
            if (i != drop) {
                x2.push_back(xs[static_cast<std::size_t>(i)]);
                y2.push_back(ys[static_cast<std::size_t>(i)]);
            }
        }
        const double reduced = theil_sen_slope(x2, y2);
        CHECK(std::abs(reduced - full) < 0.2 * std::abs(full));
    }
}

TEST_CASE("theil-sen needs two positive points") {
    Eigen::VectorXd kappa(5);
    kappa << 0.5, -0.1, -0.2, -0.1, -0.3;
    CHECK_THROWS_AS(theil_sen_loglog(kappa, 1, 5), std::runtime_error);
}

TEST_CASE("eta: constant ACF integrates to c * (l_cut - 1)") {
    const Eigen::VectorXd kappa = Eigen::VectorXd::Constant(30, 0.2);
    const EtaResult e = eta(kappa, 30);
    CHECK(e.eta == doctest::Approx(0.2 * 29.0).epsilon(1e-12));
    CHECK(e.curve(0) == 0.0);
    CHECK(e.curve(29) == e.eta);
}

TEST_CASE("eta matches fine-grid quadrature of 1/L within 2%") {
    Eigen::VectorXd kappa(100);
    for (int lag = 1; lag <= 100; ++lag) kappa(lag - 1) = 1.0 / double(lag);
    const EtaResult e = eta(kappa, 100);
    const double expected =
        oracle::quadrature([](double x) { return 1.0 / x; }, 1.0, 100.0, 100000);
    CHECK(e.eta == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("eta curve increments are bounded by the integrand") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd kappa(50);
    for (int i = 0; i < 50; ++i) kappa(i) = u(rng);
    const EtaResult e = eta(kappa, 50);
    for (int i = 1; i < 50; ++i) {
        CHECK(std::abs(e.curve(i) - e.curve(i - 1)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("eta curve is smoother than the raw ACF (total variation)") {
    std::mt19937_64 rng(48);
    const Eigen::VectorXd s = long_memory_series(4000, 0.7, rng);
    const MemoryProfile p = memory_profile(s);
    REQUIRE(p.l_cut >= 3);
    double tv_curve = 0.0, tv_kappa = 0.0;
    for (int i = 1; i < p.l_cut; ++i) {
        const double incr_now = p.eta_curve(i) - p.eta_curve(i - 1);
        if (i >= 2) {
            const double incr_prev = p.eta_curve(i - 1) - p.eta_curve(i - 2);
            tv_curve += std::abs(incr_now - incr_prev);
            tv_kappa += std::abs(p.acf(i - 1) - p.acf(i - 2));
        }
    }
    CHECK(tv_curve <= tv_kappa + 1e-12);
}

TEST_CASE("eta validates l_cut") {
    const Eigen::VectorXd kappa = Eigen::VectorXd::Constant(10, 0.1);
    CHECK_THROWS_AS(eta(kappa, 0), std::invalid_argument);
    CHECK_THROWS_AS(eta(kappa, 11), std::invalid_argument);
}

TEST_CASE("memory_profile: white noise vs planted memory") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng_noise(seed);
        std::mt19937_64 rng_memory(seed + 1000);
        const Eigen::VectorXd noise = long_memory_series(4000, 0.0, rng_noise);
        const Eigen::VectorXd memory = long_memory_series(4000, 0.8, rng_memory);
        const MemoryProfile pn = memory_profile(noise);
        const MemoryProfile pm = memory_profile(memory);
        CHECK(pm.eta > pn.eta);  // paired comparison, all 50 seeds
    }
    std::mt19937_64 rng(49);
    const MemoryProfile white = memory_profile(long_memory_series(4000, 0.0, rng));
    CHECK(white.l_cut <= 5);
    CHECK(std::abs(white.eta) < 1.0);
}

TEST_CASE("memory_profile: eta equals the last eta_curve entry and flags propagate") {
    std::mt19937_64 rng(50);
    const MemoryProfile p = memory_profile(long_memory_series(5000, 0.6, rng));
    CHECK(p.eta == p.eta_curve(p.l_cut - 1));
    CHECK(p.acf.size() == std::min(5000 / 4, 1000));
    CHECK(p.acf.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    CHECK(p.l_cut <= p.acf.size());
    CHECK_THROWS_AS(memory_profile(Eigen::VectorXd::Zero(50)), std::invalid_argument);
}

TEST_CASE("increasing memory strength: eta rises, beta_vol falls") {
    // Mirror of the decreasing eta-beta relationship: test via Spearman on a
    // heterogeneous panel of planted strengths.
    std::vector<double> etas, betas, lcuts;
    std::mt19937_64 rng(51);
    for (int i = 0; i < 40; ++i) {
        const double strength = 0.15 + 0.02 * double(i);
        const Eigen::VectorXd s = long_memory_series(6000, strength, rng);
        const MemoryProfile p = memory_profile(s);
        if (!p.beta_vol) continue;
        etas.push_back(p.eta);
        betas.push_back(*p.beta_vol);
        lcuts.push_back(double(p.l_cut));
    }
    REQUIRE(etas.size() >= 30);
    const SpearmanResult eta_beta = spearman(etas, betas, Alternative::less);
    CHECK(eta_beta.rho < 0.0);
    CHECK(eta_beta.p < 0.05);
    const SpearmanResult eta_lcut = spearman(etas, lcuts, Alternative::greater);
    CHECK(eta_lcut.rho > 0.0);
    CHECK(eta_lcut.p < 0.05);
}

}  // TEST_SUITE
