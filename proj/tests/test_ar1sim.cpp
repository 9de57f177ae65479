#include "aggrolab/analytics.hpp"
#include "aggrolab/ar1sim.hpp"
#include "aggrolab/errors.hpp"
#include "aggrolab/io.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace aggrolab;

namespace {

const MixingSpec kBeta = BetaType{1.0, 1.5};
const InnovationSpec kGauss = Gaussian{1.0};

double lag_autocorr(const std::vector<double>& x, int k) {
    const double m = testutil::mean(x);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        den += (x[t] - m) * (x[t] - m);
        if (t + k < x.size()) num += (x[t] - m) * (x[t + k] - m);
    }
    return num / den;
}

// Mean and standard error of per-path lag-k products with the printed divisor.
std::pair<double, double> panel_cov_with_se(const Panel& p, int k) {
    const std::size_t N = p.N(), n = p.n();
    std::vector<double> c(N);
    for (std::size_t j = 0; j < N; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) s += p.values(j, t) * p.values(j, t + k);
        c[j] = s / static_cast<double>(n - k + 1);
    }
    return {testutil::mean(c), std::sqrt(testutil::variance(c) / static_cast<double>(N))};
}

}  // namespace

TEST(SimulateAr1, ZeroCoefficientReturnsInnovations) {
    Stream a(1), b(1);
    EXPECT_EQ(simulate_ar1(0.0, kGauss, 500, a), sample_innovations(kGauss, 500, b));
    const InnovationSpec st = Stable{1.5, 0.3, 1.0};
    Stream c(2), d(2);
    EXPECT_EQ(simulate_ar1(0.0, st, 500, c), sample_innovations(st, 500, d));
}

TEST(SimulateAr1, LagOneAutocorrelation) {
    Stream s(3);
    const auto x = simulate_ar1(0.9, kGauss, 100000, s);
    EXPECT_NEAR(lag_autocorr(x, 1), 0.9, 0.01);
}

TEST(SimulateAr1, StationaryVariance) {
    Stream s(4);
    const auto x = simulate_ar1(0.5, kGauss, 100000, s);
    EXPECT_NEAR(testutil::variance(x) / (4.0 / 3.0), 1.0, 0.02);
}

TEST(SimulateAr1, RejectsCoefficientsOutsideUnitInterval) {
    Stream s(5);
    EXPECT_THROW(simulate_ar1(1.0, kGauss, 10, s), std::invalid_argument);
    EXPECT_THROW(simulate_ar1(-0.1, kGauss, 10, s), std::invalid_argument);
}

TEST(SimulateAr1, StableExactStartHasStationaryScale) {
    // X(1) of a stationary SaS AR(1) has scale (1 - a^alpha)^(-1/alpha).
    const double a = 0.9, alpha = 1.5;
    std::vector<double> first(20000);
    for (std::size_t i = 0; i < first.size(); ++i) {
        Stream s(6, 0, i);
        first[i] = simulate_ar1(a, Stable{alpha, 0.0, 1.0}, 1, s)[0];
    }
    const double scale = std::pow(1.0 - std::pow(a, alpha), -1.0 / alpha);
    for (double th : {0.05, 0.1, 0.2, 0.4})
        EXPECT_LT(std::abs(testutil::empirical_cf(first, th) - stable_cf(th, alpha, 0.0, scale)), 0.02);
}

TEST(SimulateAr1, BurnInLength) {
    EXPECT_EQ(burn_in_length(0.5), static_cast<std::size_t>(std::ceil(std::log(1e-12) / std::log(0.5))));
    EXPECT_EQ(burn_in_length(1.0 - 1e-12), 1000000u);
}

TEST(SimulatePanel, SinglePathMatchesSimulateAr1) {
    const Stream root(7);
    const Panel p = simulate_panel(kBeta, kGauss, 1, 200, root);
    Stream cs = root.for_path(0).substream(0);
    const double a = draw_coeff(kBeta, cs);
    EXPECT_EQ(p.coeffs[0], a);
    Stream is = root.for_path(0).substream(1);
    const auto x = simulate_ar1(a, kGauss, 200, is);
    for (std::size_t t = 0; t < 200; ++t) EXPECT_EQ(p.values(0, t), x[t]);
}

TEST(SimulatePanel, CoefficientsInUnitInterval) {
    const Panel p = simulate_panel(CanonicalRegVar{-0.5}, kGauss, 5000, 2, Stream(8));
    for (double a : p.coeffs) {
        EXPECT_GE(a, 0.0);
        EXPECT_LT(a, 1.0);
    }
}

TEST(SimulatePanel, PooledCovarianceMatchesTheory) {
    const Panel p = simulate_panel(kBeta, kGauss, 10000, 50, Stream(9));
    for (int k = 0; k <= 5; ++k) {
        const auto [est, se] = panel_cov_with_se(p, k);
        EXPECT_NEAR(panel_cov(p, k), est, 1e-10);
        EXPECT_LT(std::abs(est - theoretical_cov(kBeta, 1.0, k)), 3.0 * se) << "k=" << k;
    }
}

TEST(SimulatePanel, WorkerCountDoesNotChangeOutput) {
    SimulationOptions one, eight;
    eight.workers = 8;
    const Panel a = simulate_panel(kBeta, Stable{1.5, 0.0, 1.0}, 300, 64, Stream(10), one);
    const Panel b = simulate_panel(kBeta, Stable{1.5, 0.0, 1.0}, 300, 64, Stream(10), eight);
    EXPECT_EQ(a.coeffs, b.coeffs);
    EXPECT_TRUE(a.values == b.values);
    const auto x = simulate_aggregate(kBeta, kGauss, 1000, 64, Stream(11), AggregationScheme::FiniteVariance, one);
    const auto y = simulate_aggregate(kBeta, kGauss, 1000, 64, Stream(11), AggregationScheme::FiniteVariance, eight);
    EXPECT_EQ(x.values, y.values);
}

TEST(SimulatePanel, ResourceCapRaises) {
    SimulationOptions opts;
    opts.max_cells = 1000;
    EXPECT_THROW(simulate_panel(kBeta, kGauss, 100, 100, Stream(1), opts), ResourceLimitError);
}

TEST(Aggregate, SinglePathIsItself) {
    const Panel p = simulate_panel(kBeta, kGauss, 1, 100, Stream(12));
    const auto s = aggregate(p, AggregationScheme::FiniteVariance);
    EXPECT_EQ(s.exponent, 0.5);
    for (std::size_t t = 0; t < 100; ++t) EXPECT_EQ(s.values[t], p.values(0, t));
}

TEST(Aggregate, MatchesStreamingAggregate) {
    const Panel p = simulate_panel(kBeta, kGauss, 200, 30, Stream(13));
    const auto a = aggregate(p, AggregationScheme::FiniteVariance);
    const auto b = simulate_aggregate(kBeta, kGauss, 200, 30, Stream(13), AggregationScheme::FiniteVariance);
    for (std::size_t t = 0; t < 30; ++t) EXPECT_NEAR(a.values[t], b.values[t], 1e-12);
}

TEST(Aggregate, NormalizationExponents) {
    EXPECT_EQ(aggregation_exponent(AggregationScheme::Stable, Stable{1.5, 0.0, 1.0}, kBeta), 1.0 / 1.5);
    EXPECT_NEAR(aggregation_exponent(AggregationScheme::DegenerateCheck, Stable{1.5, 0.0, 1.0}, CanonicalRegVar{-0.5}),
                4.0 / 3.0, 1e-15);
    EXPECT_THROW(aggregation_exponent(AggregationScheme::Stable, kGauss, kBeta), std::invalid_argument);
    EXPECT_THROW(aggregation_exponent(AggregationScheme::FiniteVariance, Stable{1.5, 0.0, 1.0}, kBeta),
                 std::invalid_argument);
}

TEST(Aggregate, IsLinearInPanels) {
    Panel a = simulate_panel(kBeta, kGauss, 50, 40, Stream(14));
    const Panel b = simulate_panel(kBeta, kGauss, 50, 40, Stream(15));
    const auto sa = aggregate(a, AggregationScheme::FiniteVariance);
    const auto sb = aggregate(b, AggregationScheme::FiniteVariance);
    a.values += b.values;
    const auto sum = aggregate(a, AggregationScheme::FiniteVariance);
    for (std::size_t t = 0; t < 40; ++t) EXPECT_NEAR(sum.values[t], sa.values[t] + sb.values[t], 1e-12);
}

TEST(Aggregate, AutocovarianceMatchesTheory) {
    // Known zero mean: the replicate average of (1/(n-k)) sum X(t)X(t+k) is unbiased.
    const std::size_t R = 200, N = 10000, n = 64;
    std::vector<std::vector<double>> c(6, std::vector<double>(R));
    for (std::size_t r = 0; r < R; ++r) {
        const auto s = simulate_aggregate(kBeta, kGauss, N, n, Stream(16, r), AggregationScheme::FiniteVariance);
        for (int k = 0; k <= 5; ++k) {
            double acc = 0.0;
            for (std::size_t t = 0; t + k < n; ++t) acc += s.values[t] * s.values[t + k];
            c[k][r] = acc / static_cast<double>(n - k);
        }
    }
    for (int k = 0; k <= 5; ++k) {
        const double se = std::sqrt(testutil::variance(c[k]) / R);
        EXPECT_LT(std::abs(testutil::mean(c[k]) - theoretical_cov(kBeta, 1.0, k)), 3.0 * se) << "k=" << k;
    }
}

TEST(Aggregate, DegenerateSchemeIsNearlyConstantInTime) {
    const std::size_t R = 200;
    std::vector<double> x0(R), x10(R);
    for (std::size_t r = 0; r < R; ++r) {
        const auto s = simulate_aggregate(CanonicalRegVar{-0.5}, Stable{1.5, 0.0, 1.0}, 1000, 20, Stream(17, r),
                                          AggregationScheme::DegenerateCheck);
        x0[r] = s.values[0];
        x10[r] = s.values[10];
    }
    const double m0 = testutil::mean(x0), m1 = testutil::mean(x10);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
        sxy += (x0[r] - m0) * (x10[r] - m1);
        sxx += (x0[r] - m0) * (x0[r] - m0);
        syy += (x10[r] - m1) * (x10[r] - m1);
    }
    EXPECT_GE(sxy / std::sqrt(sxx * syy), 0.9);
}

TEST(JointSum, SinglePathFullWindowIsPartialSum) {
    const Panel p = simulate_panel(kBeta, kGauss, 1, 100, Stream(18));
    const double tau = 1.0;
    double s = 0.0;
    for (std::size_t t = 0; t < 100; ++t) s += p.values(0, t);
    EXPECT_NEAR(joint_sum(p, std::span(&tau, 1))[0], s, 1e-12);
}

TEST(JointSum, IncrementsAreBlockSums) {
    const Panel p = simulate_panel(kBeta, kGauss, 7, 100, Stream(19));
    const std::vector<double> taus{0.25, 0.6};
    const auto S = joint_sum(p, taus);
    double block = 0.0;
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t t = 25; t < 60; ++t) block += p.values(i, t);
    EXPECT_NEAR(S[1] - S[0], block, 1e-10);
    EXPECT_THROW(joint_sum(p, std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(joint_sum(p, std::vector<double>{1.5}), std::invalid_argument);
}

TEST(JointSum, FastGrowthVarianceMatchesPartialSumOracle) {
    const double beta = 0.5;
    const MixingSpec mix = CanonicalRegVar{beta};
    const std::size_t n = 20, N = 8000, R = 500;
    const double norm = std::pow(static_cast<double>(n), -1.0 + beta / 2.0) / std::sqrt(static_cast<double>(N));
    std::vector<double> v(R);
    const double tau = 1.0;
    for (std::size_t r = 0; r < R; ++r) {
        const Panel p = simulate_panel(mix, kGauss, N, n, Stream(20, r));
        v[r] = norm * joint_sum(p, std::span(&tau, 1))[0];
    }
    double oracle = 0.0;
    for (int t = -static_cast<int>(n) + 1; t < static_cast<int>(n); ++t)
        oracle += (static_cast<double>(n) - std::abs(t)) * theoretical_cov(mix, 1.0, std::abs(t));
    oracle *= norm * norm * N;
    double ms = 0.0;
    for (double x : v) ms += x * x;
    EXPECT_NEAR(ms / R / oracle, 1.0, 0.15);
}

TEST(GrowthCase, Classification) {
    const auto inter = growth_case(100.0, 100.0, 0.0);
    EXPECT_EQ(inter.growth, GrowthCase::Intermediate);
    EXPECT_DOUBLE_EQ(inter.mu, 1.0);
    EXPECT_EQ(growth_case(1e8, 10.0, 0.0).growth, GrowthCase::Fast);
    EXPECT_EQ(growth_case(10.0, 1e6, 0.0).growth, GrowthCase::Slow);
    const auto fast = growth_case(1e12, 100.0, 0.5);
    EXPECT_DOUBLE_EQ(fast.N_exponent, 0.5);
    EXPECT_DOUBLE_EQ(fast.n_exponent, 0.75);
}

TEST(GrowthCase, BetaOneIsOutsideTheStatedRange) {
    EXPECT_THROW(growth_case(1e4, 1e2, 1.0), std::invalid_argument);
    EXPECT_THROW(growth_case(1e4, 1e2, -1.0), std::invalid_argument);
}

TEST(Serialization, PanelAndAggregateRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "aggrolab_panel_test";
    std::filesystem::remove_all(dir);
    const Panel p = simulate_panel(kBeta, kGauss, 4, 8, Stream(21));
    write_panel(p, dir);
    const auto v = read_f64(dir / "values.f64");
    ASSERT_EQ(v.size(), 32u);
    EXPECT_EQ(v[9], p.values(1, 1));
    EXPECT_EQ(read_f64(dir / "coeffs.f64"), p.coeffs);
    EXPECT_TRUE(std::filesystem::exists(dir / "panel.json"));
    write_aggregate_csv(aggregate(p, AggregationScheme::FiniteVariance), dir / "agg.csv");
    EXPECT_TRUE(std::filesystem::exists(dir / "agg.csv"));
    std::filesystem::remove_all(dir);
}
