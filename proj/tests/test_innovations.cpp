#include "aggrolab/analytics.hpp"
#include "aggrolab/innovations.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace aggrolab;
using testutil::empirical_cf;

TEST(Gaussian, SampleVarianceMatches) {
    Stream s(1);
    const auto x = sample_gaussian(1.0, 100000, s);
    EXPECT_NEAR(testutil::variance(x), 1.0, 0.02);
}

TEST(Gaussian, RejectsNonPositiveSigmaAndEmptyRequests) {
    Stream s(1);
    EXPECT_THROW(sample_gaussian(0.0, 10, s), std::invalid_argument);
    EXPECT_THROW(sample_gaussian(1.0, 0, s), std::invalid_argument);
}

TEST(Gaussian, FixedStreamIsDeterministic) {
    Stream a(2), b(2);
    EXPECT_EQ(sample_gaussian(1.0, 1000, a), sample_gaussian(1.0, 1000, b));
}

TEST(Stable, AlphaTwoMatchesStandardNormalCf) {
    Stream s(3);
    const auto x = sample_stable(2.0, 0.0, 1.0 / std::sqrt(2.0), 100000, s);
    for (double th : {0.5, 1.0, 2.0}) {
        const auto e = empirical_cf(x, th);
        EXPECT_LT(std::abs(e - std::exp(-0.5 * th * th)), 0.02) << "theta=" << th;
    }
}

TEST(Stable, HillEstimateOfSymmetricOnePointFive) {
    Stream s(4);
    auto x = sample_stable(1.5, 0.0, 1.0, 100000, s);
    const TailIndex ti = tail_index(x);
    EXPECT_GE(ti.alpha, 1.35);
    EXPECT_LE(ti.alpha, 1.65);
}

TEST(Stable, EmpiricalCfMatchesClosedFormAlphaOnePointTwo) {
    Stream s(5);
    const auto x = sample_stable(1.2, 0.0, 1.0, 100000, s);
    double worst = 0.0;
    for (int i = -30; i <= 30; ++i) {
        const double th = 0.1 * i;
        worst = std::max(worst, std::abs(empirical_cf(x, th) - stable_cf(th, 1.2, 0.0, 1.0)));
    }
    EXPECT_LE(worst, 0.02);
}

TEST(Stable, SkewedCfMatchesSampler) {
    for (double alpha : {0.8, 1.0, 1.5}) {
        Stream s(55);
        const auto x = sample_stable(alpha, 0.6, 0.7, 100000, s);
        for (double th : {-1.5, -0.4, 0.3, 1.2}) {
            EXPECT_LT(std::abs(empirical_cf(x, th) - stable_cf(th, alpha, 0.6, 0.7)), 0.02)
                << "alpha=" << alpha << " theta=" << th;
        }
    }
}

TEST(StableCf, ZeroAndGaussianAndSymmetricValues) {
    EXPECT_EQ(stable_cf(0.0, 1.3, 0.4, 2.0), std::complex<double>(1.0, 0.0));
    const double sigma = 1.7, th = 0.8;
    EXPECT_NEAR(std::abs(stable_cf(th, 2.0, 0.0, sigma / std::sqrt(2.0)) - std::exp(-0.5 * sigma * sigma * th * th)),
                0.0, 1e-15);
    EXPECT_NEAR(std::abs(stable_cf(1.0, 1.5, 0.0, 1.0) - std::exp(-1.0)), 0.0, 1e-15);
}

TEST(StableCf, ConjugateUnderSkewNegation) {
    for (double alpha : {0.7, 1.0, 1.5, 2.0})
        for (double th : {-2.0, 0.3, 1.7}) {
            const auto v = stable_cf(th, alpha, 0.4, 1.3);
            // -X has skew -beta, and cf_{-X}(theta) = cf_X(-theta) = conj(cf_X(theta))
            EXPECT_NEAR(std::abs(stable_cf(th, alpha, -0.4, 1.3) - std::conj(v)), 0.0, 1e-14);
            EXPECT_NEAR(std::abs(stable_cf(-th, alpha, 0.4, 1.3) - std::conj(v)), 0.0, 1e-14);
        }
}

TEST(Stable, RejectsOutOfRangeParameters) {
    Stream s(1);
    EXPECT_THROW(sample_stable(2.1, 0.0, 1.0, 10, s), std::invalid_argument);
    EXPECT_THROW(sample_stable(1.5, 1.1, 1.0, 10, s), std::invalid_argument);
    EXPECT_THROW(sample_stable(1.5, 0.0, 0.0, 10, s), std::invalid_argument);
}

TEST(Stable, AlphaTwoAgreesWithGaussianByKs) {
    int rejections = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Stream a(seed, 0, 0, 0), b(seed, 0, 0, 1);
        const auto x = sample_stable(2.0, 0.0, 1.0, 10000, a);
        const auto y = sample_gaussian(std::sqrt(2.0), 10000, b);
        if (testutil::ks_two_sample_p(x, y) < 1e-3) ++rejections;
    }
    EXPECT_LE(rejections, 1);
}

TEST(DomainAttraction, HillEstimate) {
    Stream s(6);
    const auto x = sample_domain_attraction(1.5, 100000, s);
    const TailIndex ti = tail_index(x);
    EXPECT_GE(ti.alpha, 1.35);
    EXPECT_LE(ti.alpha, 1.65);
}

TEST(DomainAttraction, ParetoTailAndZeroMedian) {
    Stream s(7);
    const auto x = sample_domain_attraction(1.5, 200000, s);
    std::size_t above2 = 0, positive = 0;
    for (double v : x) {
        ASSERT_GE(std::abs(v), 1.0);
        above2 += std::abs(v) > 2.0;
        positive += v > 0.0;
    }
    EXPECT_NEAR(above2 / 200000.0, std::pow(2.0, -1.5), 0.005);
    EXPECT_NEAR(positive / 200000.0, 0.5, 0.005);
}

TEST(DomainAttraction, NormalizedSumMatchesStableLimit) {
    const double alpha = 1.5;
    const std::size_t N = 10000, R = 1000;
    std::vector<double> sums(R);
    for (std::size_t r = 0; r < R; ++r) {
        Stream s(8, r);
        const auto x = sample_domain_attraction(alpha, N, s);
        double acc = 0.0;
        for (double v : x) acc += v;
        sums[r] = acc * std::pow(static_cast<double>(N), -1.0 / alpha);
    }
    const double scale = domain_attraction_scale(alpha);
    for (double th : {0.25, 0.5, 1.0, 2.0})
        EXPECT_LT(std::abs(empirical_cf(sums, th) - stable_cf(th, alpha, 0.0, scale)), 0.05) << "theta=" << th;
}

TEST(DomainAttraction, SignFlipSymmetryByKs) {
    int rejections = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Stream a(seed, 1, 0, 0), b(seed, 1, 0, 1);
        const auto x = sample_domain_attraction(1.5, 10000, a);
        auto y = sample_domain_attraction(1.5, 10000, b);
        for (auto& v : y) v = -v;
        if (testutil::ks_two_sample_p(x, y) < 1e-3) ++rejections;
    }
    EXPECT_LE(rejections, 1);
}

namespace {

std::vector<double> row_sums(const RowMatrix& m) {
    std::vector<double> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index t = 0; t < m.rows(); ++t) out[t] = m.row(t).sum();
    return out;
}

}  // namespace

TEST(IdArray, GaussianRootSumsToTargetLaw) {
    IdTriplet spec;
    spec.mu = 0.7;
    spec.sigma = 1.3;
    Stream s(9);
    const auto sums = row_sums(sample_id_array(spec, 25, 40000, s));
    EXPECT_NEAR(testutil::mean(sums), 0.7, 0.03);
    EXPECT_NEAR(testutil::variance(sums), 1.69, 0.05);
    const double d = testutil::ks_one_sample(sums, [](double x) { return 0.5 * std::erfc(-(x - 0.7) / (1.3 * std::sqrt(2.0))); });
    EXPECT_LT(d, 0.01);
}

TEST(IdArray, CompoundPoissonUnitJumpsCf) {
    // Unit jumps lie inside the truncation region |x| <= 1, so they are
    // compensated: log CF = i theta mu + lambda (e^{i theta} - 1 - i theta).
    IdTriplet spec;
    spec.mu = 0.2;
    spec.big_jumps = {JumpAtom{1.0, 2.5}};
    Stream s(10);
    const auto sums = row_sums(sample_id_array(spec, 10, 10000, s));
    for (double th : {-2.0, -0.5, 0.5, 1.0, 2.0}) {
        const std::complex<double> i(0.0, 1.0);
        const auto oracle = std::exp(i * th * (spec.mu - 2.5) + 2.5 * (std::exp(i * th) - 1.0));
        EXPECT_LT(std::abs(empirical_cf(sums, th) - oracle), 0.02) << "theta=" << th;
        EXPECT_LT(std::abs(id_cf(th, spec) - oracle), 1e-12);
    }
}

TEST(IdArray, SmallJumpVarianceMatchesQuadrature) {
    IdTriplet spec;
    spec.sigma = 0.1;
    spec.small_jumps = LevySmallJumpSpec{1.8, 1e-3, 1e-3, 1.0};
    spec.epsilon = 1e-3;
    // int x^2 pi(dx) = (c+ + c-) alpha0/(2 - alpha0) cutoff^(2-alpha0)
    const double target = 0.01 + 2e-3 * 1.8 / 0.2;
    EXPECT_NEAR(levy_second_moment(spec) + spec.sigma * spec.sigma, target, 1e-12);
    Stream s(11);
    const auto sums = row_sums(sample_id_array(spec, 10, 100000, s));
    EXPECT_NEAR(testutil::variance(sums) / target, 1.0, 0.03);
}

TEST(IdTriplet, AtomInsideSmallJumpRangeRejected) {
    IdTriplet spec;
    spec.small_jumps = LevySmallJumpSpec{1.5, 1.0, 1.0, 1.0};
    spec.big_jumps = {JumpAtom{0.5, 1.0}};
    EXPECT_THROW(validate(spec), std::invalid_argument);  // atom inside the small-jump range
    IdTriplet ok;
    ok.small_jumps = LevySmallJumpSpec{1.5, 1.0, 0.0, 1.0};
    EXPECT_NO_THROW(validate(ok));
}

TEST(Innovations, FiniteVarianceFamiliesMatchAnalyticVariance) {
    IdTriplet id;
    id.mu = -0.3;
    id.sigma = 0.5;
    id.big_jumps = {JumpAtom{1.5, 0.4}, JumpAtom{-2.0, 0.1}};
    const std::vector<InnovationSpec> specs{Gaussian{1.4}, Stable{2.0, 0.0, 0.8}, id};
    for (const auto& spec : specs) {
        Stream s(12);
        const auto x = sample_innovations(spec, 100000, s);
        EXPECT_NEAR(testutil::variance(x) / variance(spec), 1.0, 0.03) << name(spec);
    }
}

TEST(Innovations, SampleInnovationsIsDeterministic) {
    const InnovationSpec spec = Stable{1.3, 0.2, 1.0};
    Stream a(13), b(13);
    EXPECT_EQ(sample_innovations(spec, 5000, a), sample_innovations(spec, 5000, b));
}
