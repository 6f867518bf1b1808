#include "mtt/gaussian.hpp"

#include "generators.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace mtt {
namespace {

using testing::random_gaussian;
using testing::random_spd;
using testing::random_vector;

Vec v1(double a) { return Vec::Constant(1, a); }
Mat m1(double a) { return Mat::Constant(1, 1, a); }

TEST(LogPdf, StandardNormalAtMode) {
    EXPECT_NEAR(log_pdf(v1(0.0), v1(0.0), m1(1.0)), -0.5 * std::log(2.0 * std::numbers::pi), 1e-12);
}

TEST(LogPdf, TwoDimensionalIdentityAtMean) {
    EXPECT_NEAR(log_pdf(Vec::Zero(2), Vec::Zero(2), Mat::Identity(2, 2)), -std::log(2.0 * std::numbers::pi), 1e-12);
}

TEST(LogPdf, ScaledVarianceOneSigmaAway) {
    // Independent evaluation of the univariate density.
    const double var = 4.0, x = 2.0;
    const double expected = std::log(std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var));
    EXPECT_NEAR(log_pdf(v1(x), v1(0.0), m1(var)), expected, 1e-12);
    EXPECT_NEAR(expected, -2.1121, 1e-4);
}

TEST(LogPdf, IntegratesToOneIn1D) {
    const double mu = 0.7, var = 2.3, sd = std::sqrt(var);
    const int n = 20000;
    const double lo = mu - 8 * sd, hi = mu + 8 * sd, h = (hi - lo) / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        sum += w * std::exp(log_pdf(v1(lo + i * h), v1(mu), m1(var)));
    }
    EXPECT_NEAR(sum * h, 1.0, 1e-6);
}

TEST(LogPdf, IntegratesToOneIn2D) {
    Vec mu(2);
    mu << 0.3, -1.0;
    Mat cov(2, 2);
    cov << 1.5, 0.4, 0.4, 0.8;
    const double sx = std::sqrt(cov(0, 0)), sy = std::sqrt(cov(1, 1));
    const int n = 800;
    const double hx = 16 * sx / n, hy = 16 * sy / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            const double w = ((i == 0 || i == n) ? 0.5 : 1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
            Vec x(2);
            x << mu(0) - 8 * sx + i * hx, mu(1) - 8 * sy + j * hy;
            sum += w * std::exp(log_pdf(x, mu, cov));
        }
    }
    EXPECT_NEAR(sum * hx * hy, 1.0, 1e-6);
}

TEST(LogPdf, ZeroCovarianceGetsJitterFloor) {
    // A zero matrix has zero trace; the jitter floor makes it invertible.
    EXPECT_NO_THROW((void)log_pdf(v1(0.0), v1(0.0), m1(0.0)));
}

TEST(LogPdf, IndefiniteCovarianceThrows) {
    EXPECT_THROW((void)log_pdf(v1(0.0), v1(0.0), m1(-1.0)), NumericalSingularityError);
}

TEST(LogPdf, DimensionMismatchThrows) {
    EXPECT_THROW((void)log_pdf(Vec::Zero(2), Vec::Zero(3), Mat::Identity(3, 3)), DimensionError);
}

TEST(Mahalanobis, Examples) {
    Rng rng(3);
    Vec a(2), b(2);
    a << 1.0, 2.0;
    EXPECT_DOUBLE_EQ(mahalanobis_sq(a, a, random_spd(rng, 2)), 0.0);
    a << 3.0, 4.0;
    b << 0.0, 0.0;
    EXPECT_DOUBLE_EQ(mahalanobis_sq(a, b, Mat::Identity(2, 2)), 25.0);
    a << 1.0, 1.0;
    Mat m = Mat::Zero(2, 2);
    m.diagonal() << 2.0, 1.0;
    EXPECT_DOUBLE_EQ(mahalanobis_sq(a, b, m), 3.0);
    EXPECT_THROW((void)mahalanobis_sq(a, Vec::Zero(3), Mat::Identity(2, 2)), DimensionError);
}

TEST(Mahalanobis, SymmetricAndNonNegative) {
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        const int n = testing::uniform_int(rng, 1, 5);
        const Vec a = random_vector(rng, n, 10.0), b = random_vector(rng, n, 10.0);
        const Mat m = random_spd(rng, n);
        EXPECT_GE(mahalanobis_sq(a, b, m), 0.0);
        EXPECT_NEAR(mahalanobis_sq(a, b, m), mahalanobis_sq(b, a, m), 1e-9 * (1.0 + mahalanobis_sq(a, b, m)));
    }
}

TEST(MomentMatch, IdenticalComponents) {
    Rng rng(1);
    const auto g = random_gaussian(rng, 3);
    const std::vector<GaussianParticle> ps{{0.3, g}, {0.4, g}};
    const auto m = moment_match_merge(ps);
    EXPECT_NEAR(m.weight, 0.7, 1e-15);
    EXPECT_TRUE(m.state.mean.isApprox(g.mean, 1e-12));
    EXPECT_TRUE(m.state.cov.isApprox(g.cov, 1e-12));
}

TEST(MomentMatch, SingleParticleUnchanged) {
    Rng rng(2);
    const GaussianParticle p{0.25, random_gaussian(rng, 4)};
    const auto m = moment_match_merge(std::span(&p, 1));
    EXPECT_EQ(m.weight, p.weight);
    EXPECT_TRUE(m.state.mean.isApprox(p.state.mean, 1e-14));
    EXPECT_TRUE(m.state.cov.isApprox(p.state.cov, 1e-14));
}

TEST(MomentMatch, SpreadTermMatchesMixtureSample) {
    const std::vector<GaussianParticle> ps{{0.5, {v1(0.0), m1(1.0)}}, {0.5, {v1(2.0), m1(1.0)}}};
    const auto m = moment_match_merge(ps);
    EXPECT_DOUBLE_EQ(m.weight, 1.0);
    EXPECT_NEAR(m.state.mean(0), 1.0, 1e-15);
    EXPECT_NEAR(m.state.cov(0, 0), 2.0, 1e-15);

    // Sample moments of a 10^6-draw mixture sample.
    Rng rng(5);
    std::normal_distribution<double> n01;
    std::bernoulli_distribution coin(0.5);
    double s = 0.0, s2 = 0.0;
    const int draws = 1000000;
    for (int i = 0; i < draws; ++i) {
        const double x = (coin(rng) ? 2.0 : 0.0) + n01(rng);
        s += x;
        s2 += x * x;
    }
    const double mean = s / draws, var = s2 / draws - mean * mean;
    EXPECT_NEAR(mean, m.state.mean(0), 0.01);
    EXPECT_NEAR(var, m.state.cov(0, 0), 0.02);
}

TEST(MomentMatch, SumAddsCovariances) {
    const std::vector<GaussianParticle> ps{{0.5, {v1(0.0), m1(1.0)}}, {0.25, {v1(2.0), m1(3.0)}}};
    const auto m = moment_match_merge(ps, MergeCovariance::sum);
    EXPECT_NEAR(m.state.cov(0, 0), 4.0, 1e-15);
    EXPECT_NEAR(m.state.mean(0), 2.0 / 3.0, 1e-15);
}

TEST(MomentMatch, Errors) {
    EXPECT_THROW((void)moment_match_merge(std::span<const GaussianParticle>()), std::invalid_argument);
    const std::vector<GaussianParticle> zero{{0.0, {v1(0.0), m1(1.0)}}};
    EXPECT_THROW((void)moment_match_merge(zero), std::invalid_argument);
}

TEST(MomentMatch, PreservesFirstMomentAndPsd) {
    Rng rng(17);
    for (int t = 0; t < 300; ++t) {
        const int n = testing::uniform_int(rng, 1, 4);
        const auto ps = testing::random_particles(rng, testing::uniform_int(rng, 1, 6), n, 0.01, 0.4);
        const auto m = moment_match_merge(ps);
        Vec first = Vec::Zero(n);
        double total = 0.0;
        for (const auto& p : ps) {
            first += p.weight * p.state.mean;
            total += p.weight;
        }
        EXPECT_LE(m.weight, 1.0);
        EXPECT_LT((total * m.state.mean - first).norm(), 1e-12 * (1.0 + first.norm()));
        if (total <= 1.0) {
            EXPECT_LT((m.weight * m.state.mean - first).norm(), 1e-12 * (1.0 + first.norm()));
        }
        EXPECT_TRUE(is_symmetric_psd(m.state.cov));
    }
}

TEST(RobustCholesky, NearSingularGetsJitter) {
    Mat m(2, 2);
    m << 1.0, 1.0, 1.0, 1.0;  // rank one
    EXPECT_NO_THROW((void)robust_cholesky(m));
}

TEST(Sampler, MomentsMatch) {
    Rng rng(9);
    Mat cov(2, 2);
    cov << 2.0, 0.6, 0.6, 1.0;
    Vec mean(2);
    mean << 1.0, -3.0;
    const GaussianSampler sampler(mean, cov);
    const int draws = 200000;
    Vec s = Vec::Zero(2);
    Mat s2 = Mat::Zero(2, 2);
    for (int i = 0; i < draws; ++i) {
        const Vec x = sampler(rng);
        s += x;
        s2 += x * x.transpose();
    }
    const Vec m = s / draws;
    const Mat c = s2 / draws - m * m.transpose();
    EXPECT_LT((m - mean).cwiseAbs().maxCoeff(), 0.02);
    EXPECT_LT((c - cov).cwiseAbs().maxCoeff(), 0.03);
}

TEST(Sampler, SingularCovarianceStaysOnSubspace) {
    Rng rng(4);
    Mat cov = Mat::Zero(2, 2);
    cov(0, 0) = 1.0;
    const GaussianSampler sampler(Vec::Zero(2), cov);
    for (int i = 0; i < 100; ++i) EXPECT_DOUBLE_EQ(sampler(rng)(1), 0.0);
}

}  // namespace
}  // namespace mtt
