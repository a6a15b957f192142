#include <gtest/gtest.h>

#include <cmath>

#include "rph/asymptotics.hpp"
#include "rph/counter_rng.hpp"
#include "rph/special.hpp"

namespace rph {
namespace {

TEST(RateLargeB, AlphaOneIsIdentity) {
    AsymptoticInputs in{1.0, 1.0, 2, 1, 7};
    EXPECT_NEAR(rate_large_b(in), 1.0, 1e-12);
}

TEST(RateLargeB, OrthogonalPairExactRecurrence) {
    // B(2, b)/B(1, b) = 1/(b+1) by the Beta recurrence
    for (int b : {99, 100}) {
        AsymptoticInputs in{2.0, 1.0, 2, 1, b};
        EXPECT_NEAR(rate_large_b(in), 1.0 / (b + 1.0), 1e-12);
    }
}

TEST(RateLargeB, PowerLawCompanion) {
    AsymptoticInputs in{2.0, 1.0, 2, 1, 64};
    EXPECT_NEAR(rate_large_b_power(in), 1.0 / 64.0, 1e-12);
    // log-asymptotic agreement: log-ratio of B-quotient to power law
    // shrinks relative to log b
    double prev_gap = 1e300;
    for (int b : {16, 256, 4096}) {
        AsymptoticInputs x{1.5, 1.0, 2, 1, b};
        const double gap = std::abs(std::log(rate_large_b(x)) -
                                    std::log(rate_large_b_power(x))) /
                           std::log(static_cast<double>(b));
        EXPECT_LT(gap, prev_gap);
        prev_gap = gap;
    }
}

TEST(RateLargeA, OrthogonalIsNaiveRate) {
    for (int a : {1, 5, 20}) {
        AsymptoticInputs in{3.0, 1.0, 3, a, 1};
        EXPECT_NEAR(rate_large_a(in),
                    std::pow(a + 1.0, -2.0), 1e-12 * std::pow(a + 1.0, -2.0));
    }
}

TEST(RateLargeA, PinnedArithmetic) {
    // k=3, b=1, Delta = 0.7698, a=9: (1/0.7698) / 100
    AsymptoticInputs in{3.0, 0.7698, 3, 9, 1};
    EXPECT_NEAR(rate_large_a(in), 0.012990, 1e-5);
}

TEST(RateLargeA, IncreasesAsDeltaShrinks) {
    double prev = 0.0;
    for (double delta : {1.0, 0.8, 0.5, 0.2}) {
        AsymptoticInputs in{3.0, delta, 3, 6, 2};
        const double p = rate_large_a(in);
        EXPECT_GT(p, prev);
        prev = p;
    }
}

TEST(Rates, StayInUnitIntervalAndFinite) {
    AsymptoticInputs big{2.5, 0.9, 3, 1000000, 1000000};
    const double pb = rate_large_b(big);
    EXPECT_FALSE(std::isnan(pb));
    EXPECT_GE(pb, 0.0);  // may underflow to 0 in double at this scale
    EXPECT_LE(pb, 1.0);
    AsymptoticInputs mild{1.0 + 1e-7, 0.9, 3, 1000000, 1000000};
    const double pm = rate_large_b(mild);
    EXPECT_GT(pm, 0.0);
    EXPECT_LE(pm, 1.0);
    AsymptoticInputs ba{2.5, 0.9, 3, 1000000, 3};
    const double pa = rate_large_a(ba);
    EXPECT_FALSE(std::isnan(pa));
    EXPECT_GT(pa, 0.0);
    EXPECT_LE(pa, 1.0);
}

TEST(AsymptoticInputs, Validation) {
    EXPECT_THROW(rate_large_b({0.5, 1.0, 2, 1, 1}), DomainError);
    EXPECT_THROW(rate_large_b({2.0, 0.0, 2, 1, 1}), DomainError);
    EXPECT_THROW(rate_large_b({2.0, 1.0, 2, 0, 1}), DomainError);
}

TEST(SurvivalAbove, SingleGaussianTail) {
    EXPECT_NEAR(survival_above(1.0, 1, 2.0), 0.0455, 2e-4);
    EXPECT_THROW(survival_above(1.0, 1, 0.0), DomainError);
}

TEST(SurvivalAbove, TailEquivalenceForLargeThreshold) {
    // 1 - Phi_k(t) ~ (1 - Phi_1(t))^(1 + o(1)): the log-ratio of
    // (1-Phi_k(C))^k to (1-Phi_1(C))^k tends to 1
    double prev_gap = 1e300;
    for (double c : {5.0, 10.0, 20.0}) {
        const double lhs = 3.0 * std::log(phi_k_upper(3, c));
        const double rhs = 3.0 * std::log(phi_k_upper(1, c));
        const double gap = std::abs(lhs / rhs - 1.0);
        EXPECT_LT(gap, prev_gap);
        prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 0.05);
}

TEST(SurvivalBelow, SmallCExpansion) {
    // k=1, Delta=1: sqrt(2/pi) c, the leading term of erf(c/sqrt 2)
    EXPECT_NEAR(survival_below(1.0, 1, 0.1), 0.0798, 1e-4);
    EXPECT_NEAR(survival_below(1.0, 1, 0.1), std::erf(0.1 / std::sqrt(2.0)),
                5e-4);
}

TEST(SurvivalBelow, InverseLinearInDelta) {
    const double p1 = survival_below(0.8, 3, 0.05);
    const double p2 = survival_below(0.4, 3, 0.05);
    EXPECT_NEAR(p2, 2.0 * p1, 1e-12);
    EXPECT_THROW(survival_below(0.0, 3, 0.05), DomainError);
    EXPECT_THROW(survival_below(0.5, 3, -0.1), DomainError);
}

TEST(BetaIdentity, HandExpansionAtOnes) {
    const auto [lhs, rhs] = beta_identity_check(1.0, 1.0, 1.0);
    EXPECT_NEAR(lhs, 1.0, 1e-12);
    EXPECT_NEAR(rhs, 1.0, 1e-12);
}

TEST(BetaIdentity, PinnedNumericCase) {
    const auto [lhs, rhs] = beta_identity_check(2.0, 1.0, 10.0);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(rhs));
}

TEST(BetaIdentity, RandomTriples) {
    GaussianSource rng(414, 0);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const double alpha = 0.1 + 5.0 * rng.uniform();
        const double a = 0.1 + 20.0 * rng.uniform();
        const double b = 0.1 + 20.0 * rng.uniform();
        const auto [lhs, rhs] = beta_identity_check(alpha, a, b);
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
    EXPECT_LT(worst, 1e-9);
}

}  // namespace
}  // namespace rph
