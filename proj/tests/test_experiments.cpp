#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "rph/experiments.hpp"
#include "rph/io.hpp"

namespace rph {
namespace {

TEST(WilsonInterval, BracketsPointEstimate) {
    const auto [lo, hi] = wilson_interval(30, 1000);
    EXPECT_LT(lo, 0.03);
    EXPECT_GT(hi, 0.03);
    EXPECT_GE(lo, 0.0);
    EXPECT_LE(hi, 1.0);
    const auto [l0, h0] = wilson_interval(0, 100);
    EXPECT_DOUBLE_EQ(l0, 0.0);
    EXPECT_GT(h0, 0.0);
    EXPECT_THROW(wilson_interval(0, 0), DomainError);
}

TEST(RequiredTrials, FormulaAndMonotonicity) {
    // N = 3 ln(2/0.05) / (rel^2 p); at p=1, rel=1% this is ~1.1e5
    const auto n = required_trials(1.0, 0.01, 0.95);
    EXPECT_NEAR(static_cast<double>(n),
                3.0 * std::log(2.0 / 0.05) / (0.01 * 0.01), 1.0);
    EXPECT_GT(n, 100000u);
    EXPECT_LT(n, 120000u);
    EXPECT_LT(required_trials(0.5, 0.02, 0.95), required_trials(0.5, 0.01, 0.95));
    EXPECT_GT(required_trials(0.1, 0.01, 0.95), required_trials(0.2, 0.01, 0.95));
    EXPECT_THROW(required_trials(0.0, 0.01, 0.95), DomainError);
}

TEST(LogRatio, PinnedValues) {
    EXPECT_NEAR(log_ratio(0.125, 0.134), std::log(0.125) / std::log(0.134),
                1e-15);
    EXPECT_NEAR(log_ratio(0.125, 0.134), 1.0345, 5e-4);
    EXPECT_NEAR(log_ratio(0.125, 0.144), 1.073, 5e-3);
    EXPECT_DOUBLE_EQ(log_ratio(0.3, 0.3), 1.0);
    EXPECT_THROW(log_ratio(0.0, 0.5), DomainError);
    EXPECT_THROW(log_ratio(0.5, 1.0), DomainError);
}

TEST(EstimateCollisionRate, DuplicateTupleAlwaysCollides) {
    HashFamilyParams p{10, 1, 2, 0};
    const auto est = estimate_collision_rate(TupleConfig::equilateral(3, 1.0),
                                             10, p, 3, 500, 1);
    EXPECT_DOUBLE_EQ(est.p_hat, 1.0);
}

TEST(EstimateCollisionRate, OrthogonalTripleNaiveRate) {
    HashFamilyParams p{12, 1, 2, 0};
    const auto est =
        estimate_collision_rate(TupleConfig::identity(3), 12, p, 3, 60000, 2);
    EXPECT_NEAR(est.p_hat, 1.0 / 9.0, 3.0 * est.std_error());
    EXPECT_LE(est.ci_low, est.p_hat);
    EXPECT_GE(est.ci_high, est.p_hat);
}

TEST(EstimateCollisionRate, DeterministicAcrossWorkerCounts) {
    HashFamilyParams p{10, 2, 1, 0};
    const TupleConfig cfg = TupleConfig::triple(-0.3, -0.3, -0.4);
    setenv("RPHASH_THREADS", "1", 1);
    const auto one = estimate_collision_rate(cfg, 10, p, 3, 20000, 5);
    setenv("RPHASH_THREADS", "2", 1);
    const auto two = estimate_collision_rate(cfg, 10, p, 3, 20000, 5);
    setenv("RPHASH_THREADS", "8", 1);
    const auto eight = estimate_collision_rate(cfg, 10, p, 3, 20000, 5);
    unsetenv("RPHASH_THREADS");
    EXPECT_EQ(one.collisions, two.collisions);
    EXPECT_EQ(one.collisions, eight.collisions);
    EXPECT_DOUBLE_EQ(one.p_hat, eight.p_hat);
}

TEST(EstimateCollisionRate, Validation) {
    HashFamilyParams p{10, 1, 2, 0};
    EXPECT_THROW(
        estimate_collision_rate(TupleConfig::identity(3), 10, p, 3, 0, 1),
        DomainError);
    EXPECT_THROW(
        estimate_collision_rate(TupleConfig::identity(2), 10, p, 3, 10, 1),
        DomainError);
}

TEST(Sweep, GridGeometryAndCentreCell) {
    HashFamilyParams p{8, 1, 2, 0};
    const SweepResult res = sweep(-2.0, 0.2, 8, p, 3, 200, 11);
    ASSERT_FALSE(res.cells.empty());
    bool centre_found = false;
    for (const auto& cell : res.cells) {
        EXPECT_NEAR(2.0 * (cell.alpha + cell.beta + cell.gamma), -2.0, 1e-12);
        EXPECT_LT(cell.alpha, 0.0);
        EXPECT_LT(cell.beta, 0.0);
        EXPECT_LT(cell.gamma, 0.0);
        if (std::abs(cell.alpha + 1.0 / 3.0) < 1e-12 &&
            std::abs(cell.beta + 1.0 / 3.0) < 1e-12)
            centre_found = true;
    }
    EXPECT_TRUE(centre_found);
    EXPECT_THROW(sweep(1.0, 0.05, 8, p, 3, 10, 1), DomainError);
    EXPECT_THROW(sweep(-2.0, 0.0, 8, p, 3, 10, 1), DomainError);
}

TEST(Sweep, FlagsNonPdCells) {
    // sigma = -2.9 has both PD cells and cells outside the PD cone
    HashFamilyParams p{8, 1, 2, 0};
    const SweepResult res = sweep(-2.9, 0.1, 8, p, 3, 50, 12);
    int skipped = 0, live = 0;
    for (const auto& cell : res.cells) {
        if (cell.skipped) {
            ++skipped;
            EXPECT_FALSE(TupleConfig::triple(cell.alpha, cell.beta, cell.gamma)
                             .positive_definite());
        } else {
            ++live;
        }
    }
    EXPECT_GT(skipped, 0);
    EXPECT_GT(live, 0);
    // CSV row count equals cell count; skipped rows carry the flag
    const std::string csv = sweep_to_csv(res);
    const auto rows = static_cast<int>(std::count(csv.begin(), csv.end(), '\n'));
    EXPECT_EQ(rows, static_cast<int>(res.cells.size()) + 1);
    EXPECT_NE(csv.find("skipped_nonpd"), std::string::npos);
}

TEST(Sweep, S3SymmetryOfCellEstimates) {
    // one cell and a permutation of it, same trial budget: estimates
    // within 3 joint standard errors
    HashFamilyParams p{10, 1, 2, 0};
    const std::uint64_t n = 40000;
    const auto a = estimate_collision_rate(TupleConfig::triple(-0.2, -0.3, -0.5),
                                           10, p, 3, n, 21);
    const auto b = estimate_collision_rate(TupleConfig::triple(-0.5, -0.2, -0.3),
                                           10, p, 3, n, 22);
    const double joint_se =
        std::sqrt(a.std_error() * a.std_error() + b.std_error() * b.std_error());
    EXPECT_NEAR(a.p_hat, b.p_hat, 3.0 * joint_se);
}

TEST(SurvivalRate, SingleVectorClosedForm) {
    const auto est = survival_rate(TupleConfig::identity(1), 8, 1,
                                   SurvivalMode::kBelow, 0.1, 200000, 31);
    const double expect = std::erf(0.1 / std::sqrt(2.0));
    EXPECT_NEAR(est.p_hat, expect, 3.0 * est.std_error());
}

TEST(SurvivalRate, OrthogonalPairFactorizes) {
    const double c = 0.4;
    const auto pair = survival_rate(TupleConfig::identity(2), 8, 2,
                                    SurvivalMode::kBelow, c, 200000, 32);
    const double single = std::erf(c / std::sqrt(2.0));
    EXPECT_NEAR(pair.p_hat, single * single, 3.0 * pair.std_error());
}

TEST(SurvivalRate, AboveModeSingleVector) {
    const auto est = survival_rate(TupleConfig::identity(1), 8, 1,
                                   SurvivalMode::kAbove, 2.0, 200000, 33);
    EXPECT_NEAR(est.p_hat, 0.0455, 3.0 * est.std_error() + 1e-4);
    EXPECT_THROW(survival_rate(TupleConfig::identity(1), 8, 1,
                               SurvivalMode::kAbove, 0.0, 10, 1),
                 DomainError);
}

TEST(DetectPlanted, BackgroundOnlyReport) {
    HashFamilyParams p{16, 2, 1, 0};
    const auto report = detect_planted(500, 0, 16, p, 3,
                                       TupleConfig::equilateral(3, -0.4), 41);
    EXPECT_FALSE(report.recall.has_value());
    EXPECT_EQ(report.db_size, 500u);
    EXPECT_GT(report.bucket_count, 0u);
}

TEST(DetectPlanted, DuplicatePlantsAlwaysRecalled) {
    HashFamilyParams p{16, 2, 1, 0};
    const auto report = detect_planted(400, 10, 16, p, 3,
                                       TupleConfig::equilateral(3, 1.0), 42);
    ASSERT_TRUE(report.recall.has_value());
    EXPECT_DOUBLE_EQ(*report.recall, 1.0);
}

TEST(DetectPlanted, SeededReproducibility) {
    HashFamilyParams p{16, 2, 1, 0};
    const TupleConfig cfg = TupleConfig::equilateral(3, -0.4);
    const auto r1 = detect_planted(600, 15, 16, p, 3, cfg, 43);
    const auto r2 = detect_planted(600, 15, 16, p, 3, cfg, 43);
    EXPECT_EQ(r1.bucket_count, r2.bucket_count);
    EXPECT_EQ(r1.candidates_examined, r2.candidates_examined);
    EXPECT_EQ(*r1.recall, *r2.recall);
    EXPECT_DOUBLE_EQ(r1.background_rate, r2.background_rate);
    EXPECT_THROW(detect_planted(10, 5, 16, p, 3, cfg, 1), DomainError);
}

TEST(Io, ConfigJsonRoundTrip) {
    const TupleConfig cfg = TupleConfig::triple(-0.3, -0.25, -0.35);
    const TupleConfig back = config_from_json(config_to_json(cfg));
    EXPECT_TRUE(back.gram().isApprox(cfg.gram(), 1e-15));
}

TEST(Io, SweepSerializationDeterminism) {
    HashFamilyParams p{8, 1, 2, 0};
    const SweepResult a = sweep(-2.0, 0.25, 8, p, 3, 500, 77);
    const SweepResult b = sweep(-2.0, 0.25, 8, p, 3, 500, 77);
    EXPECT_EQ(sweep_to_csv(a), sweep_to_csv(b));
    EXPECT_EQ(sweep_to_json(a).dump(), sweep_to_json(b).dump());
    EXPECT_EQ(sweep_to_csv(a).substr(0, std::string(kSweepCsvHeader).size()),
              kSweepCsvHeader);
}

}  // namespace
}  // namespace rph
