#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "rph/counter_rng.hpp"
#include "rph/errors.hpp"
#include "rph/geometry.hpp"
#include "rph/hash.hpp"

// Monte-Carlo estimation of k-way collision and predicate-survival
// rates. Every trial is an independent work unit keyed by its index, so
// results are identical regardless of worker count.

namespace rph {

struct CollisionEstimate {
    std::uint64_t trials = 0;
    std::uint64_t collisions = 0;
    double p_hat = 0.0;
    double ci_low = 0.0;   // Wilson score, 95%
    double ci_high = 0.0;
    HashFamilyParams params;
    int d = 0;
    int k = 0;
    std::uint64_t seed = 0;

    double std_error() const {
        return std::sqrt(std::max(p_hat * (1.0 - p_hat), 1e-300) /
                         static_cast<double>(trials));
    }
};

/// Wilson score interval at 95% confidence.
inline std::pair<double, double> wilson_interval(std::uint64_t successes,
                                                 std::uint64_t trials) {
    if (trials == 0) throw DomainError("wilson_interval: trials must be >= 1");
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    // exact endpoints at the boundary counts (kills FP residue)
    const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
    const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

/// Two-sided Chernoff-bound sample count for estimating a rate p to
/// relative error rel_err at the given confidence:
///   N = 3 ln(2 / (1 - confidence)) / (rel_err^2 p).
inline std::uint64_t required_trials(double p_guess, double rel_err,
                                     double confidence) {
    if (p_guess <= 0.0 || p_guess > 1.0)
        throw DomainError("required_trials: p_guess must be in (0, 1]");
    if (rel_err <= 0.0) throw DomainError("required_trials: rel_err must be > 0");
    if (confidence <= 0.0 || confidence >= 1.0)
        throw DomainError("required_trials: confidence must be in (0, 1)");
    const double n =
        3.0 * std::log(2.0 / (1.0 - confidence)) / (rel_err * rel_err * p_guess);
    return static_cast<std::uint64_t>(std::ceil(n));
}

/// Ratio of logs: log(p_x) / log(p_y).
inline double log_ratio(double p_x, double p_y) {
    if (p_x <= 0.0 || p_x >= 1.0 || p_y <= 0.0 || p_y >= 1.0)
        throw DomainError("log_ratio: rates must lie strictly in (0, 1)");
    return std::log(p_x) / std::log(p_y);
}

/// Worker count: RPHASH_THREADS if set, else hardware concurrency.
inline int worker_count() {
    if (const char* env = std::getenv("RPHASH_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

/// Counts trials for which `pred(trial_index)` is true. The count is a
/// commutative reduction, so the result is independent of the worker
/// partition.
template <typename Pred>
std::uint64_t parallel_count(std::uint64_t trials, const Pred& pred) {
    const int workers = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(worker_count()),
                                std::max<std::uint64_t>(trials, 1)));
    if (workers <= 1) {
        std::uint64_t count = 0;
        for (std::uint64_t t = 0; t < trials; ++t)
            if (pred(t)) ++count;
        return count;
    }
    std::vector<std::uint64_t> counts(workers, 0);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::uint64_t lo = trials * w / workers;
            const std::uint64_t hi = trials * (w + 1) / workers;
            std::uint64_t local = 0;
            for (std::uint64_t t = lo; t < hi; ++t)
                if (pred(t)) ++local;
            counts[w] = local;
        });
    }
    for (auto& th : pool) th.join();
    std::uint64_t total = 0;
    for (std::uint64_t c : counts) total += c;
    return total;
}

namespace detail {

// substream labels within one trial
inline constexpr std::uint64_t kStreamTuple = 0;
inline constexpr std::uint64_t kStreamInstance = 1;
inline constexpr std::uint64_t kStreamProbe = 2;
inline constexpr std::uint64_t kStreamDatabase = 3;

}  // namespace detail

/// Monte-Carlo k-way collision rate: each trial draws a fresh hash
/// instance and a fresh tuple with the prescribed Gram matrix.
inline CollisionEstimate estimate_collision_rate(const TupleConfig& config, int d,
                                                 HashFamilyParams params, int k,
                                                 std::uint64_t trials,
                                                 std::uint64_t seed) {
    if (trials < 1) throw DomainError("estimate_collision_rate: trials must be >= 1");
    if (config.k() != k)
        throw DomainError("estimate_collision_rate: config size must equal k");
    // PSD but singular configs (e.g. vectors summing to zero) are valid
    // MC subjects; make_tuple handles the rank-deficient factorization.
    params.d = d;
    params.validate();

    const std::uint64_t hits = parallel_count(trials, [&](std::uint64_t t) {
        GaussianSource tuple_rng(derive_seed(seed, t, detail::kStreamTuple), 0);
        const UnitTuple tuple = make_tuple(config, d, tuple_rng);
        HashFamilyParams inst_params = params;
        inst_params.seed = derive_seed(seed, t, detail::kStreamInstance);
        const HashInstance inst = HashInstance::sample(inst_params);
        return k_collision(inst, tuple);
    });

    CollisionEstimate est;
    est.trials = trials;
    est.collisions = hits;
    est.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
    std::tie(est.ci_low, est.ci_high) = wilson_interval(hits, trials);
    est.params = params;
    est.d = d;
    est.k = k;
    est.seed = seed;
    return est;
}

struct SweepCell {
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    bool skipped = false;  // gram not positive definite
    CollisionEstimate estimate;
};

struct SweepResult {
    double sigma = 0.0;
    double grid_step = 0.0;
    HashFamilyParams params;
    int d = 0, k = 0;
    std::uint64_t trials_per_cell = 0;
    std::uint64_t seed = 0;
    std::vector<SweepCell> cells;
};

/// Grid sweep over (alpha, beta, gamma) with alpha, beta, gamma < 0 and
/// 2(alpha + beta + gamma) = sigma. The centre cell alpha = beta =
/// gamma = sigma/6 is always included.
inline SweepResult sweep(double sigma, double grid_step, int d,
                         HashFamilyParams params, int k, std::uint64_t trials,
                         std::uint64_t seed) {
    if (sigma >= 0.0) throw DomainError("sweep: sigma must be negative");
    if (grid_step <= 0.0) throw DomainError("sweep: grid step must be positive");
    if (k != 3) throw DomainError("sweep: only k = 3 grids are supported");

    SweepResult result;
    result.sigma = sigma;
    result.grid_step = grid_step;
    result.params = params;
    result.d = d;
    result.k = k;
    result.trials_per_cell = trials;
    result.seed = seed;

    const double half_sigma = 0.5 * sigma;
    std::vector<std::pair<double, double>> points;  // (alpha, beta)
    const int max_steps = static_cast<int>(std::floor(1.0 / grid_step));
    for (int i = 1; i <= max_steps; ++i) {
        for (int j = 1; j <= max_steps; ++j) {
            const double alpha = -i * grid_step;
            const double beta = -j * grid_step;
            const double gamma = half_sigma - alpha - beta;
            if (gamma >= 0.0 || gamma <= -1.0) continue;
            points.emplace_back(alpha, beta);
        }
    }
    const double centre = sigma / 6.0;
    const bool centre_on_grid = [&] {
        for (const auto& [a, b] : points) {
            const double g = half_sigma - a - b;
            if (a == centre && b == centre && std::abs(g - centre) < 1e-12)
                return true;
        }
        return false;
    }();
    if (!centre_on_grid && centre > -1.0) points.emplace_back(centre, centre);

    std::uint64_t cell_index = 0;
    for (const auto& [alpha, beta] : points) {
        const double gamma = half_sigma - alpha - beta;
        SweepCell cell;
        cell.alpha = alpha;
        cell.beta = beta;
        cell.gamma = gamma;
        const TupleConfig config = TupleConfig::triple(alpha, beta, gamma);
        if (!config.positive_definite()) {
            cell.skipped = true;
        } else {
            cell.estimate = estimate_collision_rate(
                config, d, params, k, trials, derive_seed(seed, cell_index, 17));
        }
        result.cells.push_back(std::move(cell));
        ++cell_index;
    }
    return result;
}

enum class SurvivalMode { kAbove, kBelow };

/// Monte-Carlo probability that one Gaussian vector passes the filter
/// predicate for all k tuple vectors simultaneously. The tuple is fixed
/// (the rate depends only on its Gram matrix); each trial draws a fresh
/// Gaussian probe.
inline CollisionEstimate survival_rate(const TupleConfig& config, int d, int k,
                                       SurvivalMode mode, double threshold,
                                       std::uint64_t trials, std::uint64_t seed) {
    if (threshold <= 0.0) throw DomainError("survival_rate: threshold must be > 0");
    if (trials < 1) throw DomainError("survival_rate: trials must be >= 1");
    if (config.k() != k) throw DomainError("survival_rate: config size must equal k");

    GaussianSource tuple_rng(derive_seed(seed, ~0ull, detail::kStreamTuple), 0);
    const UnitTuple tuple = make_tuple(config, d, tuple_rng);

    const std::uint64_t hits = parallel_count(trials, [&](std::uint64_t t) {
        GaussianSource probe_rng(derive_seed(seed, t, detail::kStreamProbe), 0);
        Eigen::VectorXd r(d);
        for (int j = 0; j < d; ++j) r(j) = probe_rng.next();
        for (int i = 0; i < k; ++i) {
            const double dot = std::abs(r.dot(tuple.vector(i)));
            if (mode == SurvivalMode::kAbove ? dot <= threshold : dot >= threshold)
                return false;
        }
        return true;
    });

    CollisionEstimate est;
    est.trials = trials;
    est.collisions = hits;
    est.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
    std::tie(est.ci_low, est.ci_high) = wilson_interval(hits, trials);
    est.d = d;
    est.k = k;
    est.seed = seed;
    return est;
}

struct DetectReport {
    std::uint64_t db_size = 0;
    std::uint64_t n_planted = 0;
    int k = 0;
    std::uint64_t bucket_count = 0;
    std::uint64_t max_bucket = 0;
    std::optional<double> recall;       // absent when n_planted = 0
    double background_rate = 0.0;       // co-bucketing rate of random k-subsets
    std::uint64_t candidates_examined = 0;
    std::uint64_t candidates_reducible = 0;
    double false_candidate_rate = 0.0;
    bool truncated = false;             // bucket enumeration hit the cap
};

/// Builds a vector database (random unit vectors plus planted tuples),
/// buckets everything by hash value, and reports the recall of planted
/// tuples against the background co-bucketing rate.
inline DetectReport detect_planted(std::uint64_t db_size, std::uint64_t n_planted,
                                   int d, HashFamilyParams params, int k,
                                   const TupleConfig& planted_config,
                                   std::uint64_t seed,
                                   std::uint64_t max_candidates = 1000000) {
    if (n_planted * k > db_size)
        throw DomainError("detect_planted: planted vectors exceed database size");
    if (planted_config.k() != k)
        throw DomainError("detect_planted: config size must equal k");
    params.d = d;
    params.validate();
    params.seed = derive_seed(seed, 0, detail::kStreamInstance);
    const HashInstance inst = HashInstance::sample(params);

    // database layout: planted tuples first, then random fill
    std::vector<Eigen::VectorXd> db;
    db.reserve(db_size);
    for (std::uint64_t p = 0; p < n_planted; ++p) {
        GaussianSource rng(derive_seed(seed, p, detail::kStreamTuple), 0);
        const UnitTuple tuple = make_tuple(planted_config, d, rng);
        for (int i = 0; i < k; ++i) db.push_back(tuple.vector(i));
    }
    const std::uint64_t n_random = db_size - n_planted * k;
    for (std::uint64_t v = 0; v < n_random; ++v) {
        GaussianSource rng(derive_seed(seed, v, detail::kStreamDatabase), 0);
        Eigen::VectorXd x(d);
        double norm = 0.0;
        do {
            for (int j = 0; j < d; ++j) x(j) = rng.next();
            norm = x.norm();
        } while (norm < 1e-12);
        db.push_back(x / norm);
    }

    std::unordered_map<HashValue, std::vector<std::uint64_t>, HashValueHasher>
        buckets;
    std::vector<HashValue> values(db_size);
    for (std::uint64_t i = 0; i < db_size; ++i) {
        values[i] = hash_value(inst, db[i]);
        buckets[values[i]].push_back(i);
    }

    DetectReport report;
    report.db_size = db_size;
    report.n_planted = n_planted;
    report.k = k;
    report.bucket_count = buckets.size();
    for (const auto& [key, members] : buckets)
        report.max_bucket = std::max<std::uint64_t>(report.max_bucket, members.size());

    if (n_planted > 0) {
        std::uint64_t recovered = 0;
        for (std::uint64_t p = 0; p < n_planted; ++p) {
            bool same = true;
            for (int i = 1; i < k; ++i)
                if (values[p * k + i] != values[p * k]) same = false;
            if (same) ++recovered;
        }
        report.recall = static_cast<double>(recovered) / static_cast<double>(n_planted);
    }

    // background: probability that k random (non-planted) vectors share a
    // bucket, from the bucket occupancy counts
    if (n_random >= static_cast<std::uint64_t>(k)) {
        const auto log_c = [](double n, double r) {
            return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) -
                   std::lgamma(n - r + 1.0);
        };
        double num = 0.0;
        for (const auto& [key, members] : buckets) {
            std::uint64_t r = 0;
            for (std::uint64_t i : members)
                if (i >= n_planted * k) ++r;
            if (r >= static_cast<std::uint64_t>(k))
                num += std::exp(log_c(static_cast<double>(r), k));
        }
        report.background_rate =
            num / std::exp(log_c(static_cast<double>(n_random), k));
    }

    // candidate scan: k-subsets per bucket, verified by reducibility of
    // the actual Gram matrix, capped to guard against bucket blowup
    for (const auto& [key, members] : buckets) {
        const std::uint64_t m = members.size();
        if (m < static_cast<std::uint64_t>(k)) continue;
        std::vector<std::uint64_t> idx(k);
        for (int i = 0; i < k; ++i) idx[i] = i;
        for (;;) {
            if (report.candidates_examined >= max_candidates) {
                report.truncated = true;
                break;
            }
            ++report.candidates_examined;
            Eigen::MatrixXd gram(k, k);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    gram(i, j) = i == j ? 1.0
                                        : db[members[idx[i]]].dot(db[members[idx[j]]]);
            const TupleConfig cand(std::move(gram));
            if (reducibility(cand).is_reducible) ++report.candidates_reducible;

            int axis = k - 1;
            while (axis >= 0 && idx[axis] == m - static_cast<std::uint64_t>(k) + axis)
                --axis;
            if (axis < 0) break;
            ++idx[axis];
            for (int i = axis + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
        }
        if (report.truncated) break;
    }
    if (report.candidates_examined > 0)
        report.false_candidate_rate =
            1.0 - static_cast<double>(report.candidates_reducible) /
                      static_cast<double>(report.candidates_examined);
    return report;
}

}  // namespace rph
