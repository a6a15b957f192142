#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "rph/counter_rng.hpp"
#include "rph/errors.hpp"
#include "rph/geometry.hpp"

// The random projection hash family H_{R,a,b}: h = a + b Gaussian
// directions, the hash value is the sorted set of the a indices whose
// |dot product| with the input is largest. Sign and scale agnostic by
// construction.

namespace rph {

struct HashFamilyParams {
    int d = 0;           ///< ambient dimension
    int a = 1;           ///< retained-index count
    int b = 1;           ///< complement count
    std::uint64_t seed = 0;

    int h() const { return a + b; }

    void validate() const {
        if (a < 1 || b < 1 || d < 1)
            throw DomainError("HashFamilyParams: requires a >= 1, b >= 1, d >= 1");
    }
};

/// Sorted index set A of size a; indices are 1-based in {1..h}.
using HashValue = std::vector<int>;

struct HashValueHasher {
    std::size_t operator()(const HashValue& v) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (int i : v) h = detail::mix64(h ^ static_cast<std::uint64_t>(i));
        return static_cast<std::size_t>(h);
    }
};

/// One draw of the family: h Gaussian vectors, reproducible bit-exactly
/// from (seed, vector index, component index).
class HashInstance {
public:
    static HashInstance sample(const HashFamilyParams& params) {
        params.validate();
        Eigen::MatrixXd r(params.h(), params.d);
        for (int i = 0; i < params.h(); ++i)
            for (int j = 0; j < params.d; ++j)
                r(i, j) = rng_normal_at(params.seed, static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(j));
        return HashInstance(params, std::move(r));
    }

    /// Explicit vectors; used by tests to pin the instance.
    HashInstance(const HashFamilyParams& params, Eigen::MatrixXd r)
        : params_(params), r_(std::move(r)) {
        params_.validate();
        if (r_.rows() != params_.h() || r_.cols() != params_.d)
            throw DomainError("HashInstance: vector matrix has wrong shape");
    }

    const HashFamilyParams& params() const { return params_; }
    const Eigen::MatrixXd& vectors() const { return r_; }

    /// Reconstructs r_i(j) without materializing the instance.
    static double component(const HashFamilyParams& params, int i, int j) {
        return rng_normal_at(params.seed, static_cast<std::uint64_t>(i),
                             static_cast<std::uint64_t>(j));
    }

private:
    HashFamilyParams params_;
    Eigen::MatrixXd r_;  // h x d, row i is r_i
};

/// Index set of the a largest |r_i . v|; ties prefer the smaller index
/// into A. Invariant under v -> lambda v for lambda != 0.
inline HashValue hash_value(const HashInstance& inst, const Eigen::VectorXd& v) {
    const int h = inst.params().h();
    const int d = inst.params().d;
    if (v.size() != d) throw DomainError("hash_value: dimension mismatch");
    if (v.norm() == 0.0) throw ZeroVectorError("hash_value: zero input vector");

    std::vector<double> mag(h);
    for (int i = 0; i < h; ++i) {
        long double acc = 0.0L;  // extended-precision accumulation
        for (int j = 0; j < d; ++j)
            acc += static_cast<long double>(inst.vectors()(i, j)) * v(j);
        mag[i] = std::abs(static_cast<double>(acc));
    }

    std::vector<int> order(h);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        if (mag[x] != mag[y]) return mag[x] > mag[y];
        return x < y;  // least index wins the tie
    });

    HashValue a(order.begin(), order.begin() + inst.params().a);
    std::sort(a.begin(), a.end());
    for (int& i : a) ++i;  // 1-based
    return a;
}

/// True iff the hash value agrees on all k tuple vectors.
inline bool k_collision(const HashInstance& inst, const UnitTuple& tuple) {
    const HashValue first = hash_value(inst, tuple.vector(0));
    for (int i = 1; i < tuple.k(); ++i)
        if (hash_value(inst, tuple.vector(i)) != first) return false;
    return true;
}

/// Filter predicate: |v . r| > C.
inline bool predicate_above(const Eigen::VectorXd& r, double threshold,
                            const Eigen::VectorXd& v) {
    if (threshold <= 0.0) throw DomainError("predicate_above: threshold must be > 0");
    return std::abs(r.dot(v)) > threshold;
}

/// Filter predicate: |v . r| < c.
inline bool predicate_below(const Eigen::VectorXd& r, double threshold,
                            const Eigen::VectorXd& v) {
    if (threshold <= 0.0) throw DomainError("predicate_below: threshold must be > 0");
    return std::abs(r.dot(v)) < threshold;
}

}  // namespace rph
