#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "rph/errors.hpp"
#include "rph/special.hpp"

// Closed-form asymptotic collision and survival rates. The o(1)
// correction terms are dropped at the point of evaluation; the
// convergence tests characterize the finite-size gap instead of hiding
// it.

namespace rph {

struct AsymptoticInputs {
    double alpha;  ///< squared shortest dual diagonal, >= 1
    double delta;  ///< polar sine, in (0, 1]
    int k = 2;
    int a = 1;
    int b = 1;

    void validate() const {
        if (alpha < 1.0) throw DomainError("AsymptoticInputs: alpha must be >= 1");
        if (delta <= 0.0 || delta > 1.0)
            throw DomainError("AsymptoticInputs: delta must be in (0, 1]");
        if (a < 1 || b < 1 || k < 1)
            throw DomainError("AsymptoticInputs: a, b, k must be >= 1");
    }
};

/// Large-b leading-order collision rate: B(alpha a, b) / B(a, b).
inline double rate_large_b(const AsymptoticInputs& in) {
    in.validate();
    return std::exp(log_beta(in.alpha * in.a, in.b) - log_beta(in.a, in.b));
}

/// Companion power law b^{(1-alpha) a} for fixed a.
inline double rate_large_b_power(const AsymptoticInputs& in) {
    in.validate();
    return std::pow(static_cast<double>(in.b), (1.0 - in.alpha) * in.a);
}

/// Large-a collision rate: Delta^{-b} C(a+b, b)^{-(k-1)}.
inline double rate_large_a(const AsymptoticInputs& in) {
    in.validate();
    const double log_p = -in.b * std::log(in.delta) -
                         (in.k - 1) * log_choose(in.a + in.b, in.b);
    return std::exp(log_p);
}

/// Leading-order k-tuple survival rate of the |v.r| > C predicate:
/// (1 - Phi_k(C))^alpha.
inline double survival_above(double alpha, int k, double threshold) {
    if (threshold <= 0.0) throw DomainError("survival_above: threshold must be > 0");
    const double tail = phi_k_upper(k, threshold);
    return std::exp(alpha * std::log(tail));
}

/// Leading-order k-tuple survival rate of the |v.r| < c predicate:
/// Delta^{-1} (2 c^2 / pi)^{k/2}.
inline double survival_below(double delta, int k, double threshold) {
    if (threshold <= 0.0) throw DomainError("survival_below: threshold must be > 0");
    if (delta <= 0.0 || delta > 1.0)
        throw DomainError("survival_below: delta must be in (0, 1]");
    return std::pow(2.0 * threshold * threshold / std::numbers::pi, 0.5 * k) / delta;
}

/// Both sides of the identity
///   C(a+b, a) b B(1 + alpha a, b) = (alpha (a+b) / (alpha a + b)) B(alpha a, b) / B(a, b).
inline std::pair<double, double> beta_identity_check(double alpha, double a, double b) {
    if (alpha <= 0.0 || a <= 0.0 || b <= 0.0)
        throw DomainError("beta_identity_check: all arguments must be > 0");
    const double lhs =
        std::exp(log_choose(a + b, a) + std::log(b) + log_beta(1.0 + alpha * a, b));
    const double rhs = alpha * (a + b) / (alpha * a + b) *
                       std::exp(log_beta(alpha * a, b) - log_beta(a, b));
    return {lhs, rhs};
}

}  // namespace rph
