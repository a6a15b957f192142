#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "rph/constants.hpp"
#include "rph/errors.hpp"
#include "rph/geometry.hpp"
#include "rph/quadrature.hpp"
#include "rph/special.hpp"
#include "rph/spherical.hpp"

// Deterministic evaluation of collision probabilities for b = 1 and
// a = 1: the exterior mass G (radial integrals of triple-cap fractions
// over the conjugate corners), the interior mass F (k-dimensional box
// quadrature of the inverse-Gram Gaussian density), and the outer
// (k+1)-dimensional collision integral.

namespace rph {

enum class CollisionMode {
    kMinIndex,  ///< b = 1: collide on the discarded smallest projection
    kMaxIndex,  ///< a = 1: collide on the single largest projection
};

struct QuadratureSpec {
    double abs_tol = tol::kQuadTol;
    /// Outer truncation radius; 0 selects it from the Gaussian tail so
    /// that the neglected mass is below abs_tol / 10.
    double truncation = 0.0;
    /// Per-axis Gauss-Legendre orders tried in turn until two
    /// consecutive results agree within abs_tol.
    std::vector<int> outer_orders = {16, 24, 32, 48};
    /// Radial tolerance inside G, as a fraction of abs_tol.
    double radial_tol_factor = 1e-3;
    /// Fixed per-axis order for interior-mass evaluations in the outer
    /// integral.
    int interior_order = 20;

    double outer_radius(int k) const {
        if (truncation > 0.0) return truncation;
        // marginal of each lambda under the inverse-Gram density is N(0,1)
        double t = 4.0;
        while (2.0 * k * (1.0 - normal_cdf(t)) >= 0.1 * abs_tol) t += 0.5;
        return t;
    }
};

/// Radial density of the length of a 3-dimensional standard Gaussian:
/// sqrt(2/pi) rho^2 exp(-rho^2/2). Integrates to 1.
inline double chi3_radial_density(double rho) {
    return std::sqrt(2.0 / std::numbers::pi) * rho * rho *
           std::exp(-0.5 * rho * rho);
}

namespace detail {

/// All 2^(k-1) sign patterns with the first component fixed to +1.
inline std::vector<Eigen::VectorXd> half_sign_patterns(int k) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(1ull << (k - 1));
    for (std::uint64_t mask = 0; mask < (1ull << (k - 1)); ++mask) {
        Eigen::VectorXd s(k);
        s(0) = 1.0;
        for (int i = 1; i < k; ++i) s(i) = (mask >> (i - 1)) & 1 ? -1.0 : 1.0;
        out.push_back(std::move(s));
    }
    return out;
}

/// Distance from the origin to the cone {x : x . w_i >= lam_i for all i}
/// with lam >= 0, where `gram` is the Gram matrix of the unit vectors
/// w_i. The nearest point has some active set A; enumerate all nonempty
/// subsets, solve the equality-constrained projection, and keep the
/// candidates that are feasible (remaining constraints hold) and optimal
/// (nonnegative multipliers). The full corner is always feasible, so the
/// corner distance is the fallback upper bound.
inline double cone_distance(const Eigen::MatrixXd& gram,
                            const Eigen::VectorXd& lambdas) {
    const int k = static_cast<int>(lambdas.size());
    double best_sq = lambdas.dot(gram.fullPivLu().solve(lambdas));  // corner
    for (int mask = 1; mask < (1 << k) - 1; ++mask) {
        std::vector<int> active;
        for (int i = 0; i < k; ++i)
            if ((mask >> i) & 1) active.push_back(i);
        const int m = static_cast<int>(active.size());
        Eigen::MatrixXd sub(m, m);
        Eigen::VectorXd rhs(m);
        for (int i = 0; i < m; ++i) {
            rhs(i) = lambdas(active[i]);
            for (int j = 0; j < m; ++j) sub(i, j) = gram(active[i], active[j]);
        }
        const Eigen::VectorXd y = sub.fullPivLu().solve(rhs);
        if (y.minCoeff() < 0.0) continue;  // not the optimal active set
        bool feasible = true;
        for (int j = 0; j < k && feasible; ++j) {
            if ((mask >> j) & 1) continue;
            double dot = 0.0;
            for (int i = 0; i < m; ++i) dot += gram(j, active[i]) * y(i);
            feasible = dot >= lambdas(j) - 1e-12;
        }
        if (!feasible) continue;
        best_sq = std::min(best_sq, rhs.dot(y));
    }
    return std::sqrt(std::max(best_sq, 0.0));
}

}  // namespace detail

/// Gaussian mass of the exterior angles at the 8 conjugate corners of
/// the parallelepiped {r : |r.v_n| <= |lambda_n|} for k = 3: sum over
/// the 4 essentially distinct corner sign patterns (antipodal corners
/// merged, hence the doubling) of the radial integral of the triple-cap
/// fraction against the chi-3 radial density.
inline double exterior_mass_G(const TupleConfig& config,
                              const Eigen::Vector3d& lambdas,
                              double abs_tol = 1e-7) {
    if (config.k() != 3) throw DomainError("exterior_mass_G: requires k = 3");
    config.require_pd("exterior_mass_G");
    const Eigen::Vector3d abs_l = lambdas.cwiseAbs();
    const Eigen::Matrix3d minv = config.gram().inverse();

    const double radius_cap = 8.0;  // chi-3 upper tail below 1e-12 here
    double total = 0.0;
    for (const Eigen::VectorXd& s : detail::half_sign_patterns(3)) {
        Eigen::Vector3d corner;
        // copysign keeps the pattern sign on zero entries (as -0.0)
        for (int n = 0; n < 3; ++n) corner(n) = std::copysign(abs_l(n), s(n));
        // radial support starts at the distance from the origin to the
        // cone of this sign pattern, which is shorter than the corner
        // distance when the corner is not the cone's nearest point
        const Eigen::Matrix3d signed_gram = s.asDiagonal() *
                                            config.gram() *
                                            s.asDiagonal();
        const double w_norm = detail::cone_distance(signed_gram, abs_l);
        if (w_norm >= radius_cap) continue;  // tail mass below tolerance
        const double mass = adaptive_simpson(
            [&](double rho) {
                if (rho <= 0.0) return 0.0;  // radial density vanishes
                return triple_cap_fraction(config, corner, rho) *
                       chi3_radial_density(rho);
            },
            w_norm, radius_cap, 0.125 * abs_tol);
        total += 2.0 * mass;
    }
    return total;
}

/// Gaussian mass of the interior {r : |r.v_n| <= |lambda_n| for all n},
/// via product Gauss-Legendre quadrature over the lambda-box of
/// exp(-q_{M^-1}/2) / (Delta (2 pi)^{k/2}), at a fixed per-axis order.
inline double interior_mass_F_fixed(const Eigen::MatrixXd& gram_inverse,
                                    double delta, const Eigen::VectorXd& lambdas,
                                    int order) {
    const int k = static_cast<int>(lambdas.size());
    const Eigen::VectorXd abs_l = lambdas.cwiseAbs();
    if (abs_l.minCoeff() == 0.0) return 0.0;

    const GaussRule& rule = gauss_legendre(order);
    // map nodes per axis once
    Eigen::MatrixXd nodes(k, order);
    Eigen::MatrixXd weights(k, order);
    for (int i = 0; i < k; ++i) {
        for (int m = 0; m < order; ++m) {
            nodes(i, m) = abs_l(i) * rule.nodes[m];
            weights(i, m) = abs_l(i) * rule.weights[m];
        }
    }

    std::vector<int> idx(k, 0);
    Eigen::VectorXd point(k);
    double sum = 0.0;
    for (;;) {
        double w = 1.0;
        for (int i = 0; i < k; ++i) {
            point(i) = nodes(i, idx[i]);
            w *= weights(i, idx[i]);
        }
        sum += w * std::exp(-0.5 * point.dot(gram_inverse * point));
        int axis = 0;
        while (axis < k && ++idx[axis] == order) idx[axis++] = 0;
        if (axis == k) break;
    }
    const double norm = delta * std::pow(2.0 * std::numbers::pi, 0.5 * k);
    return sum / norm;
}

/// Interior mass with order escalation until two consecutive orders
/// agree within abs_tol.
inline double interior_mass_F(const TupleConfig& config,
                              const Eigen::VectorXd& lambdas,
                              double abs_tol = 1e-8) {
    if (config.k() != lambdas.size())
        throw DomainError("interior_mass_F: lambda count must match k");
    config.require_pd("interior_mass_F");
    const Eigen::MatrixXd minv = config.gram().inverse();
    const double delta = polar_sine(config);

    double prev = -1.0;
    for (int order : {12, 16, 24, 32, 48}) {
        const double cur = interior_mass_F_fixed(minv, delta, lambdas, order);
        if (prev >= 0.0 && std::abs(cur - prev) < 0.5 * abs_tol) return cur;
        prev = cur;
    }
    throw ToleranceError("interior_mass_F: tolerance not met");
}

/// Probability of a k-way collision for H_{R,h-1,1} (min-index) or
/// H_{R,1,h-1} (max-index), by the (k+1)-dimensional integral
///   h / (Delta (2 pi)^{k/2}) * Int W(lambda)^{h-1} exp(-q_{M^-1}/2) dlambda
/// with W = G (min-index) or W = F (max-index). The outer integral runs
/// over the positive orthant, with the density summed over the 2^k sign
/// conjugates.
inline double collision_prob_numeric(const TupleConfig& config, int h,
                                     CollisionMode mode,
                                     const QuadratureSpec& spec = {}) {
    const int k = config.k();
    if (h < 2) throw DomainError("collision_prob_numeric: requires h >= 2");
    if (mode == CollisionMode::kMinIndex && k != 3)
        throw DomainError("collision_prob_numeric: min-index mode requires k = 3");
    if (mode == CollisionMode::kMaxIndex && (k < 2 || k > 4))
        throw DomainError("collision_prob_numeric: max-index mode requires 2 <= k <= 4");
    config.require_pd("collision_prob_numeric");

    const Eigen::MatrixXd minv = config.gram().inverse();
    const double delta = polar_sine(config);
    const double radius = spec.outer_radius(k);
    const auto patterns = detail::half_sign_patterns(k);
    const double g_tol = spec.radial_tol_factor * spec.abs_tol;

    const auto integrand = [&](const Eigen::VectorXd& lam) {
        double density = 0.0;
        for (const Eigen::VectorXd& s : patterns) {
            const Eigen::VectorXd x = s.cwiseProduct(lam);
            density += 2.0 * std::exp(-0.5 * x.dot(minv * x));
        }
        const double w =
            mode == CollisionMode::kMinIndex
                ? exterior_mass_G(config, Eigen::Vector3d(lam), g_tol)
                : interior_mass_F_fixed(minv, delta, lam, spec.interior_order);
        return std::pow(w, h - 1) * density;
    };

    const double norm = h / (delta * std::pow(2.0 * std::numbers::pi, 0.5 * k));
    double prev = -1.0;
    for (int order : spec.outer_orders) {
        const GaussRule& rule = gauss_legendre(order);
        std::vector<double> nodes(order), weights(order);
        for (int m = 0; m < order; ++m) {
            nodes[m] = 0.5 * radius * (rule.nodes[m] + 1.0);
            weights[m] = 0.5 * radius * rule.weights[m];
        }
        std::vector<int> idx(k, 0);
        Eigen::VectorXd lam(k);
        double sum = 0.0;
        for (;;) {
            double w = 1.0;
            for (int i = 0; i < k; ++i) {
                lam(i) = nodes[idx[i]];
                w *= weights[idx[i]];
            }
            sum += w * integrand(lam);
            int axis = 0;
            while (axis < k && ++idx[axis] == order) idx[axis++] = 0;
            if (axis == k) break;
        }
        const double cur = norm * sum;
        if (prev >= 0.0 && std::abs(cur - prev) < spec.abs_tol) return cur;
        prev = cur;
    }
    throw ToleranceError("collision_prob_numeric: tolerance not met");
}

}  // namespace rph
