#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "rph/constants.hpp"
#include "rph/counter_rng.hpp"
#include "rph/errors.hpp"

// Exact linear algebra on k-tuples of unit vectors: Gram matrices, dual
// bases, the configuration functionals alpha (squared shortest dual
// diagonal) and Delta (polar sine), reducibility, and construction of
// tuples with prescribed pairwise dot products.

namespace rph {

/// A k-tuple of unit vectors in R^d, stored as the rows of a k x d matrix.
class UnitTuple {
public:
    UnitTuple(Eigen::MatrixXd vectors, bool require_independent = true)
        : vectors_(std::move(vectors)) {
        const int k = static_cast<int>(vectors_.rows());
        const int d = static_cast<int>(vectors_.cols());
        if (k < 1 || d < 1) throw DomainError("UnitTuple: empty tuple");
        for (int i = 0; i < k; ++i) {
            if (std::abs(vectors_.row(i).norm() - 1.0) > tol::kUnitNorm)
                throw NotUnitError("UnitTuple: vector " + std::to_string(i) +
                                   " is not unit length");
        }
        if (require_independent) {
            const Eigen::MatrixXd m = vectors_ * vectors_.transpose();
            if (m.determinant() <= tol::kGramDet)
                throw DegenerateError("UnitTuple: vectors are linearly dependent");
        }
    }

    int k() const { return static_cast<int>(vectors_.rows()); }
    int d() const { return static_cast<int>(vectors_.cols()); }
    const Eigen::MatrixXd& vectors() const { return vectors_; }
    Eigen::VectorXd vector(int i) const { return vectors_.row(i); }

private:
    Eigen::MatrixXd vectors_;  // rows are the tuple vectors
};

/// Pairwise dot products of a k-tuple: symmetric, unit diagonal.
/// Positive definiteness is demanded by the operations that need it, so
/// that the degenerate "duplicate vector" configuration (all
/// off-diagonals 1) can still be carried around by the experiment layer.
class TupleConfig {
public:
    explicit TupleConfig(Eigen::MatrixXd gram) : gram_(std::move(gram)) {
        const int k = static_cast<int>(gram_.rows());
        if (k < 1 || gram_.cols() != k)
            throw DomainError("TupleConfig: gram matrix must be square");
        for (int i = 0; i < k; ++i) {
            if (std::abs(gram_(i, i) - 1.0) > tol::kGramEntry)
                throw DomainError("TupleConfig: diagonal entries must be 1");
            for (int j = i + 1; j < k; ++j) {
                if (std::abs(gram_(i, j) - gram_(j, i)) > tol::kGramEntry)
                    throw DomainError("TupleConfig: gram matrix must be symmetric");
                // symmetrize exactly so downstream solvers see a clean input
                const double v = 0.5 * (gram_(i, j) + gram_(j, i));
                gram_(i, j) = gram_(j, i) = v;
            }
            gram_(i, i) = 1.0;
        }
    }

    /// k x k matrix with all off-diagonal entries equal to `off`.
    static TupleConfig equilateral(int k, double off) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Constant(k, k, off);
        m.diagonal().setOnes();
        return TupleConfig(std::move(m));
    }

    static TupleConfig identity(int k) {
        return TupleConfig(Eigen::MatrixXd::Identity(k, k));
    }

    /// k=3 convenience: off-diagonals (alpha, beta, gamma) with
    /// alpha = v2.v3, beta = v3.v1, gamma = v1.v2.
    static TupleConfig triple(double alpha, double beta, double gamma) {
        Eigen::MatrixXd m(3, 3);
        m << 1, gamma, beta, gamma, 1, alpha, beta, alpha, 1;
        return TupleConfig(std::move(m));
    }

    /// Rebuild from the row-major flat upper triangle (k*(k-1)/2 values).
    static TupleConfig from_upper(int k, const std::vector<double>& upper) {
        if (static_cast<int>(upper.size()) != k * (k - 1) / 2)
            throw DomainError("TupleConfig: wrong upper-triangle length");
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(k, k);
        int idx = 0;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) m(i, j) = m(j, i) = upper[idx++];
        return TupleConfig(std::move(m));
    }

    std::vector<double> upper() const {
        std::vector<double> out;
        for (int i = 0; i < k(); ++i)
            for (int j = i + 1; j < k(); ++j) out.push_back(gram_(i, j));
        return out;
    }

    int k() const { return static_cast<int>(gram_.rows()); }
    const Eigen::MatrixXd& gram() const { return gram_; }

    /// Sum of the 2*C(k,2) ordered pairwise products.
    double sigma() const { return gram_.sum() - static_cast<double>(k()); }

    double det() const { return gram_.determinant(); }

    bool positive_definite() const { return det() > tol::kGramDet; }

    /// All off-diagonals within tolerance of 1: the tuple collapses to a
    /// single repeated vector (handled specially by the experiment layer).
    bool duplicate_mode() const {
        for (int i = 0; i < k(); ++i)
            for (int j = i + 1; j < k(); ++j)
                if (std::abs(gram_(i, j) - 1.0) > tol::kGramEntry) return false;
        return k() > 1;
    }

    void require_pd(const char* who) const {
        if (!positive_definite())
            throw DegenerateError(std::string(who) +
                                  ": gram matrix is not positive definite");
    }

private:
    Eigen::MatrixXd gram_;
};

/// Configuration functionals of a tuple.
struct ConfigFunctionals {
    double alpha;               ///< min over signs of e^T M^-1 e, >= 1
    double delta;               ///< polar sine sqrt(det M), in (0,1]
    Eigen::VectorXi best_signs; ///< signs attaining the shortest +-1 combination
    double dmin_sq;             ///< min over signs of e^T M e
};

struct ReducibilityResult {
    Eigen::VectorXi best_signs;
    double dmin_sq;
    bool is_reducible;
};

namespace detail {

/// min over the 2^(k-1) essentially distinct sign vectors of e^T A e;
/// also reports the argmin (first component fixed to +1).
inline std::pair<double, Eigen::VectorXi> min_sign_form(const Eigen::MatrixXd& a) {
    const int k = static_cast<int>(a.rows());
    if (k > tol::kMaxSignEnumK)
        throw DomainError("sign enumeration limited to k <= 20");
    Eigen::VectorXd e(k);
    Eigen::VectorXi best = Eigen::VectorXi::Ones(k);
    double best_val = std::numeric_limits<double>::infinity();
    const std::uint64_t count = 1ull << (k - 1);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        e(0) = 1.0;
        for (int i = 1; i < k; ++i) e(i) = (mask >> (i - 1)) & 1 ? -1.0 : 1.0;
        const double val = e.dot(a * e);
        if (val < best_val) {
            best_val = val;
            best = e.cast<int>();
        }
    }
    return {best_val, best};
}

}  // namespace detail

/// Gram matrix of a tuple, with the same validity checks as UnitTuple.
inline TupleConfig gram_matrix(const UnitTuple& tuple) {
    const Eigen::MatrixXd& v = tuple.vectors();
    for (int i = 0; i < tuple.k(); ++i) {
        if (std::abs(v.row(i).norm() - 1.0) > tol::kUnitNorm)
            throw NotUnitError("gram_matrix: vector norm deviates from 1");
    }
    Eigen::MatrixXd m = v * v.transpose();
    if (m.determinant() <= tol::kGramDet)
        throw DegenerateError("gram_matrix: tuple is rank deficient");
    m.diagonal().setOnes();
    return TupleConfig(std::move(m));
}

/// Polar sine Delta = sqrt(max(det M, 0)).
inline double polar_sine(const TupleConfig& config) {
    return std::sqrt(std::max(config.det(), 0.0));
}

/// Squared shortest dual diagonal: min over sign vectors of e^T M^-1 e.
inline double squared_shortest_dual_diagonal(const TupleConfig& config) {
    config.require_pd("squared_shortest_dual_diagonal");
    const Eigen::MatrixXd minv = config.gram().inverse();
    return detail::min_sign_form(minv).first;
}

/// Shortest +-1 combination and the reducibility verdict.
inline ReducibilityResult reducibility(const TupleConfig& config) {
    auto [dmin_sq, signs] = detail::min_sign_form(config.gram());
    return {signs, dmin_sq, dmin_sq < 1.0 - tol::kReducible};
}

inline ConfigFunctionals config_functionals(const TupleConfig& config) {
    ConfigFunctionals out;
    out.alpha = squared_shortest_dual_diagonal(config);
    out.delta = polar_sine(config);
    auto red = reducibility(config);
    out.best_signs = red.best_signs;
    out.dmin_sq = red.dmin_sq;
    return out;
}

/// Dual basis u_1..u_k in span(V) with v_i . u_j = delta_ij.
inline std::vector<Eigen::VectorXd> dual_basis(const UnitTuple& tuple) {
    const Eigen::MatrixXd m = tuple.vectors() * tuple.vectors().transpose();
    if (m.determinant() <= tol::kGramDet)
        throw DegenerateError("dual_basis: tuple is rank deficient");
    const Eigen::MatrixXd u = m.inverse() * tuple.vectors();  // rows are duals
    std::vector<Eigen::VectorXd> out;
    out.reserve(tuple.k());
    for (int i = 0; i < tuple.k(); ++i) out.push_back(u.row(i));
    return out;
}

/// Random tuple with Gram matrix exactly `config`, uniform over
/// orientations: Gram-Schmidt frame of k i.i.d. Gaussian d-vectors times
/// a Cholesky factor of the Gram matrix.
inline UnitTuple make_tuple(const TupleConfig& config, int d, GaussianSource& rng) {
    const int k = config.k();
    if (d < k) throw DomainError("make_tuple: requires d >= k");

    if (config.duplicate_mode()) {
        Eigen::VectorXd v(d);
        do {
            for (int j = 0; j < d; ++j) v(j) = rng.next();
        } while (v.norm() < 1e-12);
        v.normalize();
        Eigen::MatrixXd rows(k, d);
        for (int i = 0; i < k; ++i) rows.row(i) = v;
        return UnitTuple(std::move(rows), /*require_independent=*/false);
    }

    // Cholesky when PD; rank-deficient but PSD configs (e.g. vectors
    // summing to zero) fall back to an eigendecomposition square root.
    Eigen::MatrixXd l;
    bool full_rank = true;
    Eigen::LLT<Eigen::MatrixXd> llt(config.gram());
    if (llt.info() == Eigen::Success && config.positive_definite()) {
        l = llt.matrixL();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(config.gram());
        if (es.eigenvalues().minCoeff() < -tol::kGramEntry)
            throw DegenerateError("make_tuple: gram matrix is indefinite");
        l = es.eigenvectors() *
            es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        full_rank = false;
    }

    // Haar-random orthonormal frame; degenerate draws have probability 0
    // but are retried anyway.
    Eigen::MatrixXd q(k, d);
    for (;;) {
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < d; ++j) q(i, j) = rng.next();
        bool ok = true;
        for (int i = 0; i < k && ok; ++i) {
            for (int j = 0; j < i; ++j) q.row(i) -= q.row(i).dot(q.row(j)) * q.row(j);
            const double n = q.row(i).norm();
            if (n < 1e-9) {
                ok = false;
                break;
            }
            q.row(i) /= n;
        }
        if (ok) break;
    }

    Eigen::MatrixXd v = l * q;
    for (int i = 0; i < k; ++i) v.row(i) /= v.row(i).norm();
    return UnitTuple(std::move(v), /*require_independent=*/full_rank);
}

}  // namespace rph
