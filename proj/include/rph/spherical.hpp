#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "rph/constants.hpp"
#include "rph/errors.hpp"
#include "rph/geometry.hpp"
#include "rph/quadrature.hpp"

// Spherical trigonometry for the triple-cap intersection area. The
// generic position (three boundary circles meeting pairwise with one
// intersection point of each pair inside the third cap) is handled in
// closed form via Girard/l'Huilier; every other configuration routes to
// a 1-dimensional adaptive quadrature over latitude rings, which is
// exact up to the requested tolerance.

namespace rph {

namespace sph {

inline constexpr double kPi = std::numbers::pi;

/// Angle between unit vectors, robust near 0 and pi.
inline double angle_between(const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
    return std::atan2(u.cross(v).norm(), u.dot(v));
}

/// Spherical excess of the triangle ABC (l'Huilier).
inline double triangle_excess(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                              const Eigen::Vector3d& c) {
    const double sa = angle_between(b, c);
    const double sb = angle_between(c, a);
    const double sc = angle_between(a, b);
    const double s = 0.5 * (sa + sb + sc);
    const double t = std::tan(0.5 * s) * std::tan(0.5 * (s - sa)) *
                     std::tan(0.5 * (s - sb)) * std::tan(0.5 * (s - sc));
    return 4.0 * std::atan(std::sqrt(std::max(t, 0.0)));
}

struct Cap {
    Eigen::Vector3d center;  // unit vector
    double theta;            // angular radius in [0, pi]
};

inline double cap_area(double theta) { return 2.0 * kPi * (1.0 - std::cos(theta)); }

/// Some orthonormal pair completing `c` to a frame.
inline void make_frame(const Eigen::Vector3d& c, Eigen::Vector3d& e1,
                       Eigen::Vector3d& e2) {
    Eigen::Vector3d ref = std::abs(c.x()) < 0.9 ? Eigen::Vector3d::UnitX()
                                                : Eigen::Vector3d::UnitY();
    e1 = c.cross(ref).normalized();
    e2 = c.cross(e1);
}

/// Overlap length of two arcs on a circle, each given by (center
/// azimuth, halfwidth <= pi).
inline double arc_overlap(double c1, double h1, double c2, double h2) {
    double d = std::fmod(std::abs(c1 - c2), 2.0 * kPi);
    if (d > kPi) d = 2.0 * kPi - d;
    const auto piece = [&](double x) {
        return std::max(0.0, std::min({h1 + h2 - x, 2.0 * h1, 2.0 * h2}));
    };
    return piece(d) + piece(2.0 * kPi - d);
}

/// Area of the intersection of `pole` with the remaining caps, computed
/// as a 1-D integral over latitude rings around the pole's center. Works
/// for any number of extra caps in {0, 1, 2}.
inline double cap_intersection_quadrature(const Cap& pole,
                                          const std::vector<Cap>& others,
                                          double tol = tol::kEtaTol) {
    Eigen::Vector3d e1, e2;
    make_frame(pole.center, e1, e2);

    struct Constraint {
        double dist;     // angle to the pole's center
        double psi;      // azimuth of the cap center in the pole frame
        double cos_theta;
    };
    std::vector<Constraint> cons;
    cons.reserve(others.size());
    for (const Cap& cap : others) {
        cons.push_back({angle_between(pole.center, cap.center),
                        std::atan2(cap.center.dot(e2), cap.center.dot(e1)),
                        std::cos(cap.theta)});
    }

    const auto ring_length = [&](double t) -> double {
        const double st = std::sin(t), ct = std::cos(t);
        // each constraint is a (possibly full or empty) azimuth arc
        double centers[2], widths[2];
        int n_arcs = 0;
        double full = 2.0 * kPi;
        for (const Constraint& k : cons) {
            const double denom = st * std::sin(k.dist);
            if (denom < 1e-14) {
                if (ct * std::cos(k.dist) < k.cos_theta) return 0.0;
                continue;  // whole ring allowed by this cap
            }
            const double u = (k.cos_theta - ct * std::cos(k.dist)) / denom;
            if (u >= 1.0) return 0.0;
            if (u <= -1.0) continue;
            centers[n_arcs] = k.psi;
            widths[n_arcs] = std::acos(u);
            ++n_arcs;
        }
        if (n_arcs == 0) return full;
        if (n_arcs == 1) return 2.0 * widths[0];
        return arc_overlap(centers[0], widths[0], centers[1], widths[1]);
    };

    return adaptive_simpson(
        [&](double t) { return ring_length(t) * std::sin(t); }, 0.0, pole.theta,
        tol);
}

/// Dispatches to the quadrature with the smallest cap as the pole.
inline double caps_area_quadrature(std::vector<Cap> caps, double tol = tol::kEtaTol) {
    std::sort(caps.begin(), caps.end(),
              [](const Cap& a, const Cap& b) { return a.theta < b.theta; });
    const Cap pole = caps.front();
    caps.erase(caps.begin());
    return cap_intersection_quadrature(pole, caps, tol);
}

/// Circular segment of cap (c, theta) cut off by the chord PQ, on the
/// arc side selected by `arc_inside` (given the arc midpoint, report
/// whether it bounds the target region). Returns nullopt when the
/// configuration is too degenerate to resolve.
template <typename Pred>
std::optional<double> cap_segment(const Cap& cap, const Eigen::Vector3d& p,
                                  const Eigen::Vector3d& q, const Pred& arc_inside) {
    if (angle_between(p, q) > kPi - 1e-7) return std::nullopt;  // chord ill-defined
    Eigen::Vector3d e1, e2;
    make_frame(cap.center, e1, e2);
    const double psi_p = std::atan2(p.dot(e2), p.dot(e1));
    const double psi_q = std::atan2(q.dot(e2), q.dot(e1));
    double w = psi_q - psi_p;
    while (w < 0.0) w += 2.0 * kPi;  // ccw width from P to Q

    const auto midpoint = [&](double psi0, double width) {
        const double m = psi0 + 0.5 * width;
        return (std::cos(cap.theta) * cap.center +
                std::sin(cap.theta) * (std::cos(m) * e1 + std::sin(m) * e2))
            .eval();
    };
    const bool first = arc_inside(midpoint(psi_p, w));
    const bool second = arc_inside(midpoint(psi_q, 2.0 * kPi - w));
    if (first == second) return std::nullopt;  // ambiguous; let caller fall back
    const double phi = first ? w : 2.0 * kPi - w;

    const double excess = triangle_excess(cap.center, p, q);
    const double sector = phi * (1.0 - std::cos(cap.theta));
    return phi <= kPi ? sector - excess : sector + excess;
}

/// Area of the intersection of two spherical caps.
inline double two_cap_area(const Cap& a, const Cap& b) {
    const double d = angle_between(a.center, b.center);
    if (d >= a.theta + b.theta) return 0.0;
    if (d <= std::abs(a.theta - b.theta))
        return cap_area(std::min(a.theta, b.theta));

    // two great circles: the intersection is a lune
    if (std::abs(a.theta - 0.5 * kPi) < 1e-9 && std::abs(b.theta - 0.5 * kPi) < 1e-9)
        return 2.0 * (kPi - d);

    const double g = a.center.dot(b.center);
    const double det = 1.0 - g * g;
    const double ca = (std::cos(a.theta) - g * std::cos(b.theta)) / det;
    const double cb = (std::cos(b.theta) - g * std::cos(a.theta)) / det;
    const double n2 = 1.0 - ca * ca - cb * cb - 2.0 * ca * cb * g;
    if (n2 < tol::kCapPredicate)
        return caps_area_quadrature({a, b});
    const Eigen::Vector3d axis = a.center.cross(b.center).normalized();
    const Eigen::Vector3d base = ca * a.center + cb * b.center;
    const Eigen::Vector3d p = base + std::sqrt(n2) * axis;
    const Eigen::Vector3d q = base - std::sqrt(n2) * axis;

    const auto inside_b = [&](const Eigen::Vector3d& x) {
        return x.dot(b.center) >= std::cos(b.theta);
    };
    const auto inside_a = [&](const Eigen::Vector3d& x) {
        return x.dot(a.center) >= std::cos(a.theta);
    };
    const auto seg_a = cap_segment(a, p, q, inside_b);
    const auto seg_b = cap_segment(b, p, q, inside_a);
    if (!seg_a || !seg_b) return caps_area_quadrature({a, b});
    return *seg_a + *seg_b;
}

/// Area of the intersection of three spherical caps on the unit sphere.
inline double triple_cap_area(const std::array<Cap, 3>& caps,
                              double tol = tol::kEtaTol) {
    const double eps = tol::kCapPredicate;
    for (const Cap& c : caps)
        if (c.theta < eps) return 0.0;

    // pairwise shortcuts: disjoint caps and cap containment
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            const double d = angle_between(caps[i].center, caps[j].center);
            if (d >= caps[i].theta + caps[j].theta - eps) {
                if (d >= caps[i].theta + caps[j].theta + eps) return 0.0;
                return caps_area_quadrature({caps[0], caps[1], caps[2]}, tol);
            }
            const double gap = std::abs(caps[i].theta - caps[j].theta);
            if (d <= gap + eps) {
                if (d >= gap - eps)
                    return caps_area_quadrature({caps[0], caps[1], caps[2]}, tol);
                const int inner = caps[i].theta <= caps[j].theta ? i : j;
                const int outer = i + j - inner;
                const int third = 3 - i - j;
                (void)outer;
                return two_cap_area(caps[inner], caps[third]);
            }
        }
    }

    // boundary-circle intersection points for each pair; exactly one per
    // pair must lie strictly inside the third cap for the generic case
    Eigen::Vector3d vertex[3];  // vertex[t]: point of the pair excluding t
    for (int t = 0; t < 3; ++t) {
        const int i = (t + 1) % 3, j = (t + 2) % 3;
        const double g = caps[i].center.dot(caps[j].center);
        const double det = 1.0 - g * g;
        const double ca = (std::cos(caps[i].theta) - g * std::cos(caps[j].theta)) / det;
        const double cb = (std::cos(caps[j].theta) - g * std::cos(caps[i].theta)) / det;
        const double n2 = 1.0 - ca * ca - cb * cb - 2.0 * ca * cb * g;
        if (n2 < eps)
            return caps_area_quadrature({caps[0], caps[1], caps[2]}, tol);
        const Eigen::Vector3d axis = caps[i].center.cross(caps[j].center).normalized();
        const Eigen::Vector3d base = ca * caps[i].center + cb * caps[j].center;
        const Eigen::Vector3d p = base + std::sqrt(n2) * axis;
        const Eigen::Vector3d q = base - std::sqrt(n2) * axis;

        const double sp = p.dot(caps[t].center) - std::cos(caps[t].theta);
        const double sq = q.dot(caps[t].center) - std::cos(caps[t].theta);
        if (std::abs(sp) < eps || std::abs(sq) < eps || (sp > 0.0) == (sq > 0.0))
            return caps_area_quadrature({caps[0], caps[1], caps[2]}, tol);
        vertex[t] = sp > 0.0 ? p : q;
    }

    const auto inside_both = [&](int t) {
        // predicate for the arc of circle t: must bound the region, i.e.
        // lie inside the other two caps
        return [&, t](const Eigen::Vector3d& x) {
            for (int u = 0; u < 3; ++u) {
                if (u == t) continue;
                if (x.dot(caps[u].center) < std::cos(caps[u].theta)) return false;
            }
            return true;
        };
    };

    double area = triangle_excess(vertex[0], vertex[1], vertex[2]);
    for (int t = 0; t < 3; ++t) {
        const int i = (t + 1) % 3, j = (t + 2) % 3;
        // circle t carries the vertices of the pairs that contain cap t
        const auto seg = cap_segment(caps[t], vertex[i], vertex[j], inside_both(t));
        if (!seg) return caps_area_quadrature({caps[0], caps[1], caps[2]}, tol);
        area += *seg;
    }
    return area;
}

}  // namespace sph

/// Spherical law of cosines: angle A opposite side aa, given sides
/// (aa, bb, cc) of a spherical triangle.
inline double spherical_angle(double aa, double bb, double cc) {
    const double pi = std::numbers::pi;
    if (aa <= 0.0 || aa >= pi || bb <= 0.0 || bb >= pi || cc <= 0.0 || cc >= pi)
        throw DegenerateError("spherical_angle: sides must lie in (0, pi)");
    if (aa > bb + cc || bb > aa + cc || cc > aa + bb || aa + bb + cc > 2.0 * pi)
        throw DegenerateError("spherical_angle: triangle inequalities violated");
    const double cos_a =
        (std::cos(aa) - std::cos(bb) * std::cos(cc)) / (std::sin(bb) * std::sin(cc));
    return std::acos(std::clamp(cos_a, -1.0, 1.0));
}

/// Fraction of the radius-rho sphere lying inside all three caps
/// centred on the signed rho*v_n with angular radii arccos(|l_n|/rho).
/// Signs are taken from the lambdas.
inline double triple_cap_fraction(const TupleConfig& config,
                                  const Eigen::Vector3d& lambdas, double rho,
                                  double tol = tol::kEtaTol) {
    if (config.k() != 3) throw DomainError("triple_cap_fraction: requires k = 3");
    config.require_pd("triple_cap_fraction");
    const Eigen::Vector3d abs_l = lambdas.cwiseAbs();
    if (rho <= 0.0) throw DomainError("triple_cap_fraction: requires rho > 0");
    if (rho * (1.0 + 1e-12) < abs_l.maxCoeff())
        throw DomainError("triple_cap_fraction: requires rho >= max |lambda|");

    Eigen::Vector3d signs;
    // signbit keeps the orientation of -0.0 entries, so degenerate
    // corners still select the intended hemisphere triple
    for (int n = 0; n < 3; ++n) signs(n) = std::signbit(lambdas(n)) ? -1.0 : 1.0;
    const Eigen::Matrix3d signed_gram =
        signs.asDiagonal() * config.gram() * signs.asDiagonal();

    Eigen::LLT<Eigen::Matrix3d> llt(signed_gram);
    if (llt.info() != Eigen::Success)
        throw DegenerateError("triple_cap_fraction: Cholesky failed");
    const Eigen::Matrix3d l = llt.matrixL();

    std::array<sph::Cap, 3> caps;
    for (int n = 0; n < 3; ++n) {
        caps[n].center = l.row(n).transpose().normalized();
        caps[n].theta = std::acos(std::clamp(abs_l(n) / rho, 0.0, 1.0));
    }
    return sph::triple_cap_area(caps, tol) / (4.0 * std::numbers::pi);
}

}  // namespace rph
