#pragma once

// Central table of numeric tolerances. Every hard-coded epsilon in the
// library lives here so that the contracts of the individual operations
// stay in one place.

namespace rph::tol {

/// Allowed deviation of a "unit" vector's norm from 1.
inline constexpr double kUnitNorm = 1e-9;

/// Gram determinant at or below this is treated as rank deficient.
inline constexpr double kGramDet = 1e-12;

/// Symmetry / unit-diagonal slack when validating a Gram matrix.
inline constexpr double kGramEntry = 1e-9;

/// v_i . u_j = delta_ij slack for dual bases.
inline constexpr double kDualBasis = 1e-9;

/// Margin below 1 for declaring a +-1 combination strictly shorter.
inline constexpr double kReducible = 1e-12;

/// Predicate slack in the spherical-cap case analysis; anything closer
/// than this to a case boundary is routed to the quadrature fallback.
inline constexpr double kCapPredicate = 1e-9;

/// Default absolute tolerance for the collision-probability integrals.
inline constexpr double kQuadTol = 1e-4;

/// Absolute tolerance for a single triple-cap fraction evaluation.
inline constexpr double kEtaTol = 1e-10;

/// Exact sign enumeration is supported up to this tuple size.
inline constexpr int kMaxSignEnumK = 20;

}  // namespace rph::tol
