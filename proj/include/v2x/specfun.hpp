#pragma once

// Special functions needed by the V2V distance law and the origin-road
// Laplace transform: modified Bessel I_0/I_1, modified Struve L_0/L_{-1}
// and the Gauss hypergeometric function on the negative real axis.

namespace v2x::specfun {

/// Modified Bessel function of the first kind, orders 0 and 1, x >= 0.
///
/// Power series up to x = 20, Hankel-type asymptotic expansion above.
/// Throws std::domain_error for other orders or negative x and
/// std::overflow_error once the result is no longer representable
/// (x above roughly 713).
double bessel_i(int order, double x);

/// Modified Struve function L_nu for nu in {-1, 0}, x >= 0.
///
/// Power series up to x = 20; above that L_0 = I_0 - (I_0 - L_0) and
/// L_{-1} = I_1 + (L_{-1} - I_1) with the differences taken from
/// bessel_i0_minus_struve_l0 / struve_lm1_minus_bessel_i1.
double struve_l(int order, double x);

/// I_0(x) - L_0(x) evaluated without cancellation.
///
/// Equals (2/pi) * int_0^{pi/2} exp(-x cos t) dt; decays like 2/(pi x).
double bessel_i0_minus_struve_l0(double x);

/// L_{-1}(x) - I_1(x) evaluated without cancellation.
///
/// Equals (2/pi) * int_0^{pi/2} cos t exp(-x cos t) dt; decays like 2/(pi x^2).
double struve_lm1_minus_bessel_i1(double x);

/// Gauss hypergeometric 2F1(a, b; c; z) for z <= 0.
///
/// |z| <= 1/2 uses the defining series, -1 <= z < -1/2 the Pfaff
/// transformation onto z/(z-1), and z < -1 the connection formula onto
/// 1/(1-z) (falling back to the Pfaff series when a - b is an integer).
/// Throws std::domain_error for z > 0 or c a nonpositive integer.
double gauss_2f1(double a, double b, double c, double z);

/// 2F1 through the second Pfaff transformation
/// (1-z)^{-b} 2F1(b, c-a; c; z/(z-1)) summed directly.
///
/// Shares no code path with gauss_2f1 beyond the series kernel; used to
/// cross-check it. Converges for every z <= 0 but slowly as z -> -inf.
double gauss_2f1_pfaff(double a, double b, double c, double z);

}  // namespace v2x::specfun
