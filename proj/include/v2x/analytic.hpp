#pragma once

// Closed-form and integral-form expressions of the uplink reliability model:
// nearest-distance laws, link association probabilities, Laplace transforms
// of the interference and the resulting success probabilities.
//
// Units are linear throughout (Km, mW, 1/Km, 1/Km^2).

#include "v2x/network_params.hpp"
#include "v2x/quadrature.hpp"

namespace v2x::analytic {

using specfun::kInfinity;
using specfun::QuadratureSpec;

/// Argument of the per-road and all-road Laplace transforms.
///
/// s is the Laplace variable; the integrands only ever see s * tx_power,
/// which for a serving link at distance r and threshold z equals z r^alpha.
struct LaplaceArg {
  double s = 0.0;
  double r = 0.0;  ///< exclusion radius: no interferer inside B(0, r)
  double alpha = 4.0;
  double mu_v = 0.0;
  double lambda_R = 0.0;
  double tx_power = 1.0;
  /// Interferers lie in B(0, window_radius). Infinite by default.
  double window_radius = kInfinity;

  /// s for threshold z and serving distance r: z / (P r^{-alpha}).
  static LaplaceArg for_link(double z, double r, double alpha, double mu_v, double lambda_R, double tx_power);

  void validate() const;
};

struct SuccessBreakdown {
  double p_v2v_success = 0.0;  ///< success and V2V selected
  double p_v2b_success = 0.0;  ///< success and V2B selected
  double p_v2v_assoc = 0.0;
  double p_v2b_assoc = 0.0;
  double p_v2x = 0.0;          ///< p_v2v_success + p_v2b_success
  double p_v2v_only = 0.0;     ///< V2V forced, no cellular fallback
};

// Distance laws ------------------------------------------------------------

/// Pr(r_v > r): no transmitting vehicle in B(0, r), typical road included.
double v2v_ccdf(double r_v, const NetworkParams& p);
double v2v_cdf(double r_v, const NetworkParams& p);
/// Closed-form density of r_v through I_0 - L_0 and L_{-1} - I_1.
double v2v_pdf(double r_v, const NetworkParams& p);
/// Nearest base station density 2 pi lambda_b r exp(-pi lambda_b r^2).
double v2b_pdf(double r_b, double lambda_b);
/// Median of r_v (bisection on the CCDF).
double v2v_median(const NetworkParams& p);

// Association ---------------------------------------------------------------

/// Pr(V2V chosen | r_v): no base station within r_v^{alpha_v/alpha_b} B^{-1/alpha_b}.
double assoc_v2v_given_rv(double r_v, const NetworkParams& p);
double assoc_v2v(const NetworkParams& p, const QuadratureSpec& spec = {});
/// Pr(V2B chosen | r_b): no vehicle within B^{1/alpha_v} r_b^{alpha_b/alpha_v}.
double assoc_v2b_given_rb(double r_b, const NetworkParams& p);
double assoc_v2b(const NetworkParams& p, const QuadratureSpec& spec = {});

// Laplace transforms ---------------------------------------------------------

/// Road at distance y >= r, every vehicle on it may interfere. Always by
/// quadrature along the road.
double laplace_road_outside(const LaplaceArg& arg, double y);
/// Same for alpha = 4 in closed form (infinite window only).
double laplace_road_outside_closed_form(const LaplaceArg& arg, double y);
/// Road at distance y < r: vehicles on the chord inside B(0, r) are excluded.
double laplace_road_inside(const LaplaceArg& arg, double y);

enum class OriginRoadMethod {
  integral,         ///< direct quadrature over the road
  hypergeometric,   ///< general alpha through 2F1
  quartic,          ///< alpha = 4 elementary closed form
};

/// Road through the receiver with the serving link at distance r and
/// threshold z (s P = z r^alpha). Default path: hypergeometric.
double laplace_origin_road(double z, double r, double alpha, double mu_v);
double laplace_origin_road(double z, double r, double alpha, double mu_v, OriginRoadMethod method);

/// All roads other than the one through the receiver:
/// exp(-2 pi lambda_R [int_0^r (1 - L_in) dy + int_r^R (1 - L_out) dy]).
/// Returns 0 when the interference is a.s. infinite (alpha <= 2, unbounded window).
double laplace_all_roads(const LaplaceArg& arg, const QuadratureSpec& spec = {});

/// The positive-exponent variant exp(+2 mu_v lambda_R [...]) with the same
/// integrals. Not a Laplace transform; kept to compare against.
double laplace_all_roads_positive_exponent(const LaplaceArg& arg, const QuadratureSpec& spec = {});

// Success probabilities --------------------------------------------------------

/// Pr(SINR > z | V2V link at distance r_v), interference with alpha_v.
double success_v2v_given_r(double z, double r_v, const NetworkParams& p);
/// Pr(SINR > z | V2B link at distance r_b), receiver geometry as for V2V,
/// interference with alpha_b.
double success_v2b_given_r(double z, double r_b, const NetworkParams& p);

/// Overall V2X success with flexible association, the per-mode terms, the
/// association probabilities and the V2V-only reference, all at p.z.
SuccessBreakdown success_v2x(const NetworkParams& p, const QuadratureSpec& spec = {});
double success_v2v_only(const NetworkParams& p, const QuadratureSpec& spec = {});

// Window sizing ------------------------------------------------------------------

/// Fraction of the mean interference (other roads plus the receiver's road,
/// exclusion radius r_ref) contributed by vehicles beyond window_radius.
/// Returns 1 when the mean interference diverges (alpha <= 2).
double interference_tail_fraction(double window_radius, double r_ref, double alpha, const NetworkParams& p);

/// Window radius, within 2 Km of the smallest one, whose tail fraction at r_ref is below `limit`.
double required_window_radius(double r_ref, double alpha, const NetworkParams& p, double limit);

}  // namespace v2x::analytic
