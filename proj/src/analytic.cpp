#include "v2x/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "v2x/specfun.hpp"

namespace v2x::analytic {
namespace {

using specfun::integrate;
using specfun::QuadratureError;

constexpr double kPi = std::numbers::pi;

// Integrals along a single road. Smooth and cheap, so held far below the
// tolerance of whatever encloses them.
const QuadratureSpec kRoadSpec{1e-14, 1e-12, 2000};
// Distance-law integrals over an angle; the CCDF feeds a finite-difference
// check of the closed-form density, hence the tight tolerance.
const QuadratureSpec kAngleSpec{1e-16, 1e-13, 2000};

QuadratureSpec tightened(const QuadratureSpec& spec) {
  QuadratureSpec s = spec;
  s.abs_tol = spec.abs_tol * 1e-2;
  s.rel_tol = std::max(spec.rel_tol * 1e-2, 1e-12);
  return s;
}

[[noreturn]] void rethrow_in(const QuadratureError& e, const char* where) {
  throw QuadratureError(e.reason(), e.partial_estimate(), e.error_estimate(), std::string(where) + ": " + e.what());
}

// Integral of f over [lower, inf) after rescaling by `scale`, so that the
// half-line map sees its feature at unit length.
template <class F>
double integrate_scaled(F&& f, double lower, double scale, const QuadratureSpec& spec) {
  auto g = [&](double x) { return f(lower + scale * x); };
  return scale * integrate(g, 0.0, kInfinity, spec);
}

// q^{alpha/2} with the common exponents spelled out.
double pow_half(double q, double alpha) {
  if (alpha == 4.0) return q * q;
  if (alpha == 2.0) return q;
  return std::pow(q, 0.5 * alpha);
}

void require_nonnegative(const char* name, double x) {
  if (!(x >= 0.0)) {
    std::ostringstream os;
    os << name << ": argument must be >= 0, got " << x;
    throw std::domain_error(os.str());
  }
}

// int_lo^hi c / ((y^2 + t^2)^{alpha/2} + c) dt, hi possibly infinite.
double road_integral(double c, double alpha, double y, double lo, double hi) {
  if (c == 0.0 || !(hi > lo)) return 0.0;
  const double y2 = y * y;
  auto f = [&](double t) { return c / (pow_half(y2 + t * t, alpha) + c); };
  const double scale = std::max({y, std::pow(c, 1.0 / alpha), 1e-300});
  if (std::isinf(hi)) return integrate_scaled(f, lo, scale, kRoadSpec);
  return integrate(f, lo, hi, kRoadSpec);
}

// Closed form of road_integral(c, 4, y, 0, inf).
double road_integral_quartic(double c, double y) {
  const double sc = std::sqrt(c);
  const double y2 = y * y;
  return 0.5 * kPi * sc * std::sin(0.5 * std::atan2(sc, y2)) / std::sqrt(std::sqrt(y2 * y2 + c));
}

double chord_end(const LaplaceArg& arg, double y) {
  if (std::isinf(arg.window_radius)) return kInfinity;
  const double d = arg.window_radius * arg.window_radius - y * y;
  return d > 0.0 ? std::sqrt(d) : 0.0;
}

double outside_exponent(const LaplaceArg& arg, double y) {
  const double c = arg.s * arg.tx_power;
  if (arg.alpha == 4.0 && std::isinf(arg.window_radius)) return 2.0 * arg.mu_v * road_integral_quartic(c, y);
  return 2.0 * arg.mu_v * road_integral(c, arg.alpha, y, 0.0, chord_end(arg, y));
}

double inside_exponent(const LaplaceArg& arg, double y) {
  const double c = arg.s * arg.tx_power;
  const double lo = std::sqrt(std::max(arg.r * arg.r - y * y, 0.0));
  return 2.0 * arg.mu_v * road_integral(c, arg.alpha, y, lo, chord_end(arg, y));
}

// int_0^r (1 - L_in) dy + int_r^R (1 - L_out) dy
double all_roads_integral(const LaplaceArg& arg, const QuadratureSpec& spec) {
  const double c = arg.s * arg.tx_power;
  const double r = arg.r;
  const double R = arg.window_radius;
  double inner = 0.0;
  if (r > 0.0) {
    const double top = std::min(r, R);
    // y = r sin(phi) smooths the square-root edge at y = r.
    const double phi_max = (top >= r) ? 0.5 * kPi : std::asin(top / r);
    try {
      inner = integrate(
          [&](double phi) {
            const double y = r * std::sin(phi);
            return -std::expm1(-inside_exponent(arg, y)) * r * std::cos(phi);
          },
          0.0, phi_max, spec);
    } catch (const QuadratureError& e) {
      rethrow_in(e, "laplace_all_roads (roads crossing the exclusion disc)");
    }
  }
  double outer = 0.0;
  if (R > r) {
    auto f = [&](double y) { return -std::expm1(-outside_exponent(arg, y)); };
    try {
      if (std::isinf(R)) {
        outer = integrate_scaled(f, r, std::max({r, std::pow(c, 1.0 / arg.alpha), 1e-300}), spec);
      } else {
        outer = integrate(f, r, R, spec);
      }
    } catch (const QuadratureError& e) {
      rethrow_in(e, "laplace_all_roads (roads outside the exclusion disc)");
    }
  }
  return inner + outer;
}

// log Pr(r_v > r) = -2 mu r - 2 pi lambda_R int_0^r (1 - e^{-2 mu sqrt(r^2 - y^2)}) dy,
// integrated over y = r sin(phi).
double v2v_log_ccdf(double r, const NetworkParams& p) {
  if (r == 0.0) return 0.0;
  const double x = 2.0 * p.mu_v * r;
  const double h =
      r * integrate([x](double phi) { return -std::expm1(-x * std::cos(phi)) * std::cos(phi); }, 0.0, 0.5 * kPi,
                    kAngleSpec);
  return -x - 2.0 * kPi * p.lambda_R * h;
}

double v2b_median(double lambda_b) { return std::sqrt(std::log(2.0) / (kPi * lambda_b)); }

double success_given_r(double z, double r, double alpha, const NetworkParams& p, const QuadratureSpec& spec) {
  require_nonnegative("success probability: threshold z", z);
  require_nonnegative("success probability: distance r", r);
  if (z == 0.0) return 1.0;
  if (r == 0.0) return 1.0;
  const double rpow = std::pow(r, alpha);
  const double noise = std::exp(-z * p.sigma2 * rpow / p.P_v);
  if (noise == 0.0) return 0.0;
  const auto arg = LaplaceArg::for_link(z, r, alpha, p.mu_v, p.lambda_R, p.P_v);
  return noise * laplace_all_roads(arg, spec) * laplace_origin_road(z, r, alpha, p.mu_v);
}

}  // namespace

LaplaceArg LaplaceArg::for_link(double z, double r, double alpha, double mu_v, double lambda_R, double tx_power) {
  LaplaceArg a;
  a.s = z * std::pow(r, alpha) / tx_power;
  a.r = r;
  a.alpha = alpha;
  a.mu_v = mu_v;
  a.lambda_R = lambda_R;
  a.tx_power = tx_power;
  return a;
}

void LaplaceArg::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("LaplaceArg.") + what); };
  if (!(s >= 0.0)) fail("s must be >= 0");
  if (!(r >= 0.0)) fail("r must be >= 0");
  if (!(alpha > 1.0)) fail("alpha must be > 1");
  if (!(mu_v >= 0.0)) fail("mu_v must be >= 0");
  if (!(lambda_R >= 0.0)) fail("lambda_R must be >= 0");
  if (!(tx_power > 0.0)) fail("tx_power must be > 0");
  if (!(window_radius > 0.0)) fail("window_radius must be > 0");
}

double v2v_ccdf(double r_v, const NetworkParams& p) {
  require_nonnegative("v2v_ccdf", r_v);
  return std::exp(v2v_log_ccdf(r_v, p));
}

double v2v_cdf(double r_v, const NetworkParams& p) {
  require_nonnegative("v2v_cdf", r_v);
  return 0.0 - std::expm1(v2v_log_ccdf(r_v, p));  // +0 at r_v = 0
}

double v2v_pdf(double r_v, const NetworkParams& p) {
  require_nonnegative("v2v_pdf", r_v);
  const double mu = p.mu_v;
  const double lr = p.lambda_R;
  const double x = 2.0 * mu * r_v;
  const double m0 = specfun::bessel_i0_minus_struve_l0(x);
  const double n1 = specfun::struve_lm1_minus_bessel_i1(x);
  const double hazard = 2.0 * kPi * kPi * lr * mu * r_v * m0 + 2.0 * mu;
  return hazard * std::exp(-2.0 * kPi * lr * r_v + kPi * kPi * lr * r_v * n1 - x);
}

double v2b_pdf(double r_b, double lambda_b) {
  require_nonnegative("v2b_pdf", r_b);
  return 2.0 * kPi * lambda_b * r_b * std::exp(-kPi * lambda_b * r_b * r_b);
}

double v2v_median(const NetworkParams& p) {
  double lo = 0.0;
  double hi = 1.0;
  while (v2v_ccdf(hi, p) > 0.5) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 80 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (v2v_ccdf(mid, p) > 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double assoc_v2v_given_rv(double r_v, const NetworkParams& p) {
  require_nonnegative("assoc_v2v_given_rv", r_v);
  if (p.bias_B.is_unbounded()) return 1.0;
  if (p.bias_B.is_zero()) return 0.0;
  const double radius = std::pow(r_v, p.alpha_v / p.alpha_b) / std::pow(p.bias_B.value(), 1.0 / p.alpha_b);
  return std::exp(-kPi * p.lambda_b * radius * radius);
}

double assoc_v2b_given_rb(double r_b, const NetworkParams& p) {
  require_nonnegative("assoc_v2b_given_rb", r_b);
  if (p.bias_B.is_zero() || r_b == 0.0) return 1.0;
  if (p.bias_B.is_unbounded()) return 0.0;
  return v2v_ccdf(std::pow(p.bias_B.value(), 1.0 / p.alpha_v) * std::pow(r_b, p.alpha_b / p.alpha_v), p);
}

double assoc_v2v(const NetworkParams& p, const QuadratureSpec& spec) {
  if (p.bias_B.is_unbounded()) return 1.0;
  if (p.bias_B.is_zero()) return 0.0;
  try {
    return integrate_scaled([&](double r) { return assoc_v2v_given_rv(r, p) * v2v_pdf(r, p); }, 0.0,
                            v2v_median(p), spec);
  } catch (const QuadratureError& e) {
    rethrow_in(e, "assoc_v2v");
  }
}

double assoc_v2b(const NetworkParams& p, const QuadratureSpec& spec) {
  if (p.bias_B.is_unbounded()) return 0.0;
  if (p.bias_B.is_zero()) return 1.0;
  try {
    return integrate_scaled([&](double r) { return assoc_v2b_given_rb(r, p) * v2b_pdf(r, p.lambda_b); }, 0.0,
                            v2b_median(p.lambda_b), spec);
  } catch (const QuadratureError& e) {
    rethrow_in(e, "assoc_v2b");
  }
}

double laplace_road_outside(const LaplaceArg& arg, double y) {
  arg.validate();
  require_nonnegative("laplace_road_outside: y", y);
  return std::exp(-2.0 * arg.mu_v * road_integral(arg.s * arg.tx_power, arg.alpha, y, 0.0, chord_end(arg, y)));
}

double laplace_road_outside_closed_form(const LaplaceArg& arg, double y) {
  arg.validate();
  require_nonnegative("laplace_road_outside_closed_form: y", y);
  if (arg.alpha != 4.0) throw std::domain_error("laplace_road_outside_closed_form: requires alpha = 4");
  return std::exp(-2.0 * arg.mu_v * road_integral_quartic(arg.s * arg.tx_power, y));
}

double laplace_road_inside(const LaplaceArg& arg, double y) {
  arg.validate();
  require_nonnegative("laplace_road_inside: y", y);
  return std::exp(-inside_exponent(arg, y));
}

double laplace_origin_road(double z, double r, double alpha, double mu_v) {
  return laplace_origin_road(z, r, alpha, mu_v, OriginRoadMethod::hypergeometric);
}

double laplace_origin_road(double z, double r, double alpha, double mu_v, OriginRoadMethod method) {
  require_nonnegative("laplace_origin_road: z", z);
  require_nonnegative("laplace_origin_road: r", r);
  if (!(alpha > 1.0)) throw std::domain_error("laplace_origin_road: alpha must be > 1");
  if (z == 0.0 || r == 0.0 || mu_v == 0.0) return 1.0;
  switch (method) {
    case OriginRoadMethod::integral: {
      // int_r^inf z r^alpha / (t^alpha + z r^alpha) dt = r int_1^inf z / (u^alpha + z) du.
      // With w = u^{1-alpha} the range becomes (0, 1] and the slow u^{-alpha}
      // tail a bounded integrand: (z / (alpha-1)) int_0^1 dw / (1 + z w^{alpha/(alpha-1)}).
      const double q = alpha / (alpha - 1.0);
      const double j = z / (alpha - 1.0) *
                       integrate([&](double w) { return 1.0 / (1.0 + z * std::pow(w, q)); }, 0.0, 1.0, kRoadSpec);
      return std::exp(-2.0 * mu_v * r * j);
    }
    case OriginRoadMethod::hypergeometric: {
      const double f = specfun::gauss_2f1(1.0, (alpha - 1.0) / alpha, 2.0 - 1.0 / alpha, -z);
      return std::exp(-2.0 * r * z * mu_v * f / (alpha - 1.0));
    }
    case OriginRoadMethod::quartic: {
      if (alpha != 4.0) throw std::domain_error("laplace_origin_road: the quartic closed form requires alpha = 4");
      const double a = std::sqrt(std::sqrt(z));
      const double k = std::sqrt(2.0) / a;
      const double bracket =
          -std::atan(k + 1.0) + std::atan(1.0 - k) - std::atanh(std::sqrt(2.0) * a / (std::sqrt(z) + 1.0)) + kPi;
      return std::exp(-r * a * mu_v / std::sqrt(2.0) * bracket);
    }
  }
  throw std::invalid_argument("laplace_origin_road: unknown method");
}

double laplace_all_roads(const LaplaceArg& arg, const QuadratureSpec& spec) {
  arg.validate();
  spec.validate();
  if (arg.s == 0.0 || arg.mu_v == 0.0 || arg.lambda_R == 0.0) return 1.0;
  if (arg.alpha <= 2.0 && std::isinf(arg.window_radius)) return 0.0;
  return std::exp(-2.0 * kPi * arg.lambda_R * all_roads_integral(arg, spec));
}

double laplace_all_roads_positive_exponent(const LaplaceArg& arg, const QuadratureSpec& spec) {
  arg.validate();
  spec.validate();
  if (arg.s == 0.0 || arg.mu_v == 0.0 || arg.lambda_R == 0.0) return 1.0;
  if (arg.alpha <= 2.0 && std::isinf(arg.window_radius)) return kInfinity;
  return std::exp(2.0 * arg.mu_v * arg.lambda_R * all_roads_integral(arg, spec));
}

double success_v2v_given_r(double z, double r_v, const NetworkParams& p) {
  return success_given_r(z, r_v, p.alpha_v, p, {});
}

double success_v2b_given_r(double z, double r_b, const NetworkParams& p) {
  return success_given_r(z, r_b, p.alpha_b, p, {});
}

SuccessBreakdown success_v2x(const NetworkParams& p, const QuadratureSpec& spec) {
  p.validate();
  spec.validate();
  const QuadratureSpec inner = tightened(spec);
  const double z = p.z;
  SuccessBreakdown out;
  out.p_v2v_assoc = assoc_v2v(p, spec);
  out.p_v2b_assoc = assoc_v2b(p, spec);
  const double scale_v = v2v_median(p);
  const double scale_b = v2b_median(p.lambda_b);
  try {
    out.p_v2v_only = integrate_scaled(
        [&](double r) {
          const double f = v2v_pdf(r, p);
          return f == 0.0 ? 0.0 : success_given_r(z, r, p.alpha_v, p, inner) * f;
        },
        0.0, scale_v, spec);
  } catch (const QuadratureError& e) {
    rethrow_in(e, "success_v2x (V2V-only term)");
  }
  if (p.bias_B.is_unbounded()) {
    out.p_v2v_success = out.p_v2v_only;
  } else if (!p.bias_B.is_zero()) {
    try {
      out.p_v2v_success = integrate_scaled(
          [&](double r) {
            const double w = assoc_v2v_given_rv(r, p) * v2v_pdf(r, p);
            return w == 0.0 ? 0.0 : success_given_r(z, r, p.alpha_v, p, inner) * w;
          },
          0.0, scale_v, spec);
    } catch (const QuadratureError& e) {
      rethrow_in(e, "success_v2x (V2V term)");
    }
  }
  if (!p.bias_B.is_unbounded()) {
    try {
      out.p_v2b_success = integrate_scaled(
          [&](double r) {
            const double w = assoc_v2b_given_rb(r, p) * v2b_pdf(r, p.lambda_b);
            return w == 0.0 ? 0.0 : success_given_r(z, r, p.alpha_b, p, inner) * w;
          },
          0.0, scale_b, spec);
    } catch (const QuadratureError& e) {
      rethrow_in(e, "success_v2x (V2B term)");
    }
  }
  out.p_v2x = out.p_v2v_success + out.p_v2b_success;
  return out;
}

double success_v2v_only(const NetworkParams& p, const QuadratureSpec& spec) {
  p.validate();
  spec.validate();
  const QuadratureSpec inner = tightened(spec);
  try {
    return integrate_scaled(
        [&](double r) {
          const double f = v2v_pdf(r, p);
          return f == 0.0 ? 0.0 : success_given_r(p.z, r, p.alpha_v, p, inner) * f;
        },
        0.0, v2v_median(p), spec);
  } catch (const QuadratureError& e) {
    rethrow_in(e, "success_v2v_only");
  }
}

double interference_tail_fraction(double window_radius, double r_ref, double alpha, const NetworkParams& p) {
  if (!(r_ref > 0.0) || !(window_radius > 0.0))
    throw std::invalid_argument("interference_tail_fraction: radii must be > 0");
  if (alpha <= 2.0) return 1.0;
  if (window_radius <= r_ref) return 1.0;
  // Other roads: planar vehicle density pi lambda_R mu_v, Campbell's formula.
  const double a = 2.0 * kPi * kPi * p.lambda_R * p.mu_v / (alpha - 2.0);
  // Receiver's road: 1D density 2 mu_v counting both directions.
  const double c = 2.0 * p.mu_v / (alpha - 1.0);
  auto mean_beyond = [&](double rho) { return a * std::pow(rho, 2.0 - alpha) + c * std::pow(rho, 1.0 - alpha); };
  return mean_beyond(window_radius) / mean_beyond(r_ref);
}

double required_window_radius(double r_ref, double alpha, const NetworkParams& p, double limit) {
  if (alpha <= 2.0) return kInfinity;
  double lo = r_ref;
  double hi = 2.0 * r_ref;
  while (interference_tail_fraction(hi, r_ref, alpha, p) >= limit) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1.0) {
    const double mid = 0.5 * (lo + hi);
    (interference_tail_fraction(mid, r_ref, alpha, p) >= limit ? lo : hi) = mid;
  }
  return std::ceil(hi);
}

}  // namespace v2x::analytic
