#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace v2x::specfun {

/// Tolerances for the adaptive integrator. The estimated error of a
/// converged result is at most max(abs_tol, rel_tol * |result|).
struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;

  /// Throws std::invalid_argument unless every field is positive.
  void validate() const;
};

class QuadratureError : public std::runtime_error {
 public:
  enum class Reason { not_converged, non_finite_integrand };

  QuadratureError(Reason reason, double partial, double error_estimate, const std::string& what)
      : std::runtime_error(what), reason_(reason), partial_(partial), error_(error_estimate) {}

  Reason reason() const noexcept { return reason_; }
  /// Best estimate reached before giving up (NaN for non-finite integrands).
  double partial_estimate() const noexcept { return partial_; }
  double error_estimate() const noexcept { return error_; }

 private:
  Reason reason_;
  double partial_;
  double error_;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace detail {

// Non-owning view of a double(double) callable.
class Integrand {
 public:
  template <class F>
    requires(std::is_invocable_r_v<double, F&, double> && !std::is_same_v<std::remove_cv_t<F>, Integrand>)
  Integrand(F& f) noexcept  // NOLINT(google-explicit-constructor)
      : obj_(const_cast<void*>(static_cast<const void*>(&f))),
        call_([](void* o, double x) { return (*static_cast<F*>(o))(x); }) {}

  double operator()(double x) const { return call_(obj_, x); }

 private:
  void* obj_;
  double (*call_)(void*, double);
};

double integrate_impl(Integrand f, double lower, double upper, const QuadratureSpec& spec);

}  // namespace detail

/// Adaptive 15-point Gauss-Kronrod quadrature of f over [lower, upper].
///
/// upper may be kInfinity; the half line is then mapped onto [0, 1) with
/// t = lower + u / (1 - u), so the integrand must decay at infinity. The
/// Kronrod nodes never touch the endpoints, so f is only required to be
/// finite on the open interval.
///
/// Throws QuadratureError when max_subdivisions is exhausted (the partial
/// estimate is attached) or when f returns NaN or an infinity.
template <class F>
double integrate(F&& f, double lower, double upper, const QuadratureSpec& spec = {}) {
  auto& fn = f;
  return detail::integrate_impl(detail::Integrand(fn), lower, upper, spec);
}

}  // namespace v2x::specfun
