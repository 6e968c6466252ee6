#include "v2x/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "v2x/quadrature.hpp"

namespace v2x::specfun {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPi = std::numbers::pi;
// Below this argument the power series are used; above it the asymptotic forms.
constexpr double kSeriesLimit = 20.0;
// I_0 - L_0 and L_{-1} - I_1: alternating series below, quadrature in
// between, asymptotic expansion above.
constexpr double kDifferenceSeriesLimit = 8.0;
constexpr double kDifferenceAsymptoticLimit = 30.0;

void require_nonnegative(const char* name, double x) {
  if (!(x >= 0.0)) {
    std::ostringstream os;
    os << name << ": argument must be >= 0, got " << x;
    throw std::domain_error(os.str());
  }
}

// sum_k (x/2)^{2k+n} / (k! (k+n)!)
double bessel_i_series(int n, double x) {
  const double h = 0.5 * x;
  const double h2 = h * h;
  double term = (n == 0) ? 1.0 : h;
  double sum = term;
  for (int k = 0; k < 500; ++k) {
    term *= h2 / ((k + 1.0) * (k + 1.0 + n));
    sum += term;
    if (term <= kEps * sum) break;
  }
  return sum;
}

// e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(n) / x^k
double bessel_i_asymptotic(int n, double x) {
  const double mu = 4.0 * n * n;
  double term = 1.0;
  double sum = 1.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * x);
    if (std::abs(term) > last) break;  // asymptotic series started diverging
    sum += term;
    last = std::abs(term);
    if (last <= kEps * std::abs(sum)) break;
  }
  const double scale = std::exp(x - 0.5 * std::log(2.0 * kPi * x));
  const double result = scale * sum;
  if (!std::isfinite(result)) {
    std::ostringstream os;
    os << "bessel_i: I_" << n << "(" << x << ") overflows double";
    throw std::overflow_error(os.str());
  }
  return result;
}

// L_nu(x) = sum_k (x/2)^{2k+nu+1} / (Gamma(k+3/2) Gamma(k+nu+3/2))
double struve_l_series(int nu, double x) {
  const double h = 0.5 * x;
  const double h2 = h * h;
  // k = 0 term: nu = 0 -> h / Gamma(3/2)^2 = 4h/pi; nu = -1 -> 1/(Gamma(3/2)Gamma(1/2)) = 2/pi
  double term = (nu == 0) ? 4.0 * h / kPi : 2.0 / kPi;
  double sum = term;
  for (int k = 0; k < 500; ++k) {
    term *= h2 / ((k + 1.5) * (k + 1.5 + nu));
    sum += term;
    if (term <= kEps * sum) break;
  }
  return sum;
}

// Asymptotic expansion of (2/pi) int_0^1 u^m e^{-xu} / sqrt(1-u^2) du, m in {0, 1},
// from 1/sqrt(1-u^2) = sum_k binom(2k,k) 4^{-k} u^{2k}. All terms positive;
// truncated at the smallest one.
double difference_asymptotic(int m, double x) {
  // k-th term: binom(2k,k) 4^{-k} (2k+m)! / x^{2k+m+1}
  double term = (m == 0) ? 1.0 / x : 1.0 / (x * x);
  double sum = term;
  for (int k = 0; k < 200; ++k) {
    const double n = 2.0 * k + m;
    const double next = term * (2.0 * k + 1.0) / (2.0 * k + 2.0) * (n + 1.0) * (n + 2.0) / (x * x);
    if (next >= term) break;
    term = next;
    sum += term;
    if (term <= kEps * sum) break;
  }
  return 2.0 / kPi * sum;
}

double difference_quadrature(int m, double x) {
  QuadratureSpec spec;
  spec.abs_tol = 1e-300;
  spec.rel_tol = 1e-13;
  spec.max_subdivisions = 200;
  const double v = integrate(
      [&](double t) {
        const double c = std::cos(t);
        return (m == 0 ? 1.0 : c) * std::exp(-x * c);
      },
      0.0, 0.5 * kPi, spec);
  return 2.0 / kPi * v;
}

double reciprocal_gamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  return 1.0 / std::tgamma(x);
}

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// Defining series of 2F1 for |z| < 1.
double hypergeometric_series(double a, double b, double c, double z) {
  if (z == 0.0) return 1.0;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < 200000; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
    if (term == 0.0 || std::abs(term) <= 0.25 * kEps * std::abs(sum)) return sum;
  }
  std::ostringstream os;
  os << "gauss_2f1: series did not converge for z = " << z;
  throw std::runtime_error(os.str());
}

void check_2f1_domain(double c, double z) {
  if (is_nonpositive_integer(c)) throw std::domain_error("gauss_2f1: c must not be a nonpositive integer");
  if (!(z <= 0.0)) {
    std::ostringstream os;
    os << "gauss_2f1: only z <= 0 is supported, got z = " << z;
    throw std::domain_error(os.str());
  }
}

}  // namespace

double bessel_i(int order, double x) {
  if (order != 0 && order != 1) throw std::domain_error("bessel_i: only orders 0 and 1 are supported");
  require_nonnegative("bessel_i", x);
  if (x <= kSeriesLimit) return bessel_i_series(order, x);
  return bessel_i_asymptotic(order, x);
}

double bessel_i0_minus_struve_l0(double x) {
  require_nonnegative("bessel_i0_minus_struve_l0", x);
  if (x <= kDifferenceSeriesLimit) return bessel_i_series(0, x) - struve_l_series(0, x);
  if (x <= kDifferenceAsymptoticLimit) return difference_quadrature(0, x);
  return difference_asymptotic(0, x);
}

double struve_lm1_minus_bessel_i1(double x) {
  require_nonnegative("struve_lm1_minus_bessel_i1", x);
  if (x <= kDifferenceSeriesLimit) return struve_l_series(-1, x) - bessel_i_series(1, x);
  if (x <= kDifferenceAsymptoticLimit) return difference_quadrature(1, x);
  return difference_asymptotic(1, x);
}

double struve_l(int order, double x) {
  if (order != 0 && order != -1) throw std::domain_error("struve_l: only orders -1 and 0 are supported");
  require_nonnegative("struve_l", x);
  if (x <= kSeriesLimit) return struve_l_series(order, x);
  if (order == 0) return bessel_i(0, x) - bessel_i0_minus_struve_l0(x);
  return bessel_i(1, x) + struve_lm1_minus_bessel_i1(x);
}

double gauss_2f1(double a, double b, double c, double z) {
  check_2f1_domain(c, z);
  if (z == 0.0) return 1.0;
  if (z >= -0.5) return hypergeometric_series(a, b, c, z);
  if (z >= -1.0) {
    // Pfaff: (1-z)^{-a} 2F1(a, c-b; c; z/(z-1)), argument in (1/3, 1/2]
    return std::pow(1.0 - z, -a) * hypergeometric_series(a, c - b, c, z / (z - 1.0));
  }
  const double d = a - b;
  if (d == std::round(d)) return gauss_2f1_pfaff(a, b, c, z);
  // Connection formula onto w = 1/(1-z) in (0, 1/2).
  const double w = 1.0 / (1.0 - z);
  const double gc = std::tgamma(c);
  const double t1 = gc * std::tgamma(b - a) * reciprocal_gamma(b) * reciprocal_gamma(c - a) *
                    std::pow(w, a) * hypergeometric_series(a, c - b, a - b + 1.0, w);
  const double t2 = gc * std::tgamma(a - b) * reciprocal_gamma(a) * reciprocal_gamma(c - b) *
                    std::pow(w, b) * hypergeometric_series(b, c - a, b - a + 1.0, w);
  return t1 + t2;
}

double gauss_2f1_pfaff(double a, double b, double c, double z) {
  check_2f1_domain(c, z);
  if (z == 0.0) return 1.0;
  return std::pow(1.0 - z, -b) * hypergeometric_series(b, c - a, c, z / (z - 1.0));
}

}  // namespace v2x::specfun
