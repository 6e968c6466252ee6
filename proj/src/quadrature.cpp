#include "v2x/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

namespace v2x::specfun {

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: abs_tol must be > 0");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: rel_tol must be > 0");
  if (max_subdivisions < 1) throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
}

namespace detail {
namespace {

// QUADPACK qk15 nodes and weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double result;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

[[noreturn]] void non_finite(double x) {
  std::ostringstream os;
  os << "integrate: integrand is not finite at x = " << x;
  throw QuadratureError(QuadratureError::Reason::non_finite_integrand, std::nan(""), std::nan(""), os.str());
}

template <class G>
Segment kronrod15(const G& g, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = g(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  std::array<double, 7> f1{};
  std::array<double, 7> f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = g(center - dx);
    f2[j] = g(center + dx);
    const double sum = f1[j] + f2[j];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

  const double result = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {a, b, result, err};
}

template <class G>
double adapt(const G& g, double a, double b, const QuadratureSpec& spec) {
  std::priority_queue<Segment> heap;
  Segment first = kronrod15(g, a, b);
  double total = first.result;
  double total_err = first.error;
  heap.push(first);
  int subdivisions = 1;
  while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
    const Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    // Width at the resolution limit of double: no further progress possible.
    const bool exhausted = subdivisions >= spec.max_subdivisions || !(mid > worst.a && mid < worst.b);
    if (exhausted) {
      std::ostringstream os;
      os << "integrate: no convergence after " << subdivisions << " subdivisions (estimate " << total
         << ", error " << total_err << ")";
      throw QuadratureError(QuadratureError::Reason::not_converged, total, total_err, os.str());
    }
    heap.pop();
    const Segment left = kronrod15(g, worst.a, mid);
    const Segment right = kronrod15(g, mid, worst.b);
    total += left.result + right.result - worst.result;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
    // Re-sum occasionally so the running totals do not drift.
    if (subdivisions % 64 == 0) {
      auto copy = heap;
      total = 0.0;
      total_err = 0.0;
      while (!copy.empty()) {
        total += copy.top().result;
        total_err += copy.top().error;
        copy.pop();
      }
    }
  }
  return total;
}

}  // namespace

double integrate_impl(Integrand f, double lower, double upper, const QuadratureSpec& spec) {
  spec.validate();
  if (std::isnan(lower) || std::isnan(upper) || std::isinf(lower)) {
    throw std::domain_error("integrate: lower limit must be finite and upper limit not NaN");
  }
  if (upper == lower) return 0.0;
  if (upper < lower) return -integrate_impl(f, upper, lower, spec);

  if (std::isinf(upper)) {
    auto g = [&](double u) {
      const double w = 1.0 - u;
      const double t = lower + u / w;
      const double v = f(t);
      if (!std::isfinite(v)) non_finite(t);
      const double mapped = v / (w * w);
      // Only reachable when u rounds to 1 or the Jacobian overflows.
      if (!std::isfinite(mapped)) non_finite(t);
      return mapped;
    };
    return adapt(g, 0.0, 1.0, spec);
  }
  auto g = [&](double x) {
    const double v = f(x);
    if (!std::isfinite(v)) non_finite(x);
    return v;
  };
  return adapt(g, lower, upper, spec);
}

}  // namespace detail
}  // namespace v2x::specfun
