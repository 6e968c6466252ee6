#include "v2x/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>

#include "v2x/analytic.hpp"

namespace v2x::sim {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kChunk = 1024;

// d^{-alpha} from the squared distance.
double path_gain(double d2, double alpha) {
  if (alpha == 4.0) return 1.0 / (d2 * d2);
  return std::pow(d2, -0.5 * alpha);
}

double normal_quantile(double ci_level) {
  return boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * ci_level);
}

// Runs fn(acc, trial_index) over all trials in fixed chunks and returns the
// per-chunk accumulators in chunk order, so the caller's reduction does not
// depend on the number of workers.
template <class Acc, class Fn>
std::vector<Acc> run_chunks(std::uint64_t trials, unsigned workers, const Acc& init, Fn fn) {
  const std::uint64_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<Acc> out(chunks, init);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t c = next++; c < chunks; c = next++) {
      const std::uint64_t end = std::min(trials, (c + 1) * kChunk);
      for (std::uint64_t i = c * kChunk; i < end; ++i) fn(out[c], i);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(chunks)));
  if (n == 1) {
    work();
    return out;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (unsigned w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      try {
        work();
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = chunks;
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

unsigned resolve_workers(const SimConfig& c) { return c.workers ? c.workers : worker_count(); }

struct RunningMean {
  long double sum = 0.0L;
  long double sum2 = 0.0L;
  std::uint64_t n = 0;
  void add(double x) {
    sum += x;
    sum2 += static_cast<long double>(x) * x;
    ++n;
  }
  void merge(const RunningMean& o) {
    sum += o.sum;
    sum2 += o.sum2;
    n += o.n;
  }
  Estimate estimate(double ci_level) const {
    Estimate e;
    e.n = n;
    if (n == 0) return e;
    const long double m = sum / n;
    e.mean = static_cast<double>(m);
    if (n > 1) {
      const long double var = std::max(0.0L, (sum2 - n * m * m) / (n - 1));
      e.ci_halfwidth = normal_quantile(ci_level) * static_cast<double>(std::sqrt(var / n));
    }
    return e;
  }
};

}  // namespace

void SimConfig::validate() const {
  params.validate();
  if (!(window_radius > 0.0) || !std::isfinite(window_radius))
    throw std::invalid_argument("SimConfig.window_radius must be > 0");
  if (trials < 1) throw std::invalid_argument("SimConfig.trials must be >= 1");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw std::invalid_argument("SimConfig.ci_level must lie in (0, 1)");
  if (mode != V2bGeometry::paper_faithful && mode != V2bGeometry::physical)
    throw std::invalid_argument("SimConfig.mode is not a known geometry");
}

unsigned worker_count() {
  if (const char* env = std::getenv("V2X_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

WindowCheck check_window(const NetworkParams& p, double window_radius) {
  WindowCheck w;
  const double alpha = std::min(p.alpha_v, p.alpha_b);
  w.r_ref = analytic::v2v_median(p);
  w.tail_fraction = analytic::interference_tail_fraction(window_radius, w.r_ref, alpha, p);
  w.bs_void_probability = std::exp(-kPi * p.lambda_b * window_radius * window_radius);
  const double bs_radius = std::sqrt(std::log(1.0 / kBsVoidLimit) / (kPi * p.lambda_b));
  w.recommended_radius =
      std::ceil(std::max({500.0, analytic::required_window_radius(w.r_ref, alpha, p, kTailLimit), bs_radius}));
  w.ok = w.tail_fraction < kTailLimit && w.bs_void_probability < kBsVoidLimit;
  std::ostringstream os;
  os << "window " << window_radius << " Km: interference beyond it " << w.tail_fraction * 100.0
     << "% of the mean at the median V2V distance " << w.r_ref << " Km (limit " << kTailLimit * 100.0
     << "%), Pr(no base station) " << w.bs_void_probability << " (limit " << kBsVoidLimit << ")";
  if (!w.ok) os << "; use a window of at least " << w.recommended_radius << " Km";
  w.message = os.str();
  return w;
}

TrialOutcome evaluate_trial(const SimConfig& config, const NetworkRealization& net, const FadingGains& fading) {
  const auto& p = config.params;
  const NearestDistances nd = pointprocess::nearest_distances(net);
  if (!net.typical_line_index) throw std::invalid_argument("evaluate_trial: realization is not Palm-conditioned");
  if (fading.vehicle.size() != net.lines.size()) throw std::invalid_argument("evaluate_trial: one gain list per line");
  TrialOutcome out;
  out.r_v = nd.r_v;
  out.r_b = nd.r_b;
  const Point bs = net.base_stations[nd.nearest_bs];
  const bool physical = config.mode == V2bGeometry::physical;
  const double rb2 = nd.r_b * nd.r_b;

  double h_v = 0.0;
  double iv_r = 0.0, iv_v = 0.0;  // V2V receiver: receiver's road, other roads
  double ib_r = 0.0, ib_v = 0.0;  // V2B receiver
  const std::size_t typical = *net.typical_line_index;
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const Line& line = net.lines[l];
    const double y2 = line.y * line.y;
    const double cs = std::cos(line.theta);
    const double sn = std::sin(line.theta);
    const auto& t = net.vehicles[l];
    const auto& tx = net.tx_flags[l];
    const auto& gain = fading.vehicle[l];
    if (gain.size() != t.size()) throw std::invalid_argument("evaluate_trial: one gain per vehicle");
    double& to_v = (l == typical) ? iv_r : iv_v;
    double& to_b = (l == typical) ? ib_r : ib_v;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (!tx[k]) continue;
      const double g = gain[k];
      const double d2 = y2 + t[k] * t[k];
      if (l == nd.nearest_vehicle.line && k == nd.nearest_vehicle.index) {
        h_v = g;
      } else {
        to_v += g * path_gain(d2, p.alpha_v);
      }
      if (physical) {
        const double dx = line.y * cs - t[k] * sn - bs.x;
        const double dy = line.y * sn + t[k] * cs - bs.y;
        to_b += g * path_gain(dx * dx + dy * dy, p.alpha_b);
      } else if (d2 > rb2) {
        to_b += g * path_gain(d2, p.alpha_b);
      }
    }
  }
  iv_r *= p.P_v;
  iv_v *= p.P_v;
  ib_r *= p.P_v;
  ib_v *= p.P_v;
  out.sinr_v2v = p.P_v * h_v * path_gain(nd.r_v * nd.r_v, p.alpha_v) / (iv_r + iv_v + p.sigma2);
  out.sinr_v2b = p.P_v * fading.uplink * path_gain(rb2, p.alpha_b) / (ib_r + ib_v + p.sigma2);
  if (selects_v2v(p.bias_B, nd.r_v, nd.r_b, p.alpha_v, p.alpha_b)) {
    out.mode_selected = LinkMode::v2v;
    out.sinr = out.sinr_v2v;
    out.I_r = iv_r;
    out.I_v = iv_v;
  } else {
    out.mode_selected = LinkMode::v2b;
    out.sinr = out.sinr_v2b;
    out.I_r = ib_r;
    out.I_v = ib_v;
  }
  out.success = out.sinr > p.z;
  return out;
}

TrialOutcome run_trial(const SimConfig& config, RngStream& rng) {
  const auto& p = config.params;
  std::uint64_t resamples = 0;
  for (;;) {
    const auto net =
        pointprocess::sample_realization(p.lambda_R, p.mu_v, p.lambda_b, p.p_tx, config.window_radius, rng);
    // One gain per vehicle, drawn whether or not it transmits, then the uplink gain.
    FadingGains fading;
    fading.vehicle.resize(net.lines.size());
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
      fading.vehicle[l].resize(net.vehicles[l].size());
      for (auto& g : fading.vehicle[l]) g = rng.exponential();
    }
    fading.uplink = rng.exponential();
    try {
      auto out = evaluate_trial(config, net, fading);
      out.resamples = resamples;
      return out;
    } catch (const DegenerateRealization&) {
      ++resamples;
    }
  }
}

TrialOutcome run_trial(const SimConfig& config, std::uint64_t trial_index) {
  RngStream rng(config.seed, trial_index);
  return run_trial(config, rng);
}

Estimate proportion_estimate(std::uint64_t hits, std::uint64_t n, double ci_level, CiMethod method) {
  Estimate e;
  e.n = n;
  if (n == 0) return e;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  e.mean = p;
  if (method == CiMethod::normal) {
    e.ci_halfwidth = normal_quantile(ci_level) * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    return e;
  }
  const double a = 0.5 * (1.0 - ci_level);
  const double k = static_cast<double>(hits);
  const double m = static_cast<double>(n);
  const double lo = hits == 0 ? 0.0 : boost::math::ibeta_inv(k, m - k + 1.0, a);
  const double hi = hits == n ? 1.0 : boost::math::ibeta_inv(k + 1.0, m - k, 1.0 - a);
  e.ci_halfwidth = 0.5 * (hi - lo);
  return e;
}

SuccessRun estimate_success(const SimConfig& config, const std::vector<double>& z_values) {
  config.validate();
  for (double z : z_values)
    if (!(z >= 0.0)) throw std::invalid_argument("estimate_success: thresholds must be >= 0");
  const std::size_t nz = z_values.size();
  struct Acc {
    std::vector<std::uint64_t> v2x, v2v, v2b, only;
    std::uint64_t assoc_v2v = 0;
    std::uint64_t resamples = 0;
  };
  Acc init{std::vector<std::uint64_t>(nz), std::vector<std::uint64_t>(nz), std::vector<std::uint64_t>(nz),
           std::vector<std::uint64_t>(nz)};
  const auto parts = run_chunks(config.trials, resolve_workers(config), init, [&](Acc& acc, std::uint64_t i) {
    const auto o = run_trial(config, i);
    acc.resamples += o.resamples;
    const bool v2v = o.mode_selected == LinkMode::v2v;
    acc.assoc_v2v += v2v;
    for (std::size_t j = 0; j < nz; ++j) {
      const bool ok = o.sinr > z_values[j];
      acc.v2x[j] += ok;
      acc.v2v[j] += ok && v2v;
      acc.v2b[j] += ok && !v2v;
      acc.only[j] += o.sinr_v2v > z_values[j];
    }
  });
  Acc total = init;
  for (const auto& a : parts) {
    for (std::size_t j = 0; j < nz; ++j) {
      total.v2x[j] += a.v2x[j];
      total.v2v[j] += a.v2v[j];
      total.v2b[j] += a.v2b[j];
      total.only[j] += a.only[j];
    }
    total.assoc_v2v += a.assoc_v2v;
    total.resamples += a.resamples;
  }
  SuccessRun run;
  run.degenerate_resamples = total.resamples;
  const auto n = config.trials;
  auto est = [&](std::uint64_t hits) { return proportion_estimate(hits, n, config.ci_level, config.ci_method); };
  for (std::size_t j = 0; j < nz; ++j) {
    SuccessEstimates s;
    s.z = z_values[j];
    s.v2x = est(total.v2x[j]);
    s.v2v_success = est(total.v2v[j]);
    s.v2b_success = est(total.v2b[j]);
    s.v2v_only = est(total.only[j]);
    s.assoc_v2v = est(total.assoc_v2v);
    s.assoc_v2b = est(n - total.assoc_v2v);
    run.per_z.push_back(s);
  }
  // Worst case p = 1/2 bounds every half-width.
  const double worst = normal_quantile(config.ci_level) * 0.5 / std::sqrt(static_cast<double>(n));
  if (worst > 0.01) {
    std::ostringstream os;
    os << config.trials << " trials give confidence half-widths up to " << worst << " (> 0.01)";
    run.warnings.push_back(os.str());
  }
  return run;
}

std::vector<Estimate> estimate_distance_cdf(const SimConfig& config, const std::vector<double>& radii) {
  config.validate();
  const auto& p = config.params;
  using Acc = std::vector<std::uint64_t>;
  const auto parts = run_chunks(config.trials, resolve_workers(config), Acc(radii.size()), [&](Acc& acc, std::uint64_t i) {
    RngStream rng(config.seed, i);
    const auto net = pointprocess::sample_realization(p.lambda_R, p.mu_v, p.lambda_b, p.p_tx, config.window_radius, rng);
    double best = INFINITY;
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
      const double y2 = net.lines[l].y * net.lines[l].y;
      for (std::size_t k = 0; k < net.vehicles[l].size(); ++k)
        if (net.tx_flags[l][k]) best = std::min(best, y2 + net.vehicles[l][k] * net.vehicles[l][k]);
    }
    best = std::sqrt(best);
    for (std::size_t j = 0; j < radii.size(); ++j) acc[j] += best <= radii[j];
  });
  Acc total(radii.size());
  for (const auto& a : parts)
    for (std::size_t j = 0; j < radii.size(); ++j) total[j] += a[j];
  std::vector<Estimate> out;
  for (auto hits : total) out.push_back(proportion_estimate(hits, config.trials, config.ci_level, config.ci_method));
  return out;
}

LaplaceEstimate estimate_laplace_functional(const SimConfig& config, double s, double r) {
  config.validate();
  if (!(s >= 0.0)) throw std::invalid_argument("estimate_laplace_functional: s must be >= 0");
  if (!(r >= 0.0)) throw std::invalid_argument("estimate_laplace_functional: r must be >= 0");
  const auto& p = config.params;
  struct Acc {
    RunningMean other, road, total;
  };
  const double r2 = r * r;
  const auto parts = run_chunks(config.trials, resolve_workers(config), Acc{}, [&](Acc& acc, std::uint64_t i) {
    RngStream rng(config.seed, i);
    const auto net = pointprocess::sample_realization(p.lambda_R, p.mu_v, p.lambda_b, p.p_tx, config.window_radius, rng);
    double i_r = 0.0, i_v = 0.0;
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
      const double y2 = net.lines[l].y * net.lines[l].y;
      double& sink = (l == *net.typical_line_index) ? i_r : i_v;
      for (std::size_t k = 0; k < net.vehicles[l].size(); ++k) {
        const double g = rng.exponential();
        if (!net.tx_flags[l][k]) continue;
        const double d2 = y2 + net.vehicles[l][k] * net.vehicles[l][k];
        if (d2 <= r2) continue;  // exclusion disc
        sink += g * path_gain(d2, p.alpha_v);
      }
    }
    const double sp = s * p.P_v;
    acc.other.add(std::exp(-sp * i_v));
    acc.road.add(std::exp(-sp * i_r));
    acc.total.add(std::exp(-sp * (i_v + i_r)));
  });
  Acc total;
  for (const auto& a : parts) {
    total.other.merge(a.other);
    total.road.merge(a.road);
    total.total.merge(a.total);
  }
  return {total.other.estimate(config.ci_level), total.road.estimate(config.ci_level),
          total.total.estimate(config.ci_level)};
}

}  // namespace v2x::sim
