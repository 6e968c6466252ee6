#include "v2x/pointprocess.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace v2x {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_engine(RngSeed seed, std::uint64_t stream_index) {
  std::uint64_t state = seed.value ^ splitmix64(stream_index);
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state))};
  return std::mt19937_64(seq);
}

double chord_half_length(const Line& line, double window_radius) {
  const double d = window_radius * window_radius - line.y * line.y;
  return d > 0.0 ? std::sqrt(d) : 0.0;
}

}  // namespace

RngStream::RngStream(RngSeed seed, std::uint64_t stream_index) : engine_(make_engine(seed, stream_index)) {}

double RngStream::uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

std::uint64_t RngStream::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<std::uint64_t>(mean)(engine_);
}

bool RngStream::bernoulli(double p) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return std::bernoulli_distribution(p)(engine_);
}

double RngStream::exponential() { return std::exponential_distribution<double>(1.0)(engine_); }

namespace pointprocess {

std::vector<Line> place_lines(std::size_t count, double window_radius, RngStream& rng) {
  std::vector<Line> lines(count);
  for (auto& line : lines) {
    line.theta = rng.uniform(0.0, std::numbers::pi);
    line.y = rng.uniform(-window_radius, window_radius);
  }
  return lines;
}

std::vector<Line> sample_plp(double lambda_R, double window_radius, RngStream& rng) {
  const auto n = rng.poisson(2.0 * std::numbers::pi * lambda_R * window_radius);
  return place_lines(static_cast<std::size_t>(n), window_radius, rng);
}

std::vector<double> place_vehicles_on_line(std::size_t count, const Line& line, double window_radius,
                                           RngStream& rng) {
  const double half = chord_half_length(line, window_radius);
  if (half == 0.0) return {};
  std::vector<double> t(count);
  for (auto& v : t) v = rng.uniform(-half, half);
  return t;
}

std::vector<double> sample_vehicles_on_line(const Line& line, double mu, double window_radius, RngStream& rng) {
  const double half = chord_half_length(line, window_radius);
  if (half == 0.0) return {};
  const auto n = rng.poisson(2.0 * mu * half);
  return place_vehicles_on_line(static_cast<std::size_t>(n), line, window_radius, rng);
}

std::vector<bool> thin_transmitters(const std::vector<double>& vehicles, double p_tx, RngStream& rng) {
  std::vector<bool> flags(vehicles.size());
  for (std::size_t k = 0; k < flags.size(); ++k) flags[k] = rng.bernoulli(p_tx);
  return flags;
}

NetworkRealization palm_condition(NetworkRealization realization, double mu, RngStream& rng) {
  Line typical{rng.uniform(0.0, std::numbers::pi), 0.0};
  realization.vehicles.push_back(sample_vehicles_on_line(typical, mu, realization.window_radius, rng));
  realization.lines.push_back(typical);
  realization.tx_flags.resize(realization.lines.size());
  realization.typical_line_index = realization.lines.size() - 1;
  return realization;
}

std::vector<Point> place_bs(std::size_t count, double window_radius, RngStream& rng) {
  std::vector<Point> points(count);
  for (auto& p : points) {
    const double rho = window_radius * std::sqrt(rng.uniform(0.0, 1.0));
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    p = {rho * std::cos(phi), rho * std::sin(phi)};
  }
  return points;
}

std::vector<Point> sample_bs(double lambda_b, double window_radius, RngStream& rng) {
  const auto n = rng.poisson(lambda_b * std::numbers::pi * window_radius * window_radius);
  return place_bs(static_cast<std::size_t>(n), window_radius, rng);
}

Point to_xy(const Line& line, double t) {
  const double c = std::cos(line.theta);
  const double s = std::sin(line.theta);
  return {line.y * c - t * s, line.y * s + t * c};
}

NetworkRealization sample_realization(double lambda_R, double mu, double lambda_b, double p_tx,
                                      double window_radius, RngStream& rng) {
  NetworkRealization net;
  net.window_radius = window_radius;
  net.lines = sample_plp(lambda_R, window_radius, rng);
  net.vehicles.reserve(net.lines.size() + 1);
  for (const auto& line : net.lines) net.vehicles.push_back(sample_vehicles_on_line(line, mu, window_radius, rng));
  net = palm_condition(std::move(net), mu, rng);
  for (std::size_t i = 0; i < net.lines.size(); ++i) net.tx_flags[i] = thin_transmitters(net.vehicles[i], p_tx, rng);
  net.base_stations = sample_bs(lambda_b, window_radius, rng);
  return net;
}

NearestDistances nearest_distances(const NetworkRealization& realization) {
  NearestDistances out;
  double best_v2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < realization.lines.size(); ++i) {
    const double y2 = realization.lines[i].y * realization.lines[i].y;
    const auto& t = realization.vehicles[i];
    const auto& tx = realization.tx_flags[i];
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (!tx[k]) continue;
      const double d2 = y2 + t[k] * t[k];
      if (d2 < best_v2) {
        best_v2 = d2;
        out.nearest_vehicle = {i, k};
      }
    }
  }
  if (!std::isfinite(best_v2)) throw DegenerateRealization("no transmitting vehicle in the window");
  double best_b2 = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < realization.base_stations.size(); ++j) {
    const auto& p = realization.base_stations[j];
    const double d2 = p.x * p.x + p.y * p.y;
    if (d2 < best_b2) {
      best_b2 = d2;
      out.nearest_bs = j;
    }
  }
  if (!std::isfinite(best_b2)) throw DegenerateRealization("no base station in the window");
  out.r_v = std::sqrt(best_v2);
  out.r_b = std::sqrt(best_b2);
  return out;
}

}  // namespace pointprocess
}  // namespace v2x
