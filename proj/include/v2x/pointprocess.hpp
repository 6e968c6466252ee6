#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace v2x {

/// A road in representation-space coordinates: direction theta in [0, pi)
/// and signed perpendicular distance y from the origin (Km).
struct Line {
  double theta = 0.0;
  double y = 0.0;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct RngSeed {
  std::uint64_t value = 0;
};

/// Pseudo-random stream derived from (seed, stream index). Two streams with
/// different indices are statistically independent; equal inputs give
/// bit-identical draws.
class RngStream {
 public:
  explicit RngStream(RngSeed seed, std::uint64_t stream_index = 0);

  double uniform(double lo, double hi);
  std::uint64_t poisson(double mean);
  bool bernoulli(double p);
  /// Unit-mean exponential variate.
  double exponential();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// One Palm-conditioned sample of roads, vehicles and base stations inside
/// the window disc of radius window_radius centred on the receiver.
struct NetworkRealization {
  double window_radius = 0.0;
  std::vector<Line> lines;
  /// vehicles[i] holds the offsets t along lines[i].
  std::vector<std::vector<double>> vehicles;
  /// tx_flags[i][k] is true when vehicle k on line i transmits.
  std::vector<std::vector<bool>> tx_flags;
  std::vector<Point> base_stations;
  std::optional<std::size_t> typical_line_index;
};

/// Thrown when a realization has no transmitting vehicle or no base station.
/// Callers resample.
class DegenerateRealization : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VehicleRef {
  std::size_t line = 0;
  std::size_t index = 0;
};

struct NearestDistances {
  double r_v = 0.0;
  double r_b = 0.0;
  VehicleRef nearest_vehicle;
  std::size_t nearest_bs = 0;
};

namespace pointprocess {

/// Poisson line process: count ~ Poisson(2 pi lambda_R R), (theta, y)
/// uniform on [0, pi) x [-R, R].
std::vector<Line> sample_plp(double lambda_R, double window_radius, RngStream& rng);
/// Same placement with a given line count.
std::vector<Line> place_lines(std::size_t count, double window_radius, RngStream& rng);

/// 1D PPP of intensity mu on the chord of `line` inside the window.
std::vector<double> sample_vehicles_on_line(const Line& line, double mu, double window_radius, RngStream& rng);
/// Same placement with a given vehicle count.
std::vector<double> place_vehicles_on_line(std::size_t count, const Line& line, double window_radius,
                                           RngStream& rng);

/// Independent Bernoulli(p_tx) flags, one per vehicle.
std::vector<bool> thin_transmitters(const std::vector<double>& vehicles, double p_tx, RngStream& rng);

/// Adds a road through the origin with uniform direction, populated with an
/// independent PPP of intensity mu over its full chord, and marks it typical.
/// Existing lines and points are untouched; tx flags of the new road are
/// left for the caller to draw.
NetworkRealization palm_condition(NetworkRealization realization, double mu, RngStream& rng);

/// 2D PPP: count ~ Poisson(lambda_b pi R^2), points uniform in the disc.
std::vector<Point> sample_bs(double lambda_b, double window_radius, RngStream& rng);
std::vector<Point> place_bs(std::size_t count, double window_radius, RngStream& rng);

/// Point at offset t along the line: (y cos - t sin, y sin + t cos).
Point to_xy(const Line& line, double t);

/// Full pipeline: roads, vehicles, Palm road, thinning of every vehicle,
/// base stations. The draw order is fixed so a stream reproduces the
/// realization exactly.
NetworkRealization sample_realization(double lambda_R, double mu, double lambda_b, double p_tx,
                                      double window_radius, RngStream& rng);

/// Nearest transmitting vehicle and nearest base station seen from the
/// origin. Throws DegenerateRealization if either set is empty.
NearestDistances nearest_distances(const NetworkRealization& realization);

}  // namespace pointprocess
}  // namespace v2x
