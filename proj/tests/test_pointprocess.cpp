#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "v2x/pointprocess.hpp"

using namespace v2x;
using namespace v2x::pointprocess;
namespace oracle = v2x::oracle;

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
void check_poisson_mean(F draw_count, double mean, int draws = 10000) {
  std::vector<double> counts(draws);
  for (int i = 0; i < draws; ++i) counts[i] = static_cast<double>(draw_count(i));
  const auto m = oracle::mean_se(counts);
  CAPTURE(m.mean);
  CAPTURE(mean);
  // Poisson standard error is sqrt(mean/n); the sample SE estimates the same.
  CHECK(std::fabs(m.mean - mean) <= 3.0 * std::sqrt(mean / draws));
}

}  // namespace

TEST_CASE("line count matches the Poisson mean 2 pi lambda_R R") {
  check_poisson_mean([](int i) { RngStream rng({1}, i); return sample_plp(0.005, 500.0, rng).size(); },
                     2 * kPi * 0.005 * 500.0);
  check_poisson_mean([](int i) { RngStream rng({2}, i); return sample_plp(0.001, 500.0, rng).size(); },
                     2 * kPi * 0.001 * 500.0);
}

TEST_CASE("lines live in the representation cylinder") {
  RngStream rng({3});
  CHECK(place_lines(0, 500.0, rng).empty());
  for (const auto& line : place_lines(10000, 500.0, rng)) {
    CHECK(line.theta >= 0.0);
    CHECK(line.theta < kPi);
    CHECK(std::fabs(line.y) <= 500.0);
  }
}

TEST_CASE("vehicle count per line follows the chord length") {
  check_poisson_mean(
      [](int i) { RngStream rng({4}, i); return sample_vehicles_on_line({0.3, 0.0}, 0.1, 500.0, rng).size(); },
      100.0);
  check_poisson_mean(
      [](int i) { RngStream rng({5}, i); return sample_vehicles_on_line({1.0, 300.0}, 0.001, 500.0, rng).size(); },
      0.8);
  RngStream rng({6});
  CHECK(sample_vehicles_on_line({0.2, 500.0}, 10.0, 500.0, rng).empty());
  CHECK(sample_vehicles_on_line({0.2, -600.0}, 10.0, 500.0, rng).empty());
  const Line line{2.0, -120.0};
  const double half = std::sqrt(500.0 * 500.0 - 120.0 * 120.0);
  for (double t : sample_vehicles_on_line(line, 1.0, 500.0, rng)) CHECK(std::fabs(t) <= half);
}

TEST_CASE("thinning keeps each vehicle independently with probability p") {
  RngStream rng({7});
  const std::vector<double> vehicles(100000, 1.0);
  for (bool f : thin_transmitters(std::vector<double>(50, 0.0), 1.0, rng)) CHECK(f);
  for (bool f : thin_transmitters(std::vector<double>(50, 0.0), 0.0, rng)) CHECK_FALSE(f);
  const auto flags = thin_transmitters(vehicles, 0.5, rng);
  double kept = 0.0;
  for (bool f : flags) kept += f;
  CHECK(std::fabs(kept / vehicles.size() - 0.5) < 0.005);
}

TEST_CASE("Palm conditioning adds one road through the origin") {
  RngStream rng({8});
  NetworkRealization empty;
  empty.window_radius = 500.0;
  const auto one = palm_condition(empty, 0.1, rng);
  CHECK(one.lines.size() == 1);
  REQUIRE(one.typical_line_index.has_value());
  CHECK(one.lines[*one.typical_line_index].y == 0.0);

  NetworkRealization net;
  net.window_radius = 500.0;
  net.lines = sample_plp(0.005, 500.0, rng);
  for (const auto& line : net.lines) net.vehicles.push_back(sample_vehicles_on_line(line, 0.01, 500.0, rng));
  const auto before = net;
  const auto after = palm_condition(net, 0.01, rng);
  CHECK(after.lines.size() == before.lines.size() + 1);
  for (std::size_t i = 0; i < before.lines.size(); ++i) {
    CHECK(after.lines[i].theta == before.lines[i].theta);
    CHECK(after.lines[i].y == before.lines[i].y);
    CHECK(after.vehicles[i] == before.vehicles[i]);
  }
  CHECK(*after.typical_line_index == before.lines.size());

  check_poisson_mean(
      [](int i) {
        RngStream r({9}, i);
        NetworkRealization e;
        e.window_radius = 500.0;
        const auto p = palm_condition(e, 0.1, r);
        return p.vehicles[*p.typical_line_index].size();
      },
      100.0);
}

TEST_CASE("base stations form a PPP in the disc") {
  check_poisson_mean([](int i) { RngStream rng({10}, i); return sample_bs(2e-5, 500.0, rng).size(); },
                     2e-5 * kPi * 500.0 * 500.0);
  RngStream rng({11});
  CHECK(place_bs(0, 500.0, rng).empty());
  for (const auto& p : place_bs(10000, 500.0, rng)) CHECK(std::hypot(p.x, p.y) <= 500.0);
}

TEST_CASE("nearest base station distance follows 1 - exp(-pi lambda_b r^2)") {
  const double lambda_b = 2e-5;
  constexpr int n = 100000;
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) {
    RngStream rng({12}, i);
    double best = INFINITY;
    for (const auto& p : sample_bs(lambda_b, 500.0, rng)) best = std::min(best, std::hypot(p.x, p.y));
    r[i] = best;
  }
  std::sort(r.begin(), r.end());
  double sup = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = 1.0 - std::exp(-kPi * lambda_b * r[i] * r[i]);
    sup = std::max({sup, std::fabs(f - double(i) / n), std::fabs(f - double(i + 1) / n)});
  }
  CHECK(sup < 0.02);
}

TEST_CASE("to_xy maps representation space onto the plane") {
  const auto p = to_xy({0.0, 0.0}, 5.0);
  CHECK(std::hypot(p.x, p.y) == doctest::Approx(5.0).epsilon(1e-15));
  const auto q = to_xy({1.234, 3.0}, 4.0);
  CHECK(std::hypot(q.x, q.y) == doctest::Approx(5.0).epsilon(1e-14));
  RngStream rng({13});
  for (int i = 0; i < 10000; ++i) {
    const Line line{rng.uniform(0.0, kPi), rng.uniform(-500.0, 500.0)};
    const double t = rng.uniform(-500.0, 500.0);
    const auto xy = to_xy(line, t);
    CHECK(std::fabs(std::hypot(xy.x, xy.y) - std::hypot(line.y, t)) <= 1e-12 * std::hypot(line.y, t) + 1e-12);
  }
  // The point sits on the line: its projection onto the normal is y.
  const Line line{0.7, -42.0};
  const auto xy = to_xy(line, 13.0);
  CHECK(xy.x * std::cos(line.theta) + xy.y * std::sin(line.theta) == doctest::Approx(line.y));
}

TEST_CASE("nearest_distances on hand-built realizations") {
  NetworkRealization net;
  net.window_radius = 10.0;
  net.lines = {{0.0, 0.0}};
  net.vehicles = {{2.0}};
  net.tx_flags = {{true}};
  net.base_stations = {{3.0, 4.0}};
  net.typical_line_index = 0;
  auto d = nearest_distances(net);
  CHECK(d.r_v == 2.0);
  CHECK(d.r_b == 5.0);

  net.vehicles = {{-7.0, 9.0}};
  net.tx_flags = {{true, true}};
  d = nearest_distances(net);
  CHECK(d.r_v == 7.0);
  CHECK(d.nearest_vehicle.index == 0);

  // Silent vehicles do not count.
  net.tx_flags = {{false, true}};
  CHECK(nearest_distances(net).r_v == 9.0);

  net.tx_flags = {{false, false}};
  CHECK_THROWS_AS(nearest_distances(net), DegenerateRealization);
  net.tx_flags = {{true, true}};
  net.base_stations.clear();
  CHECK_THROWS_AS(nearest_distances(net), DegenerateRealization);
}

TEST_CASE("sampled realizations satisfy the window invariants") {
  for (int i = 0; i < 200; ++i) {
    RngStream rng({14}, i);
    const auto net = sample_realization(0.005, 0.01, 2e-5, 0.7, 300.0, rng);
    REQUIRE(net.typical_line_index.has_value());
    CHECK(net.lines[*net.typical_line_index].y == 0.0);
    REQUIRE(net.vehicles.size() == net.lines.size());
    REQUIRE(net.tx_flags.size() == net.lines.size());
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
      const double half = std::sqrt(300.0 * 300.0 - net.lines[l].y * net.lines[l].y);
      CHECK(net.tx_flags[l].size() == net.vehicles[l].size());
      for (double t : net.vehicles[l]) CHECK(std::fabs(t) <= half);
    }
    for (const auto& p : net.base_stations) CHECK(std::hypot(p.x, p.y) <= 300.0);
  }
}

TEST_CASE("identical seeds give bit-identical realizations") {
  RngStream a({99}, 5);
  RngStream b({99}, 5);
  RngStream c({99}, 6);
  const auto na = sample_realization(0.005, 0.01, 2e-5, 1.0, 500.0, a);
  const auto nb = sample_realization(0.005, 0.01, 2e-5, 1.0, 500.0, b);
  const auto nc = sample_realization(0.005, 0.01, 2e-5, 1.0, 500.0, c);
  REQUIRE(na.lines.size() == nb.lines.size());
  for (std::size_t i = 0; i < na.lines.size(); ++i) {
    CHECK(na.lines[i].theta == nb.lines[i].theta);
    CHECK(na.lines[i].y == nb.lines[i].y);
    CHECK(na.vehicles[i] == nb.vehicles[i]);
    CHECK(na.tx_flags[i] == nb.tx_flags[i]);
  }
  REQUIRE(na.base_stations.size() == nb.base_stations.size());
  for (std::size_t j = 0; j < na.base_stations.size(); ++j) {
    CHECK(na.base_stations[j].x == nb.base_stations[j].x);
    CHECK(na.base_stations[j].y == nb.base_stations[j].y);
  }
  CHECK(na.lines.front().theta != nc.lines.front().theta);
}

TEST_CASE("r_v distribution is rotation invariant") {
  constexpr int n = 10000;
  std::vector<double> plain, rotated;
  for (int i = 0; i < n; ++i) {
    RngStream rng({15}, i);
    auto net = sample_realization(0.005, 0.001, 2e-5, 1.0, 500.0, rng);
    try {
      plain.push_back(nearest_distances(net).r_v);
    } catch (const DegenerateRealization&) {
    }
    RngStream rng2({16}, i);
    net = sample_realization(0.005, 0.001, 2e-5, 1.0, 500.0, rng2);
    for (auto& line : net.lines) {
      // A rotation past pi flips the normal, so y changes sign.
      line.theta += 1.0;
      if (line.theta >= kPi) {
        line.theta -= kPi;
        line.y = -line.y;
      }
    }
    try {
      rotated.push_back(nearest_distances(net).r_v);
    } catch (const DegenerateRealization&) {
    }
  }
  const double d = oracle::ks_statistic(plain, rotated);
  CHECK(oracle::ks_pvalue(d, plain.size(), rotated.size()) > 0.01);
}

TEST_CASE("superposed vehicle processes match a single process of summed intensity") {
  constexpr int n = 10000;
  const Line line{0.4, 150.0};
  std::vector<double> merged, single;
  for (int i = 0; i < n; ++i) {
    RngStream rng({17}, i);
    auto a = sample_vehicles_on_line(line, 0.004, 500.0, rng);
    const auto b = sample_vehicles_on_line(line, 0.006, 500.0, rng);
    merged.push_back(static_cast<double>(a.size() + b.size()));
    RngStream rng2({18}, i);
    single.push_back(static_cast<double>(sample_vehicles_on_line(line, 0.01, 500.0, rng2).size()));
  }
  const double d = oracle::ks_statistic(merged, single);
  CHECK(oracle::ks_pvalue(d, n, n) > 0.01);
  CHECK(std::fabs(oracle::mean_se(merged).mean - oracle::mean_se(single).mean) <
        3.0 * std::hypot(oracle::mean_se(merged).se, oracle::mean_se(single).se));
}
