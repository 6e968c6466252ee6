#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "v2x/experiment.hpp"

using namespace v2x;
using namespace v2x::exp;

namespace {

// Minimal XML well-formedness: balanced, properly nested tags and quoted
// attributes. Enough for the SVG we write.
bool well_formed_xml(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool root_seen = false;
  while ((i = s.find('<', i)) != std::string::npos) {
    if (s.compare(i, 2, "<?") == 0) {
      const auto e = s.find("?>", i);
      if (e == std::string::npos) return false;
      i = e + 2;
      continue;
    }
    const bool closing = s.compare(i, 2, "</") == 0;
    std::size_t j = i + (closing ? 2 : 1);
    const std::size_t name_start = j;
    while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '-' || s[j] == ':')) ++j;
    const std::string name = s.substr(name_start, j - name_start);
    if (name.empty()) return false;
    char quote = 0;
    for (; j < s.size(); ++j) {
      if (quote) {
        if (s[j] == quote) quote = 0;
        else if (s[j] == '<') return false;
      } else if (s[j] == '"' || s[j] == '\'') {
        quote = s[j];
      } else if (s[j] == '>') {
        break;
      }
    }
    if (j >= s.size()) return false;
    const bool self_closing = s[j - 1] == '/';
    if (closing) {
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else if (!self_closing) {
      if (stack.empty() && root_seen) return false;
      root_seen = true;
      stack.push_back(name);
    }
    i = j + 1;
  }
  // Bare ampersands must be entities.
  for (std::size_t k = s.find('&'); k != std::string::npos; k = s.find('&', k + 1)) {
    const auto semi = s.find(';', k);
    if (semi == std::string::npos || semi - k > 6) return false;
  }
  return root_seen && stack.empty();
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

void check_spec_error(const std::string& text, const std::string& key) {
  CAPTURE(text);
  try {
    parse_spec(text);
    FAIL("expected a SpecError for " << key);
  } catch (const SpecError& e) {
    CHECK(e.key() == key);
    CHECK(std::string(e.what()).find(key) != std::string::npos);
  }
}

// Small, fast custom experiment with MC.
const char* kSmall = R"(
name = small
[params]
lambda_R = 0.001 1/km
mu_v = 0.1
lambda_b = 1e-4 1/km^2
z = 0 dB
[sweep]
parameter = z_dB
values = -10, 0, 10
[sim]
trials = 1500
seed = 5
)";

}  // namespace

TEST_CASE("dB conversions round-trip") {
  for (double db : {-174.0, -104.0, -20.0, 0.0, 3.0, 30.0, 47.5}) {
    CHECK(std::fabs(linear_to_db(db_to_linear(db)) - db) <= 1e-12 * std::max(1.0, std::fabs(db)));
    CHECK(std::fabs(mw_to_dbm(dbm_to_mw(db)) - db) <= 1e-12 * std::max(1.0, std::fabs(db)));
  }
  for (double lin : {1e-12, 0.5, 1.0, 1000.0, 3.7e9})
    CHECK(db_to_linear(linear_to_db(lin)) == doctest::Approx(lin).epsilon(1e-12));
  CHECK(db_to_linear(0.0) == 1.0);
  CHECK(dbm_to_mw(30.0) == doctest::Approx(1000.0).epsilon(1e-14));
  // -174 dBm/Hz over 10 MHz.
  CHECK(noise_dbm(-174.0, 10e6) == doctest::Approx(-104.0).epsilon(1e-14));
  CHECK(dbm_to_mw(-104.0) == doctest::Approx(NetworkParams{}.sigma2).epsilon(1e-12));
}

TEST_CASE("presets expand to their parameter sets") {
  const auto f4 = preset_spec(Preset::fig4);
  CHECK(f4.base.lambda_R == 0.001);
  CHECK(f4.base.mu_v == 0.1);
  CHECK(f4.base.lambda_b == 2e-5);
  CHECK(f4.base.bias_B == Bias(1.0));
  CHECK(f4.base.P_v == doctest::Approx(1000.0));
  CHECK(f4.base.sigma2 == doctest::Approx(3.981071705534973e-11));
  CHECK(f4.sweep.param == SweepParam::z_dB);
  REQUIRE(f4.sweep.values.size() == 11);
  CHECK(f4.sweep.values.front() == -20.0);
  CHECK(f4.sweep.values.back() == 30.0);

  const auto f3 = preset_spec(Preset::fig3);
  CHECK(f3.base.mu_v == 0.001);
  CHECK(f3.base.lambda_R == 0.005);
  CHECK(f3.outputs.distance_cdf);

  for (auto p : {Preset::fig5, Preset::fig6}) {
    const auto s = preset_spec(p);
    CHECK(s.base.lambda_R == 0.005);
    CHECK(s.base.z == 1.0);
    CHECK(s.sweep.param == SweepParam::mu_v);
    CHECK(s.sweep.values.front() == doctest::Approx(1e-3));
    CHECK(s.sweep.values.back() == doctest::Approx(1.0));
  }
  CHECK(preset_spec(Preset::fig6).outputs.plot == PlotKind::association);

  const auto f7 = preset_spec(Preset::fig7);
  CHECK(f7.base.mu_v == 0.005);
  CHECK(f7.sweep.param == SweepParam::lambda_R);
  CHECK(f7.sweep.values.back() == doctest::Approx(0.1));

  const auto f8 = preset_spec(Preset::fig8);
  CHECK(f8.base.mu_v == 0.005);
  CHECK(f8.base.lambda_R == 0.005);
  CHECK(f8.sweep.param == SweepParam::lambda_b);
  CHECK(f8.sweep.values.front() == doctest::Approx(1e-6));
  CHECK(f8.sweep.values.back() == doctest::Approx(1e-3));

  const auto f9 = preset_spec(Preset::fig9);
  CHECK(f9.base.lambda_b == 2e-5);
  CHECK(f9.sweep.param == SweepParam::bias_B);
  CHECK(f9.sweep.values.front() == doctest::Approx(1e-2));
  CHECK(f9.sweep.values.back() == doctest::Approx(1e4));

  for (auto p : {Preset::fig3, Preset::fig4, Preset::fig5, Preset::fig6, Preset::fig7, Preset::fig8, Preset::fig9}) {
    CHECK_NOTHROW(preset_spec(p).validate());
    CHECK(parse_preset(to_string(p)) == p);
    CHECK(preset_spec(p).sim.trials == 100000);
    CHECK(preset_spec(p).sim.seed.value == 42);
  }
}

TEST_CASE("spec parsing") {
  const auto s = parse_spec(R"(
# comment
preset = fig4
name = mine
[params]
mu_v = 0.2 1/km     ; trailing comment
P_v = 23dBm
sigma2 = 1e-9 mW
z = 2 linear
bias_B = inf
[sweep]
parameter = lambda_b
logspace = 1e-5, 1e-3, 1
[sim]
trials = 123
seed = 9
window_radius = 800 km
mode = physical
ci_method = exact
[outputs]
formats = csv
)");
  CHECK(s.name == "mine");
  CHECK(s.preset == Preset::fig4);
  CHECK(s.base.lambda_R == 0.001);  // from the preset
  CHECK(s.base.mu_v == 0.2);
  CHECK(s.base.P_v == doctest::Approx(std::pow(10.0, 2.3)));
  CHECK(s.base.sigma2 == 1e-9);
  CHECK(s.base.z == 2.0);
  CHECK(s.base.bias_B.is_unbounded());
  CHECK(s.sweep.param == SweepParam::lambda_b);
  REQUIRE(s.sweep.values.size() == 3);
  CHECK(s.sweep.values[1] == doctest::Approx(1e-4));
  CHECK(s.sim.trials == 123);
  CHECK(s.sim.seed.value == 9);
  CHECK(s.sim.window_radius == 800.0);
  CHECK(s.window_fixed);
  CHECK(s.sim.mode == sim::V2bGeometry::physical);
  CHECK(s.sim.ci_method == sim::CiMethod::exact);
  CHECK(s.outputs.csv);
  CHECK_FALSE(s.outputs.svg);

  const auto r = parse_spec("[sweep]\nparameter = z_dB\nrange = -5, 5, 2.5\n");
  CHECK(r.sweep.values == std::vector<double>{-5.0, -2.5, 0.0, 2.5, 5.0});

  // The override wins over the file's preset; file keys still apply.
  const auto o = parse_spec("preset = fig4\n[params]\nmu_v = 0.3\n", Preset::fig8);
  CHECK(o.preset == Preset::fig8);
  CHECK(o.sweep.param == SweepParam::lambda_b);
  CHECK(o.base.mu_v == 0.3);
}

TEST_CASE("spec errors name the offending key") {
  check_spec_error("[params]\nmu_vv = 0.1\n", "params.mu_vv");
  check_spec_error("[parms]\n", "parms");
  check_spec_error("bogus = 1\n", "bogus");
  check_spec_error("[params]\nP_v = 30 km\n", "params.P_v");
  check_spec_error("[params]\nmu_v = 0.1 1/km^2\n", "params.mu_v");
  check_spec_error("[params]\nalpha_v = 4 dB\n", "params.alpha_v");
  check_spec_error("[sim]\nwindow_radius = 500 m\n", "sim.window_radius");
  check_spec_error("[params]\nmu_v = -1\n", "params.mu_v");
  check_spec_error("[params]\nalpha_b = 0.5\n", "params.alpha_b");
  check_spec_error("[params]\np_tx = 2\n", "params.p_tx");
  check_spec_error("[params]\nlambda_b = abc\n", "params.lambda_b");
  check_spec_error("[params]\nlambda_b = 1e999\n", "params.lambda_b");
  check_spec_error("[sweep]\nparameter = mu_v\nvalues =\n", "sweep.values");
  check_spec_error("[sweep]\nparameter = mu_v\nvalues = 0.1, 0.01\n", "sweep.values");
  check_spec_error("[sweep]\nparameter = mu_v\nvalues = 0, 0.01\n", "sweep.values");
  check_spec_error("[sweep]\nparameter = P_v\nvalues = 1\n", "sweep.parameter");
  check_spec_error("[sweep]\nvalues = 1\n", "sweep.parameter");
  check_spec_error("[sweep]\nparameter = mu_v\n", "sweep.values");
  check_spec_error("[sim]\ntrials = 0\n", "sim.trials");
  check_spec_error("[sim]\ntrials = -3\n", "sim.trials");
  check_spec_error("[sim]\nci_level = 1.5\n", "sim.ci_level");
  check_spec_error("[sim]\nmode = sideways\n", "sim.mode");
  check_spec_error("[outputs]\nformats = csv, png\n", "outputs.formats");
  check_spec_error("[params]\nmu_v = 0.1\nmu_v = 0.2\n", "params.mu_v");
  check_spec_error("preset = fig10\n", "preset");
  CHECK_THROWS_AS(load_spec("/nonexistent/spec.ini"), std::runtime_error);
}

TEST_CASE("row parameters follow the sweep") {
  auto s = preset_spec(Preset::fig4);
  CHECK(row_params(s, 10.0).z == doctest::Approx(10.0));
  s = preset_spec(Preset::fig9);
  CHECK(row_params(s, 3.0).bias_B == Bias(3.0));
  CHECK(row_params(s, INFINITY).bias_B.is_unbounded());
  s = preset_spec(Preset::fig7);
  CHECK(row_params(s, 0.02).lambda_R == 0.02);
  CHECK(row_params(s, 0.02).mu_v == 0.005);
}

TEST_CASE("analytic sweeps keep the expected orderings") {
  auto f6 = preset_spec(Preset::fig6);
  f6.run_mc = false;
  const auto r6 = run(f6);
  REQUIRE(r6.rows.size() == f6.sweep.values.size());
  for (const auto& row : r6.rows) {
    REQUIRE(row.analytic);
    CHECK(std::fabs(row.analytic->p_v2v_assoc + row.analytic->p_v2b_assoc - 1.0) <= 2e-3);
    CHECK_FALSE(row.mc);
  }

  auto f9 = preset_spec(Preset::fig9);
  f9.run_mc = false;
  const auto r9 = run(f9);
  double at_001 = NAN, at_1 = NAN;
  for (const auto& row : r9.rows) {
    if (std::fabs(row.value - 0.01) < 1e-12) at_001 = row.analytic->p_v2x;
    if (std::fabs(row.value - 1.0) < 1e-12) at_1 = row.analytic->p_v2x;
  }
  CHECK(at_1 >= at_001);

  auto f8 = preset_spec(Preset::fig8);
  f8.run_mc = false;
  const auto r8 = run(f8);
  for (const auto& row : r8.rows)
    CHECK(std::fabs(row.analytic->p_v2v_only - r8.rows.front().analytic->p_v2v_only) <= 1e-10);
  CHECK(r8.ok());
}

TEST_CASE("Monte Carlo sweep, determinism and CSV") {
  const auto spec = parse_spec(kSmall);
  const auto a = run(spec);
  REQUIRE(a.rows.size() == 3);
  CHECK(a.ok());
  for (const auto& row : a.rows) {
    REQUIRE(row.mc);
    REQUIRE(row.analytic);
    CHECK(row.mc->v2x.n == 1500);
    CHECK(std::fabs(row.mc->v2x.mean - row.analytic->p_v2x) < 0.05);
    CHECK(row.window_radius >= 500.0);
  }
  CHECK_FALSE(a.warnings.empty());  // 1500 trials cannot reach +-0.01

  const auto b = run(spec);
  const std::string ca = csv_text(a);
  CHECK(ca == csv_text(b));

  const auto rows = parse_csv(ca);
  REQUIRE(rows.size() == 4);
  const auto& header = rows.front();
  CHECK(header[0] == "z_dB");
  CHECK(std::find(header.begin(), header.end(), "p_v2x_analytic") != header.end());
  CHECK(std::find(header.begin(), header.end(), "p_v2x_mc") != header.end());
  CHECK(std::find(header.begin(), header.end(), "p_v2x_mc_ci") != header.end());
  for (const auto& r : rows) CHECK(r.size() == header.size());
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& r = rows[i + 1];
    CHECK(std::strtod(r[0].c_str(), nullptr) == a.rows[i].value);
    CHECK(std::strtod(r[col("p_v2x_analytic")].c_str(), nullptr) == a.rows[i].analytic->p_v2x);
    CHECK(std::strtod(r[col("p_v2x_mc")].c_str(), nullptr) == a.rows[i].mc->v2x.mean);
    CHECK(std::strtod(r[col("p_v2x_mc_ci")].c_str(), nullptr) == a.rows[i].mc->v2x.ci_halfwidth);
    CHECK(std::strtod(r[col("p_v2b_assoc_analytic")].c_str(), nullptr) == a.rows[i].analytic->p_v2b_assoc);
    CHECK(r[col("status")] == "ok");
  }
  CHECK(ca.back() == '\n');

  // Another seed moves the estimates.
  auto other = spec;
  other.sim.seed = RngSeed{6};
  CHECK(csv_text(run(other)) != ca);
}

TEST_CASE("a fixed window that fails the check aborts with guidance") {
  auto spec = parse_spec(kSmall);
  spec.base.lambda_b = 1e-7;  // needs a window of over 1700 Km for base stations
  spec.window_fixed = true;
  spec.sim.window_radius = 500.0;
  try {
    run(spec);
    FAIL("expected WindowError");
  } catch (const WindowError& e) {
    CHECK(std::string(e.what()).find("at least") != std::string::npos);
  }
  spec.window_fixed = false;
  const auto r = run(parse_spec(std::string(kSmall) + "[outputs]\nformats = none\n"));
  CHECK(r.ok());
}

TEST_CASE("CSV quoting and empty results") {
  SweepResult empty;
  empty.param = SweepParam::mu_v;
  const auto text = csv_text(empty);
  const auto rows = parse_csv(text);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0][0] == "mu_v_per_km");
  CHECK(text.back() == '\n');

  SweepResult r;
  r.param = SweepParam::bias_B;
  Row failed;
  failed.value = INFINITY;
  failed.error = "bad, \"quoted\"\nthing";
  r.rows.push_back(failed);
  Row good;
  good.value = 0.1 + 0.2;
  good.analytic = analytic::SuccessBreakdown{0.1, 0.2, 0.3, 0.7, 1.0 / 3.0, 2.0 / 3.0};
  r.rows.push_back(good);
  CHECK_FALSE(r.ok());
  const auto parsed = parse_csv(csv_text(r));
  REQUIRE(parsed.size() == 3);
  CHECK(parsed[1][0] == "inf");
  CHECK(parsed[1][1] == "failed");
  CHECK(parsed[1].back() == failed.error);
  CHECK(std::strtod(parsed[2][0].c_str(), nullptr) == good.value);
  CHECK(std::strtod(parsed[2][2].c_str(), nullptr) == 1.0 / 3.0);  // p_v2x_analytic
  CHECK(parsed[2][8].empty());  // p_v2x_mc
  CHECK(parse_csv("a,\"b\"\"c\",\r\n1,2,3") ==
        std::vector<std::vector<std::string>>{{"a", "b\"c", ""}, {"1", "2", "3"}});
}

TEST_CASE("SVG plots") {
  SweepResult one;
  one.name = "one & only";
  one.param = SweepParam::z_dB;
  Row row;
  row.value = 0.0;
  row.analytic = analytic::SuccessBreakdown{0.5, 0.2, 0.3, 0.7, 0.7, 0.6};
  sim::SuccessEstimates e;
  e.v2x = {0.69, 0.01, 1000};
  row.mc = e;
  one.rows.push_back(row);
  one.plot = PlotKind::association;
  const auto assoc = svg_text(one);
  CHECK(well_formed_xml(assoc));
  CHECK(assoc.find("Association Probability") != std::string::npos);
  CHECK(count(assoc, "<circle") == 2 + 2);  // one marker per series, plus legend

  SweepResult nothing;
  CHECK_THROWS_AS(svg_text(nothing), std::invalid_argument);

  auto f4 = preset_spec(Preset::fig4);
  f4.run_mc = false;
  const auto r4 = run(f4);
  const auto svg = svg_text(r4);
  CHECK(well_formed_xml(svg));
  CHECK(svg.find("Success Probability") != std::string::npos);
  CHECK(svg.find("SINR threshold z (dB)") != std::string::npos);
  for (const char* label : {"V2X analyt.", "C-V2V analyt.", "C-V2B analyt.", "V2V-only analyt."})
    CHECK(svg.find(label) != std::string::npos);
  CHECK(count(svg, "<polyline") == 4);

  auto f3 = preset_spec(Preset::fig3);
  f3.sim.trials = 500;
  const auto r3 = run(f3);
  REQUIRE_FALSE(r3.distance.empty());
  CHECK(r3.distance.front().analytic == 0.0);
  CHECK(r3.distance.front().mc->mean == 0.0);
  CHECK(well_formed_xml(svg_text(r3)));
  const auto dist = parse_csv(distance_csv_text(r3));
  CHECK(dist.front() == std::vector<std::string>{"r_km", "cdf_analytic", "cdf_mc", "cdf_mc_ci"});
  CHECK(dist.size() == r3.distance.size() + 1);

  const auto dir = std::filesystem::temp_directory_path() / "v2x_test_experiment";
  std::filesystem::create_directories(dir);
  emit_plot(r4, dir / "fig4.svg");
  emit_csv(r4, dir / "fig4.csv");
  std::ifstream f(dir / "fig4.csv");
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(parse_csv(ss.str()).size() == 12);
  CHECK_THROWS_AS(emit_csv(r4, dir / "missing" / "x.csv"), std::runtime_error);
  std::filesystem::remove_all(dir);
}
