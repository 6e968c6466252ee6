#include "v2x/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

namespace v2x::exp {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    const auto item = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> logspace(double lo, double hi, int per_decade) {
  std::vector<double> v;
  const double a = std::log10(lo), b = std::log10(hi);
  const int n = static_cast<int>(std::lround((b - a) * per_decade));
  for (int k = 0; k <= n; ++k) v.push_back(std::pow(10.0, a + static_cast<double>(k) / per_decade));
  return v;
}

std::vector<double> linspace_step(double lo, double hi, double step) {
  std::vector<double> v;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= n; ++k) v.push_back(lo + static_cast<double>(k) * step);
  return v;
}

// "30 dBm", "30dBm", "0.005", "inf". Returns the number and the unit text.
struct Quantity {
  double value = 0.0;
  std::string unit;
};

Quantity parse_quantity(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw SpecError(key, "missing value");
  const char* begin = t.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin) throw SpecError(key, "'" + t + "' is not a number");
  if (errno == ERANGE && std::isinf(v)) throw SpecError(key, "'" + t + "' is out of range");
  return {v, trim(std::string_view(end))};
}

// Accepts one of the spellings in `units` (case-insensitive); an empty unit
// means the first spelling. Returns the index of the matched spelling.
std::size_t expect_unit(const std::string& key, const Quantity& q, std::initializer_list<std::string_view> units) {
  if (q.unit.empty()) return 0;
  const std::string u = lower(q.unit);
  std::size_t i = 0;
  for (auto s : units) {
    if (u == lower(std::string(s))) return i;
    ++i;
  }
  std::string list;
  for (auto s : units) list += (list.empty() ? "" : ", ") + std::string(s);
  throw SpecError(key, "unit '" + q.unit + "' does not match (expected " + (list.empty() ? "no unit" : list) + ")");
}

double dimensionless(const std::string& key, const std::string& text) {
  const auto q = parse_quantity(key, text);
  if (!q.unit.empty()) throw SpecError(key, "unit '" + q.unit + "' does not match (expected no unit)");
  return q.value;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec == std::errc::result_out_of_range) throw SpecError(key, "'" + t + "' is out of range");
  if (ec != std::errc() || p != t.data() + t.size()) throw SpecError(key, "'" + t + "' is not a non-negative integer");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw SpecError(key, "'" + trim(text) + "' is not a boolean");
}

Bias parse_bias(const std::string& key, const std::string& text) {
  const double b = dimensionless(key, text);
  if (std::isinf(b) && b > 0) return Bias::unbounded();
  return Bias(b);
}

std::vector<double> parse_number_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(dimensionless(key, item));
  return out;
}

// Rewraps NetworkParams/SimConfig validation messages onto spec keys.
template <class F>
void rethrow_as_spec_error(const std::string& section, F check) {
  try {
    check();
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    std::string key = section;
    const auto dot = msg.find('.');
    const auto space = msg.find(' ');
    if (dot != std::string::npos && space != std::string::npos && dot < space) {
      key = section + "." + msg.substr(dot + 1, space - dot - 1);
      msg = msg.substr(space + 1);
    }
    throw SpecError(key, msg);
  }
}

void check_sweep_value(SweepParam p, double v) {
  const std::string key = "sweep.values";
  switch (p) {
    case SweepParam::z_dB:
      if (!std::isfinite(v)) throw SpecError(key, "z_dB values must be finite");
      break;
    case SweepParam::bias_B:
      if (!(v >= 0.0)) throw SpecError(key, "bias_B values must be >= 0 (inf allowed)");
      break;
    default:
      if (!(v > 0.0) || !std::isfinite(v)) throw SpecError(key, to_string(p) + " values must be finite and > 0");
  }
}

double default_distance_max(const NetworkParams& p) {
  double r = analytic::v2v_median(p);
  while (analytic::v2v_cdf(r, p) < 0.99) r *= 1.5;
  return r;
}

// Runs fn(i) for i in [0, n) on up to sim::worker_count() threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(sim::worker_count(), static_cast<unsigned>(n)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  if (workers <= 1) {
    work();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
}

}  // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }
double dbm_to_mw(double dbm) { return db_to_linear(dbm); }
double mw_to_dbm(double mw) { return linear_to_db(mw); }
double noise_dbm(double density_dbm_per_hz, double bandwidth_hz) {
  return density_dbm_per_hz + 10.0 * std::log10(bandwidth_hz);
}

std::string to_string(Preset p) {
  switch (p) {
    case Preset::fig3: return "fig3";
    case Preset::fig4: return "fig4";
    case Preset::fig5: return "fig5";
    case Preset::fig6: return "fig6";
    case Preset::fig7: return "fig7";
    case Preset::fig8: return "fig8";
    case Preset::fig9: return "fig9";
    case Preset::custom: return "custom";
  }
  return "custom";
}

std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::z_dB: return "z_dB";
    case SweepParam::mu_v: return "mu_v";
    case SweepParam::lambda_R: return "lambda_R";
    case SweepParam::lambda_b: return "lambda_b";
    case SweepParam::bias_B: return "bias_B";
  }
  return "z_dB";
}

std::optional<Preset> parse_preset(std::string_view name) {
  for (auto p : {Preset::fig3, Preset::fig4, Preset::fig5, Preset::fig6, Preset::fig7, Preset::fig8, Preset::fig9,
                 Preset::custom})
    if (to_string(p) == name) return p;
  return std::nullopt;
}

std::optional<SweepParam> parse_sweep_param(std::string_view name) {
  for (auto p : {SweepParam::z_dB, SweepParam::mu_v, SweepParam::lambda_R, SweepParam::lambda_b, SweepParam::bias_B})
    if (to_string(p) == name) return p;
  return std::nullopt;
}

std::string sweep_column(SweepParam p) {
  switch (p) {
    case SweepParam::z_dB: return "z_dB";
    case SweepParam::mu_v: return "mu_v_per_km";
    case SweepParam::lambda_R: return "lambda_R_per_km";
    case SweepParam::lambda_b: return "lambda_b_per_km2";
    case SweepParam::bias_B: return "bias_B";
  }
  return "z_dB";
}

SpecError::SpecError(std::string key, const std::string& what)
    : std::runtime_error(key + ": " + what), key_(std::move(key)) {}

void ExperimentSpec::validate() const {
  rethrow_as_spec_error("params", [&] { base.validate(); });
  rethrow_as_spec_error("sim", [&] { sim.validate(); });
  if (sweep.values.empty()) throw SpecError("sweep.values", "the sweep needs at least one value");
  for (std::size_t i = 0; i < sweep.values.size(); ++i) {
    check_sweep_value(sweep.param, sweep.values[i]);
    if (i > 0 && !(sweep.values[i] > sweep.values[i - 1]))
      throw SpecError("sweep.values", "values must be sorted ascending without duplicates");
  }
  if (outputs.distance_points < 2) throw SpecError("outputs.distance_points", "must be >= 2");
  if (!(outputs.distance_max_km >= 0.0) || !std::isfinite(outputs.distance_max_km))
    throw SpecError("outputs.distance_max", "must be >= 0 (0 picks a range)");
  if (outputs.plot == PlotKind::distance && !outputs.distance_cdf)
    throw SpecError("outputs.plot", "distance plot needs distance_cdf = true");
}

ExperimentSpec preset_spec(Preset p) {
  ExperimentSpec s;
  s.preset = p;
  s.name = to_string(p);
  NetworkParams& b = s.base;
  b.P_v = dbm_to_mw(30.0);
  b.sigma2 = dbm_to_mw(noise_dbm(-174.0, 10e6));
  b.alpha_v = b.alpha_b = 4.0;
  b.bias_B = Bias(1.0);
  b.z = db_to_linear(0.0);
  b.lambda_b = 2e-5;
  b.lambda_R = 0.005;
  b.mu_v = 0.005;
  s.sweep = {SweepParam::z_dB, {0.0}};
  switch (p) {
    case Preset::fig3:
      b.mu_v = 0.001;
      s.outputs.distance_cdf = true;
      s.outputs.plot = PlotKind::distance;
      break;
    case Preset::fig4:
      b.lambda_R = 0.001;
      b.mu_v = 0.1;
      s.sweep = {SweepParam::z_dB, linspace_step(-20.0, 30.0, 5.0)};
      break;
    case Preset::fig5:
    case Preset::fig6:
      s.sweep = {SweepParam::mu_v, logspace(1e-3, 1.0, 4)};
      if (p == Preset::fig6) s.outputs.plot = PlotKind::association;
      break;
    case Preset::fig7:
      s.sweep = {SweepParam::lambda_R, logspace(1e-3, 1e-1, 4)};
      break;
    case Preset::fig8:
      s.sweep = {SweepParam::lambda_b, logspace(1e-6, 1e-3, 4)};
      break;
    case Preset::fig9:
      s.sweep = {SweepParam::bias_B, logspace(1e-2, 1e4, 2)};
      break;
    case Preset::custom:
      break;
  }
  return s;
}

ExperimentSpec parse_spec(std::string_view text, std::optional<Preset> preset_override) {
  struct Entry {
    std::string section, key, value;
  };
  std::vector<Entry> entries;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw SpecError("line " + std::to_string(line_no), "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "params" && section != "sweep" && section != "sim" && section != "outputs")
        throw SpecError(section, "unknown section (expected params, sweep, sim or outputs)");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw SpecError("line " + std::to_string(line_no), "expected key = value");
    entries.push_back({section, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1))});
  }

  auto full = [](const Entry& e) { return e.section.empty() ? e.key : e.section + "." + e.key; };
  {
    std::map<std::string, int> seen;
    for (const auto& e : entries)
      if (++seen[full(e)] > 1) throw SpecError(full(e), "key given twice");
  }

  Preset preset = Preset::custom;
  for (const auto& e : entries)
    if (e.section.empty() && e.key == "preset") {
      const auto p = parse_preset(e.value);
      if (!p) throw SpecError("preset", "unknown preset '" + e.value + "' (fig3 ... fig9 or custom)");
      preset = *p;
    }
  if (preset_override) preset = *preset_override;
  ExperimentSpec s = preset_spec(preset);

  std::optional<SweepParam> sweep_param;
  std::optional<std::vector<double>> sweep_values;
  for (const auto& e : entries) {
    const std::string key = full(e);
    const std::string& v = e.value;
    NetworkParams& b = s.base;
    if (e.section.empty()) {
      if (e.key == "preset") continue;
      if (e.key == "name") {
        if (v.empty()) throw SpecError(key, "must not be empty");
        s.name = v;
        continue;
      }
    } else if (e.section == "params") {
      if (e.key == "lambda_R") {
        const auto q = parse_quantity(key, v);
        expect_unit(key, q, {"1/km", "per_km", "km/km^2"});
        b.lambda_R = q.value;
        continue;
      }
      if (e.key == "mu_v") {
        const auto q = parse_quantity(key, v);
        expect_unit(key, q, {"1/km", "per_km"});
        b.mu_v = q.value;
        continue;
      }
      if (e.key == "lambda_b") {
        const auto q = parse_quantity(key, v);
        expect_unit(key, q, {"1/km^2", "per_km2", "1/km2"});
        b.lambda_b = q.value;
        continue;
      }
      if (e.key == "P_v" || e.key == "sigma2") {
        const auto q = parse_quantity(key, v);
        const double mw = expect_unit(key, q, {"dBm", "mW"}) == 0 ? dbm_to_mw(q.value) : q.value;
        (e.key == "P_v" ? b.P_v : b.sigma2) = mw;
        continue;
      }
      if (e.key == "z") {
        const auto q = parse_quantity(key, v);
        b.z = expect_unit(key, q, {"dB", "linear"}) == 0 ? db_to_linear(q.value) : q.value;
        continue;
      }
      if (e.key == "alpha_v") { b.alpha_v = dimensionless(key, v); continue; }
      if (e.key == "alpha_b") { b.alpha_b = dimensionless(key, v); continue; }
      if (e.key == "p_tx") { b.p_tx = dimensionless(key, v); continue; }
      if (e.key == "bias_B") { b.bias_B = parse_bias(key, v); continue; }
    } else if (e.section == "sweep") {
      if (e.key == "parameter") {
        sweep_param = parse_sweep_param(v);
        if (!sweep_param) throw SpecError(key, "'" + v + "' cannot be swept (z_dB, mu_v, lambda_R, lambda_b, bias_B)");
        continue;
      }
      if (e.key == "values" || e.key == "range" || e.key == "logspace") {
        if (sweep_values) throw SpecError(key, "give only one of values, range and logspace");
        auto nums = parse_number_list(key, v);
        if (e.key == "values") {
          sweep_values = std::move(nums);
        } else {
          if (nums.size() != 3) throw SpecError(key, "expects three numbers");
          if (e.key == "range") {
            if (!(nums[2] > 0.0) || !(nums[1] >= nums[0]) || !std::isfinite(nums[1]))
              throw SpecError(key, "expects start, stop >= start, step > 0");
            sweep_values = linspace_step(nums[0], nums[1], nums[2]);
          } else {
            if (!(nums[0] > 0.0) || !(nums[1] >= nums[0]) || !(nums[2] >= 1.0) || nums[2] != std::floor(nums[2]))
              throw SpecError(key, "expects start > 0, stop >= start, integer points per decade >= 1");
            sweep_values = logspace(nums[0], nums[1], static_cast<int>(nums[2]));
          }
        }
        continue;
      }
    } else if (e.section == "sim") {
      if (e.key == "trials") { s.sim.trials = parse_uint(key, v); continue; }
      if (e.key == "seed") { s.sim.seed = RngSeed{parse_uint(key, v)}; continue; }
      if (e.key == "monte_carlo") { s.run_mc = parse_bool(key, v); continue; }
      if (e.key == "window_radius") {
        if (lower(trim(v)) == "auto") {
          s.window_fixed = false;
          continue;
        }
        const auto q = parse_quantity(key, v);
        expect_unit(key, q, {"km"});
        s.sim.window_radius = q.value;
        s.window_fixed = true;
        continue;
      }
      if (e.key == "mode") {
        if (v == "paper" || v == "paper_faithful") s.sim.mode = sim::V2bGeometry::paper_faithful;
        else if (v == "physical") s.sim.mode = sim::V2bGeometry::physical;
        else throw SpecError(key, "'" + v + "' is not paper or physical");
        continue;
      }
      if (e.key == "ci_level") { s.sim.ci_level = dimensionless(key, v); continue; }
      if (e.key == "ci_method") {
        if (v == "normal") s.sim.ci_method = sim::CiMethod::normal;
        else if (v == "exact") s.sim.ci_method = sim::CiMethod::exact;
        else throw SpecError(key, "'" + v + "' is not normal or exact");
        continue;
      }
    } else if (e.section == "outputs") {
      if (e.key == "formats") {
        s.outputs.csv = s.outputs.svg = false;
        for (const auto& f : split_list(v)) {
          if (f == "csv") s.outputs.csv = true;
          else if (f == "svg") s.outputs.svg = true;
          else if (f != "none") throw SpecError(key, "unknown format '" + f + "' (csv, svg, none)");
        }
        continue;
      }
      if (e.key == "plot") {
        if (v == "success") s.outputs.plot = PlotKind::success;
        else if (v == "association") s.outputs.plot = PlotKind::association;
        else if (v == "distance") s.outputs.plot = PlotKind::distance;
        else throw SpecError(key, "'" + v + "' is not success, association or distance");
        continue;
      }
      if (e.key == "distance_cdf") { s.outputs.distance_cdf = parse_bool(key, v); continue; }
      if (e.key == "distance_max") {
        const auto q = parse_quantity(key, v);
        expect_unit(key, q, {"km"});
        s.outputs.distance_max_km = q.value;
        continue;
      }
      if (e.key == "distance_points") {
        const auto n = parse_uint(key, v);
        if (n > 100000) throw SpecError(key, "at most 100000 points");
        s.outputs.distance_points = static_cast<unsigned>(n);
        continue;
      }
    }
    throw SpecError(key, "unknown key");
  }
  if (sweep_values && !sweep_param) throw SpecError("sweep.parameter", "missing while values are given");
  if (sweep_param) {
    if (!sweep_values) throw SpecError("sweep.values", "missing for parameter " + to_string(*sweep_param));
    s.sweep = {*sweep_param, std::move(*sweep_values)};
  }
  s.validate();
  return s;
}

ExperimentSpec load_spec(const std::filesystem::path& path, std::optional<Preset> preset_override) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open spec file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  auto spec = parse_spec(ss.str(), preset_override);
  // A file without its own name is named after the preset, else its stem.
  if (spec.name == "custom" && spec.preset == Preset::custom) spec.name = path.stem().string();
  return spec;
}

NetworkParams row_params(const ExperimentSpec& spec, double v) {
  NetworkParams p = spec.base;
  switch (spec.sweep.param) {
    case SweepParam::z_dB: p.z = db_to_linear(v); break;
    case SweepParam::mu_v: p.mu_v = v; break;
    case SweepParam::lambda_R: p.lambda_R = v; break;
    case SweepParam::lambda_b: p.lambda_b = v; break;
    case SweepParam::bias_B: p.bias_B = std::isinf(v) ? Bias::unbounded() : Bias(v); break;
  }
  return p;
}

sim::WindowCheck row_window(const ExperimentSpec& spec, const NetworkParams& p) {
  return sim::check_window(p, spec.sim.window_radius);
}

bool SweepResult::ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.ok(); });
}

SweepResult run(const ExperimentSpec& spec) {
  spec.validate();
  SweepResult res;
  res.name = spec.name;
  res.param = spec.sweep.param;
  res.plot = spec.outputs.plot;
  const auto& values = spec.sweep.values;
  const std::size_t n = values.size();
  res.rows.resize(n);

  // Window per row. A fixed window that fails aborts the run up front.
  std::vector<NetworkParams> params(n);
  std::string window_errors;
  for (std::size_t i = 0; i < n; ++i) {
    Row& row = res.rows[i];
    row.value = values[i];
    params[i] = row_params(spec, values[i]);
    try {
      params[i].validate();
      const auto w = row_window(spec, params[i]);
      if (w.ok) {
        row.window_radius = spec.sim.window_radius;
      } else if (spec.window_fixed) {
        window_errors += "\n  " + sweep_column(spec.sweep.param) + " = " + std::to_string(values[i]) + ": " + w.message;
      } else {
        row.window_radius = w.recommended_radius;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  if (!window_errors.empty())
    throw WindowError("window_radius " + std::to_string(spec.sim.window_radius) +
                      " Km fails the window check:" + window_errors + "\nset [sim] window_radius = auto or larger");

  parallel_for(n, [&](std::size_t i) {
    Row& row = res.rows[i];
    if (!row.ok()) return;
    const auto t0 = Clock::now();
    try {
      row.analytic = analytic::success_v2x(params[i]);
    } catch (const std::exception& e) {
      row.error = std::string("analytic: ") + e.what();
    }
    row.wall_seconds += seconds_since(t0);
  });

  if (spec.run_mc) {
    auto config_for = [&](std::size_t i) {
      sim::SimConfig c = spec.sim;
      c.params = params[i];
      c.window_radius = res.rows[i].window_radius;
      return c;
    };
    auto add_warnings = [&](const sim::SuccessRun& r) {
      for (const auto& w : r.warnings)
        if (std::find(res.warnings.begin(), res.warnings.end(), w) == res.warnings.end()) res.warnings.push_back(w);
    };
    if (spec.sweep.param == SweepParam::z_dB) {
      // The SINR does not depend on z: one set of trials serves every row.
      std::vector<std::size_t> live;
      std::vector<double> zs;
      for (std::size_t i = 0; i < n; ++i)
        if (res.rows[i].window_radius > 0.0) {
          live.push_back(i);
          zs.push_back(params[i].z);
        }
      if (!live.empty()) {
        const auto t0 = Clock::now();
        try {
          const auto r = sim::estimate_success(config_for(live.front()), zs);
          add_warnings(r);
          for (std::size_t k = 0; k < live.size(); ++k) {
            res.rows[live[k]].mc = r.per_z[k];
            res.rows[live[k]].degenerate_resamples = r.degenerate_resamples;
          }
        } catch (const std::exception& e) {
          for (auto i : live)
            if (res.rows[i].ok()) res.rows[i].error = std::string("simulation: ") + e.what();
        }
        const double share = seconds_since(t0) / static_cast<double>(live.size());
        for (auto i : live) res.rows[i].wall_seconds += share;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        Row& row = res.rows[i];
        if (!(row.window_radius > 0.0)) continue;
        const auto t0 = Clock::now();
        try {
          const auto r = sim::estimate_success(config_for(i), {params[i].z});
          add_warnings(r);
          row.mc = r.per_z.front();
          row.degenerate_resamples = r.degenerate_resamples;
        } catch (const std::exception& e) {
          if (row.ok()) row.error = std::string("simulation: ") + e.what();
        }
        row.wall_seconds += seconds_since(t0);
      }
    }
  }

  if (spec.outputs.distance_cdf) {
    const NetworkParams& p = params.front();
    try {
      const double r_max = spec.outputs.distance_max_km > 0.0 ? spec.outputs.distance_max_km : default_distance_max(p);
      std::vector<double> radii;
      for (unsigned k = 0; k < spec.outputs.distance_points; ++k)
        radii.push_back(r_max * k / (spec.outputs.distance_points - 1));
      for (double r : radii) res.distance.push_back({r, analytic::v2v_cdf(r, p), std::nullopt});
      if (spec.run_mc && res.rows.front().window_radius > 0.0) {
        sim::SimConfig c = spec.sim;
        c.params = p;
        c.window_radius = res.rows.front().window_radius;
        const auto mc = sim::estimate_distance_cdf(c, radii);
        for (std::size_t k = 0; k < radii.size(); ++k) res.distance[k].mc = mc[k];
      }
    } catch (const std::exception& e) {
      res.warnings.push_back(std::string("distance CDF: ") + e.what());
    }
  }
  return res;
}

}  // namespace v2x::exp
