#pragma once

// Experiment runner: spec files, named presets, analytic and Monte Carlo
// sweeps, CSV and SVG output.
//
// dB and dBm appear only here, at the user boundary. Everything handed to
// the analytic and simulator modules is linear.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "v2x/analytic.hpp"
#include "v2x/network_params.hpp"
#include "v2x/simulator.hpp"

namespace v2x::exp {

// Unit conversions ---------------------------------------------------------------

double db_to_linear(double db);
double linear_to_db(double linear);
double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);
/// Thermal noise power in dBm for a density in dBm/Hz over a bandwidth in Hz.
double noise_dbm(double density_dbm_per_hz, double bandwidth_hz);

// Spec -----------------------------------------------------------------------------

enum class Preset { fig3, fig4, fig5, fig6, fig7, fig8, fig9, custom };
enum class SweepParam { z_dB, mu_v, lambda_R, lambda_b, bias_B };
enum class PlotKind { success, association, distance };

std::string to_string(Preset p);
std::string to_string(SweepParam p);
std::optional<Preset> parse_preset(std::string_view name);
std::optional<SweepParam> parse_sweep_param(std::string_view name);

/// Column name of the sweep variable, unit included (e.g. "mu_v_per_km").
std::string sweep_column(SweepParam p);

struct Sweep {
  SweepParam param = SweepParam::z_dB;
  /// z_dB in dB, bias_B linear (inf allowed), the rest in their linear units.
  std::vector<double> values;
};

struct Outputs {
  bool csv = true;
  bool svg = true;
  PlotKind plot = PlotKind::success;
  /// Adds the r_v distance CDF table (and its CSV) to the run.
  bool distance_cdf = false;
  double distance_max_km = 0.0;  ///< 0 picks a range from the distance law
  unsigned distance_points = 40;
};

/// A validation failure tied to one spec key.
class SpecError : public std::runtime_error {
 public:
  SpecError(std::string key, const std::string& what);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ExperimentSpec {
  Preset preset = Preset::custom;
  std::string name = "custom";
  NetworkParams base;
  Sweep sweep;
  sim::SimConfig sim;
  /// false: the window radius follows check_window for every row.
  bool window_fixed = false;
  /// false: analytic only.
  bool run_mc = true;
  Outputs outputs;

  /// Throws SpecError naming the offending key.
  void validate() const;
};

/// Preset expanded to its parameter set and sweep grid.
ExperimentSpec preset_spec(Preset p);

/// Parses the flat key = value schema ([params], [sweep], [sim], [outputs],
/// optional top-level preset and name). `preset_override` replaces the
/// file's preset; keys in the file still apply on top of it.
ExperimentSpec parse_spec(std::string_view text, std::optional<Preset> preset_override = std::nullopt);
ExperimentSpec load_spec(const std::filesystem::path& path, std::optional<Preset> preset_override = std::nullopt);

/// Network parameters of one sweep row.
NetworkParams row_params(const ExperimentSpec& spec, double sweep_value);

// Results ---------------------------------------------------------------------------

struct Row {
  double value = 0.0;
  std::optional<analytic::SuccessBreakdown> analytic;
  std::optional<sim::SuccessEstimates> mc;
  double window_radius = 0.0;
  std::uint64_t degenerate_resamples = 0;
  double wall_seconds = 0.0;
  std::string error;  ///< empty when the row succeeded

  bool ok() const { return error.empty(); }
};

struct DistancePoint {
  double r = 0.0;
  double analytic = 0.0;
  std::optional<sim::Estimate> mc;
};

struct SweepResult {
  std::string name;
  SweepParam param = SweepParam::z_dB;
  PlotKind plot = PlotKind::success;
  std::vector<Row> rows;
  std::vector<DistancePoint> distance;
  std::vector<std::string> warnings;

  bool ok() const;
};

/// Window radius a row runs with, and whether a fixed window passes the check.
sim::WindowCheck row_window(const ExperimentSpec& spec, const NetworkParams& p);

/// Thrown before any work when a fixed window fails the check.
class WindowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs the sweep. Row failures are recorded in the row and the sweep goes on.
SweepResult run(const ExperimentSpec& spec);

// Emission --------------------------------------------------------------------------

/// RFC-4180 CSV, one row per sweep value, %.17e numbers, empty cells for
/// missing values.
void emit_csv(const SweepResult& result, const std::filesystem::path& path);
std::string csv_text(const SweepResult& result);
/// Distance CDF table: r_km, cdf_analytic, cdf_mc, cdf_mc_ci.
std::string distance_csv_text(const SweepResult& result);
void emit_distance_csv(const SweepResult& result, const std::filesystem::path& path);

/// Static SVG: analytic curves as lines, MC estimates as markers with CI bars.
void emit_plot(const SweepResult& result, const std::filesystem::path& path);
std::string svg_text(const SweepResult& result);

/// Splits one CSV record list (RFC-4180) into rows of fields.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace v2x::exp
