// v2x: runs figure presets and custom sweeps, writes CSV and SVG.
//
//   v2x run [spec-file] [--preset figN] [--trials N] [--seed S] [--out DIR]
//           [--no-sim] [--mode paper|physical]
//   v2x dump [spec-file] [--preset figN] [--row I] [--trial K] [--out FILE]
//
// Exit codes: 0 every row succeeded, 1 some row failed, 2 bad spec or
// arguments, 3 the fixed window fails the window check.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "v2x/experiment.hpp"
#include "v2x/pointprocess.hpp"

namespace {

using namespace v2x;
namespace fs = std::filesystem;

struct Common {
  std::string spec_file;
  std::string preset;
};

exp::ExperimentSpec load(const Common& c) {
  std::optional<exp::Preset> preset;
  if (!c.preset.empty()) {
    preset = exp::parse_preset(c.preset);
    if (!preset) throw exp::SpecError("preset", "unknown preset '" + c.preset + "'");
  }
  if (c.spec_file.empty()) {
    if (!preset) throw exp::SpecError("preset", "give a spec file or --preset");
    return exp::preset_spec(*preset);
  }
  return exp::load_spec(c.spec_file, preset);
}

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void print_table(const exp::SweepResult& r) {
  std::printf("%-16s %-8s %-10s %-18s %-10s %-18s %s\n", exp::sweep_column(r.param).c_str(), "status", "p_v2x",
              "p_v2x_mc", "v2v_only", "assoc_v2v(mc)", "seconds");
  for (const auto& row : r.rows) {
    std::string mc = "-", assoc = "-";
    if (row.mc) mc = cell(row.mc->v2x.mean) + " +- " + cell(row.mc->v2x.ci_halfwidth);
    if (row.analytic) assoc = cell(row.analytic->p_v2v_assoc);
    if (row.mc) assoc += " (" + cell(row.mc->assoc_v2v.mean) + ")";
    std::printf("%-16.6g %-8s %-10s %-18s %-10s %-18s %.2f\n", row.value, row.ok() ? "ok" : "FAILED",
                row.analytic ? cell(row.analytic->p_v2x).c_str() : "-", mc.c_str(),
                row.analytic ? cell(row.analytic->p_v2v_only).c_str() : "-", assoc.c_str(), row.wall_seconds);
  }
}

int cmd_run(const Common& c, std::optional<std::uint64_t> trials, std::optional<std::uint64_t> seed,
            const std::string& out_dir, bool no_sim, const std::string& mode) {
  auto spec = load(c);
  if (trials) spec.sim.trials = *trials;
  if (seed) spec.sim.seed = RngSeed{*seed};
  if (no_sim) spec.run_mc = false;
  if (mode == "physical") spec.sim.mode = sim::V2bGeometry::physical;
  else if (mode == "paper") spec.sim.mode = sim::V2bGeometry::paper_faithful;
  spec.validate();

  const auto result = exp::run(spec);
  print_table(result);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

  fs::create_directories(out_dir);
  const fs::path base = fs::path(out_dir) / spec.name;
  if (spec.outputs.csv) {
    exp::emit_csv(result, base.string() + ".csv");
    std::cerr << "wrote " << base.string() << ".csv\n";
    if (!result.distance.empty()) {
      exp::emit_distance_csv(result, base.string() + "_distance_cdf.csv");
      std::cerr << "wrote " << base.string() << "_distance_cdf.csv\n";
    }
  }
  if (spec.outputs.svg) {
    try {
      exp::emit_plot(result, base.string() + ".svg");
      std::cerr << "wrote " << base.string() << ".svg\n";
    } catch (const std::invalid_argument& e) {
      std::cerr << "warning: no plot: " << e.what() << '\n';
    }
  }

  int failed = 0;
  for (const auto& row : result.rows)
    if (!row.ok()) {
      ++failed;
      std::cerr << "row " << exp::sweep_column(result.param) << " = " << row.value << " failed: " << row.error << '\n';
    }
  return failed ? 1 : 0;
}

// Realization dump for debugging; the schema is documented in docs/config.md.
int cmd_dump(const Common& c, std::size_t row, std::uint64_t trial, const std::string& out) {
  const auto spec = load(c);
  if (row >= spec.sweep.values.size()) throw exp::SpecError("row", "out of range");
  const auto p = exp::row_params(spec, spec.sweep.values[row]);
  const auto w = exp::row_window(spec, p);
  const double radius = (w.ok || spec.window_fixed) ? spec.sim.window_radius : w.recommended_radius;
  RngStream rng(spec.sim.seed, trial);
  const auto net = pointprocess::sample_realization(p.lambda_R, p.mu_v, p.lambda_b, p.p_tx, radius, rng);

  nlohmann::json j;
  j["window_radius_km"] = net.window_radius;
  j["seed"] = spec.sim.seed.value;
  j["trial"] = trial;
  j["typical_line"] = net.typical_line_index ? nlohmann::json(*net.typical_line_index) : nlohmann::json(nullptr);
  auto& lines = j["lines"] = nlohmann::json::array();
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    nlohmann::json line;
    line["theta"] = net.lines[l].theta;
    line["y_km"] = net.lines[l].y;
    line["vehicles_t_km"] = net.vehicles[l];
    std::vector<int> tx(net.tx_flags[l].begin(), net.tx_flags[l].end());
    line["transmits"] = tx;
    lines.push_back(std::move(line));
  }
  auto& bs = j["base_stations"] = nlohmann::json::array();
  for (const auto& b : net.base_stations) bs.push_back({b.x, b.y});
  if (out.empty() || out == "-") {
    std::cout << j.dump(1) << '\n';
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << j.dump(1) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cellular V2X uplink reliability: analytic model and Monte Carlo validation"};
  app.require_subcommand(1);

  Common run_common;
  std::optional<std::uint64_t> trials, seed;
  std::string out_dir = "out";
  bool no_sim = false;
  std::string mode;
  auto* run = app.add_subcommand("run", "Run a sweep and write CSV/SVG");
  run->add_option("spec-file", run_common.spec_file, "Experiment spec (see docs/config.md)");
  run->add_option("--preset", run_common.preset, "fig3 ... fig9; file keys apply on top");
  run->add_option("--trials", trials, "Monte Carlo trials per run")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Base seed");
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_flag("--no-sim", no_sim, "Analytic only");
  run->add_option("--mode", mode, "V2B geometry")->check(CLI::IsMember({"paper", "physical"}));

  Common dump_common;
  std::size_t row = 0;
  std::uint64_t trial = 0;
  std::string dump_out;
  auto* dump = app.add_subcommand("dump", "Write one network realization as JSON");
  dump->add_option("spec-file", dump_common.spec_file, "Experiment spec");
  dump->add_option("--preset", dump_common.preset, "fig3 ... fig9");
  dump->add_option("--row", row, "Sweep row")->capture_default_str();
  dump->add_option("--trial", trial, "Trial index")->capture_default_str();
  dump->add_option("--out", dump_out, "Output file (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(run_common, trials, seed, out_dir, no_sim, mode);
    return cmd_dump(dump_common, row, trial, dump_out);
  } catch (const exp::SpecError& e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return 2;
  } catch (const exp::WindowError& e) {
    std::cerr << "window error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
