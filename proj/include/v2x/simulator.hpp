#pragma once

// Monte Carlo engine: Palm-conditioned network realizations, Rayleigh-faded
// SINR at the typical receiver, link selection and empirical estimates of
// the analytic quantities.

#include <cstdint>
#include <string>
#include <vector>

#include "v2x/network_params.hpp"
#include "v2x/pointprocess.hpp"

namespace v2x::sim {

/// Geometry of the V2B link.
/// paper_faithful: receiver at the origin, interferers beyond r_b.
/// physical: receiver at the serving base station, every transmitting
/// vehicle interferes.
enum class V2bGeometry { paper_faithful, physical };

enum class LinkMode { v2v, v2b };

enum class CiMethod { normal, exact };

struct SimConfig {
  NetworkParams params;
  double window_radius = 500.0;
  std::uint64_t trials = 100000;
  RngSeed seed{42};
  V2bGeometry mode = V2bGeometry::paper_faithful;
  double ci_level = 0.95;
  CiMethod ci_method = CiMethod::normal;
  /// 0 picks the default worker count (see worker_count()).
  unsigned workers = 0;

  void validate() const;
};

struct TrialOutcome {
  double r_v = 0.0;
  double r_b = 0.0;
  LinkMode mode_selected = LinkMode::v2v;
  /// SINR of the selected link.
  double sinr = 0.0;
  /// sinr > params.z
  bool success = false;
  /// Interference of the selected link: receiver's road and all other roads (mW).
  double I_r = 0.0;
  double I_v = 0.0;
  /// SINR had each link been forced, same realization and fading.
  double sinr_v2v = 0.0;
  double sinr_v2b = 0.0;
  /// Degenerate realizations discarded before this one.
  std::uint64_t resamples = 0;
};

struct Estimate {
  double mean = 0.0;
  double ci_halfwidth = 0.0;
  std::uint64_t n = 0;
};

struct SuccessEstimates {
  double z = 0.0;
  Estimate v2x;          ///< success under flexible selection
  Estimate v2v_success;  ///< success and V2V selected
  Estimate v2b_success;  ///< success and V2B selected
  Estimate v2v_only;     ///< success with V2V forced
  Estimate assoc_v2v;
  Estimate assoc_v2b;
};

struct SuccessRun {
  std::vector<SuccessEstimates> per_z;
  std::uint64_t degenerate_resamples = 0;
  std::vector<std::string> warnings;
};

struct LaplaceEstimate {
  Estimate other_roads;     ///< E[exp(-s I_v)]
  Estimate receiver_road;   ///< E[exp(-s I_r)]
  Estimate total;           ///< E[exp(-s (I_v + I_r))]
};

/// Result of the startup check on the simulation window.
struct WindowCheck {
  double r_ref = 0.0;                 ///< median V2V distance
  double tail_fraction = 0.0;         ///< mean interference share beyond the window
  double bs_void_probability = 0.0;   ///< Pr(no base station in the window)
  double recommended_radius = 0.0;
  bool ok = false;
  std::string message;
};

inline constexpr double kTailLimit = 1e-3;
inline constexpr double kBsVoidLimit = 1e-4;

/// Checks the window against the interference tail and base-station void
/// limits and suggests the smallest compliant radius (at least 500 Km).
WindowCheck check_window(const NetworkParams& p, double window_radius);

/// Worker threads: V2X_THREADS if set and positive, else the hardware count.
unsigned worker_count();

/// Unit-mean exponential fading: one gain per vehicle (indexed like
/// NetworkRealization::vehicles) and one for the uplink to the base station.
struct FadingGains {
  std::vector<std::vector<double>> vehicle;
  double uplink = 1.0;
};

/// Selection, SINR and interference for a given realization and fading.
/// Throws DegenerateRealization when the realization has no transmitting
/// vehicle or no base station.
TrialOutcome evaluate_trial(const SimConfig& config, const NetworkRealization& net, const FadingGains& fading);

/// One trial on the given stream. Degenerate realizations are resampled
/// from the same stream.
TrialOutcome run_trial(const SimConfig& config, RngStream& rng);
/// One trial on the stream derived from (config.seed, trial_index).
TrialOutcome run_trial(const SimConfig& config, std::uint64_t trial_index);

/// Success and association fractions for every threshold in z_values from
/// one set of trials (the SINR does not depend on z).
SuccessRun estimate_success(const SimConfig& config, const std::vector<double>& z_values);

/// Empirical Pr(r_v <= radius). Trials with no transmitting vehicle in the
/// window count as r_v = infinity; base stations play no part.
std::vector<Estimate> estimate_distance_cdf(const SimConfig& config, const std::vector<double>& radii);

/// Empirical Laplace functional of the interference at the origin with every
/// transmitter inside B(0, r) removed, path loss alpha_v.
LaplaceEstimate estimate_laplace_functional(const SimConfig& config, double s, double r);

/// Normal-approximation or Clopper-Pearson half-width for a proportion.
Estimate proportion_estimate(std::uint64_t hits, std::uint64_t n, double ci_level, CiMethod method);

}  // namespace v2x::sim
