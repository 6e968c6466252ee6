#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace v2x {

/// Association bias B applied to the V2V link quality proxy.
///
/// B = 0 means the V2V link is never chosen; the unbounded value means it is
/// always chosen. The unbounded case is a distinct state rather than a huge
/// double so that B^{1/alpha} and friends never see an infinity.
class Bias {
 public:
  constexpr Bias() = default;
  constexpr explicit Bias(double value) : value_(value) {}

  static constexpr Bias unbounded() {
    Bias b;
    b.unbounded_ = true;
    b.value_ = std::numeric_limits<double>::infinity();
    return b;
  }

  constexpr bool is_unbounded() const { return unbounded_; }
  constexpr bool is_zero() const { return !unbounded_ && value_ == 0.0; }
  /// Finite value; +inf when unbounded.
  constexpr double value() const { return value_; }

  friend constexpr bool operator==(const Bias&, const Bias&) = default;

 private:
  double value_ = 1.0;
  bool unbounded_ = false;
};

/// Flexible link selection: V2V iff B r_v^{-alpha_v} >= r_b^{-alpha_b}.
inline bool selects_v2v(Bias bias, double r_v, double r_b, double alpha_v, double alpha_b) {
  if (bias.is_unbounded()) return true;
  if (bias.is_zero()) return false;
  return bias.value() * std::pow(r_v, -alpha_v) >= std::pow(r_b, -alpha_b);
}

/// Everything the analytic model and the simulator consume. Linear units:
/// distances in Km, powers in mW, lambda_R in 1/Km, mu_v in 1/Km,
/// lambda_b in 1/Km^2.
struct NetworkParams {
  double lambda_R = 0.005;
  double mu_v = 0.005;
  double lambda_b = 2e-5;
  Bias bias_B{1.0};
  double P_v = 1000.0;      // 30 dBm
  double alpha_v = 4.0;
  double alpha_b = 4.0;
  double sigma2 = 3.981071705534973e-11;  // -174 dBm/Hz over 10 MHz = -104 dBm
  double p_tx = 1.0;
  double z = 1.0;           // 0 dB

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const {
    auto fail = [](const std::string& field, const std::string& rule) {
      throw std::invalid_argument("NetworkParams." + field + " " + rule);
    };
    if (!(lambda_R > 0.0) || !std::isfinite(lambda_R)) fail("lambda_R", "must be > 0");
    if (!(mu_v > 0.0) || !std::isfinite(mu_v)) fail("mu_v", "must be > 0");
    if (!(lambda_b > 0.0) || !std::isfinite(lambda_b)) fail("lambda_b", "must be > 0");
    if (!bias_B.is_unbounded() && !(bias_B.value() >= 0.0 && std::isfinite(bias_B.value())))
      fail("bias_B", "must be >= 0 (or unbounded)");
    if (!(P_v > 0.0) || !std::isfinite(P_v)) fail("P_v", "must be > 0");
    if (!(alpha_v > 1.0) || !std::isfinite(alpha_v)) fail("alpha_v", "must be > 1");
    if (!(alpha_b > 1.0) || !std::isfinite(alpha_b)) fail("alpha_b", "must be > 1");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) fail("sigma2", "must be > 0");
    if (!(p_tx >= 0.0 && p_tx <= 1.0)) fail("p_tx", "must lie in [0, 1]");
    if (!(z >= 0.0)) fail("z", "must be >= 0");
  }
};

}  // namespace v2x
