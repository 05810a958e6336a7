#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace perceptive {

enum class Role { SensingTarget, CommUser, IsacUser };

constexpr bool is_sensing_capable(Role r) {
  return r == Role::SensingTarget || r == Role::IsacUser;
}
constexpr bool is_comm_capable(Role r) {
  return r == Role::CommUser || r == Role::IsacUser;
}
const char* role_name(Role r);

// Thrown by validation with the offending field in the message.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ArrayConfig {
  int n_tx = 32;
  int n_rx = 32;
  int n_user_rx = 1;

  double kappa2() const { return static_cast<double>(n_tx) * n_rx; }
  double kappa_tilde2() const { return static_cast<double>(n_tx) * n_user_rx; }
  bool operator==(const ArrayConfig&) const = default;
};

// Initial kinematic state for tracked objects, Cartesian [x, y, vx, vy].
struct MotionInit {
  double x_m = 0.0;
  double y_m = 0.0;
  double vx_mps = 0.0;
  double vy_mps = 0.0;
  double process_noise = 0.0;  // sigma-tilde intensity of the CV model
  bool operator==(const MotionInit&) const = default;
};

struct ObjectSpec {
  Role role = Role::SensingTarget;
  double distance_m = 0.0;
  double angle_deg = 0.0;
  double rcs_m2 = 0.0;      // sensing-capable roles only
  double importance = 1.0;  // gamma weight used by proportional constraints
  std::optional<MotionInit> motion;
  bool operator==(const ObjectSpec&) const = default;
};

// Beamforming gain factors (eps, eps~) for one sensing-capable object.
struct BeamGainEps {
  double eps = 1.0;
  double eps_tilde = 1.0;
  bool operator==(const BeamGainEps&) const = default;
};

struct ScenarioConfig {
  ArrayConfig array;
  double carrier_hz = 30e9;
  double noise_psd_dbm_hz = -162.0;
  double p_total_w = 40.0;
  double b_total_hz = 100e6;
  std::array<double, 2> p_box{4.0, 32.0};
  std::array<double, 2> b_box{10e6, 80e6};
  // Ordered: sensing targets, then ISAC users, then communication users.
  std::vector<ObjectSpec> objects;
  // One entry per sensing-capable object, in object order.
  std::vector<BeamGainEps> beam_gain_eps;
  // Post-matched-filter radar noise power; defaults to sigma0 * b_total.
  std::optional<double> radar_noise_w;

  int size() const { return static_cast<int>(objects.size()); }
  double noise_psd_w_hz() const;
  double radar_noise() const;
  std::vector<int> sensing_indices() const;
  std::vector<int> comm_indices() const;
  // eps entry for object index (must be sensing-capable)
  const BeamGainEps& eps_for(int obj_index) const;
  // gamma vector over sensing-capable objects, in order
  std::vector<double> sensing_gammas() const;

  // Throws ScenarioError naming the offending field.
  void validate() const;
  bool operator==(const ScenarioConfig&) const = default;
};

// Normalized channel gains, full-length vectors indexed by object; entries for
// roles without the capability are zero.
struct ChannelGains {
  std::vector<double> sensing;  // varsigma_q, 1/W
  std::vector<double> comm;     // varsigma_k^c, Hz/W
};

struct Allocation {
  std::vector<double> power_w;
  std::vector<double> bandwidth_hz;
};

}  // namespace perceptive
