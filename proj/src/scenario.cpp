#include "perceptive/scenario.hpp"

#include <cmath>

namespace perceptive {

const char* role_name(Role r) {
  switch (r) {
    case Role::SensingTarget: return "sensing_target";
    case Role::CommUser: return "comm_user";
    case Role::IsacUser: return "isac_user";
  }
  return "?";
}

double ScenarioConfig::noise_psd_w_hz() const {
  return std::pow(10.0, (noise_psd_dbm_hz - 30.0) / 10.0);
}

double ScenarioConfig::radar_noise() const {
  return radar_noise_w ? *radar_noise_w : noise_psd_w_hz() * b_total_hz;
}

std::vector<int> ScenarioConfig::sensing_indices() const {
  std::vector<int> idx;
  for (int i = 0; i < size(); ++i)
    if (is_sensing_capable(objects[i].role)) idx.push_back(i);
  return idx;
}

std::vector<int> ScenarioConfig::comm_indices() const {
  std::vector<int> idx;
  for (int i = 0; i < size(); ++i)
    if (is_comm_capable(objects[i].role)) idx.push_back(i);
  return idx;
}

const BeamGainEps& ScenarioConfig::eps_for(int obj_index) const {
  int k = 0;
  for (int i = 0; i < obj_index; ++i)
    if (is_sensing_capable(objects[i].role)) ++k;
  return beam_gain_eps.at(k);
}

std::vector<double> ScenarioConfig::sensing_gammas() const {
  std::vector<double> g;
  for (const auto& o : objects)
    if (is_sensing_capable(o.role)) g.push_back(o.importance);
  return g;
}

namespace {

int role_rank(Role r) {
  switch (r) {
    case Role::SensingTarget: return 0;
    case Role::IsacUser: return 1;
    case Role::CommUser: return 2;
  }
  return 3;
}

void check_box(const char* name, const std::array<double, 2>& box, double total,
               int m) {
  if (!(box[0] > 0.0) || !(box[0] < box[1]))
    throw ScenarioError(name, "bounds must satisfy 0 < min < max");
  if (box[0] * m > total + 1e-9 * total)
    throw ScenarioError(
        name, "box-simplex infeasible: min * M exceeds the total budget");
  if (box[1] * m < total - 1e-9 * total)
    throw ScenarioError(
        name, "box-simplex infeasible: max * M is below the total budget");
}

}  // namespace

void ScenarioConfig::validate() const {
  if (array.n_tx < 1) throw ScenarioError("array.n_tx", "must be >= 1");
  if (array.n_rx < 1) throw ScenarioError("array.n_rx", "must be >= 1");
  if (array.n_user_rx < 1) throw ScenarioError("array.n_user_rx", "must be >= 1");
  if (!(carrier_hz > 0)) throw ScenarioError("carrier_hz", "must be > 0");
  if (!std::isfinite(noise_psd_dbm_hz))
    throw ScenarioError("noise_psd_dbm_hz", "must be finite");
  if (!(p_total_w > 0)) throw ScenarioError("p_total_w", "must be > 0");
  if (!(b_total_hz > 0)) throw ScenarioError("b_total_hz", "must be > 0");
  if (objects.empty()) throw ScenarioError("objects", "must not be empty");

  const int m = size();
  check_box("p_box", p_box, p_total_w, m);
  check_box("b_box", b_box, b_total_hz, m);

  int prev_rank = 0;
  int n_sensing = 0;
  for (int i = 0; i < m; ++i) {
    const auto& o = objects[i];
    const std::string tag = "objects[" + std::to_string(i) + "]";
    const int rank = role_rank(o.role);
    if (rank < prev_rank)
      throw ScenarioError(tag + ".role",
                          "objects must be ordered sensing targets, then ISAC "
                          "users, then communication users");
    prev_rank = rank;
    if (!(o.distance_m > 0))
      throw ScenarioError(tag + ".distance_m", "must be > 0");
    if (!(o.angle_deg > -180.0) || !(o.angle_deg <= 180.0))
      throw ScenarioError(tag + ".angle_deg", "must lie in (-180, 180]");
    if (!(o.importance > 0))
      throw ScenarioError(tag + ".importance", "must be > 0");
    if (is_sensing_capable(o.role)) {
      ++n_sensing;
      if (!(o.rcs_m2 > 0))
        throw ScenarioError(tag + ".rcs_m2",
                            "sensing-capable objects need rcs_m2 > 0");
    }
    if (o.motion) {
      const double d = std::hypot(o.motion->x_m, o.motion->y_m);
      if (!(d > 0))
        throw ScenarioError(tag + ".motion", "initial position must not be the origin");
      if (std::abs(d - o.distance_m) > 1e-3 * std::max(1.0, d))
        throw ScenarioError(tag + ".distance_m",
                            "inconsistent with motion initial position");
      if (o.motion->process_noise < 0)
        throw ScenarioError(tag + ".motion.process_noise", "must be >= 0");
    }
  }
  if (static_cast<int>(beam_gain_eps.size()) != n_sensing)
    throw ScenarioError("beam_gain_eps",
                        "needs one entry per sensing-capable object (" +
                            std::to_string(n_sensing) + ")");
  for (size_t k = 0; k < beam_gain_eps.size(); ++k) {
    const auto& e = beam_gain_eps[k];
    if (e.eps < 0 || e.eps > 1 || e.eps_tilde < 0 || e.eps_tilde > 1)
      throw ScenarioError("beam_gain_eps[" + std::to_string(k) + "]",
                          "factors must lie in [0, 1]");
  }
  if (radar_noise_w && !(*radar_noise_w > 0))
    throw ScenarioError("radar_noise_w", "must be > 0 when given");
}

}  // namespace perceptive
