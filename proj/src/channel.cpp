#include "perceptive/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace perceptive {

namespace {

double deg2rad(double d) { return d * M_PI / 180.0; }

void require_positive(double v, const char* name) {
  if (!(v > 0.0))
    throw std::domain_error(std::string(name) + " must be > 0");
}

}  // namespace

std::vector<std::complex<double>> steering_vector(double theta_deg, int n) {
  if (n < 1) throw std::domain_error("steering_vector: n must be >= 1");
  const double s = std::sin(deg2rad(theta_deg));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<std::complex<double>> a(n);
  for (int i = 0; i < n; ++i) {
    const double phase = M_PI * i * s;
    a[i] = scale * std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return a;
}

double beam_gain(double theta_true_deg, double theta_hat_deg, int n) {
  const auto at = steering_vector(theta_true_deg, n);
  const auto ah = steering_vector(theta_hat_deg, n);
  std::complex<double> acc = 0.0;
  for (int i = 0; i < n; ++i) acc += std::conj(at[i]) * ah[i];
  return std::abs(acc);
}

double radar_pathloss_var(double distance_m, double rcs_m2, double carrier_hz) {
  require_positive(distance_m, "distance_m");
  require_positive(rcs_m2, "rcs_m2");
  require_positive(carrier_hz, "carrier_hz");
  const double lambda = kSpeedOfLight / carrier_hz;
  const double four_pi_cubed = std::pow(4.0 * M_PI, 3);
  return rcs_m2 * lambda * lambda /
         (four_pi_cubed * distance_m * distance_m * distance_m * distance_m);
}

double comm_pathloss_db(double distance_m, double carrier_ghz) {
  require_positive(distance_m, "distance_m");
  require_positive(carrier_ghz, "carrier_ghz");
  return 32.4 + 20.0 * std::log10(distance_m) + 20.0 * std::log10(carrier_ghz);
}

double sensing_channel_gain(const ScenarioConfig& sc, int obj_index,
                            double distance_override) {
  const ObjectSpec& o = sc.objects.at(obj_index);
  if (!is_sensing_capable(o.role))
    throw std::domain_error("sensing_channel_gain: object is not sensing-capable");
  const double d = distance_override > 0 ? distance_override : o.distance_m;
  const double var_alpha = radar_pathloss_var(d, o.rcs_m2, sc.carrier_hz);
  const double kappa2 = sc.array.kappa2();
  const auto& e = sc.eps_for(obj_index);
  const double eps2 = e.eps * e.eps * e.eps_tilde * e.eps_tilde;
  return var_alpha * kappa2 * kappa2 * eps2 /
         (sc.array.n_rx * sc.radar_noise());
}

double comm_channel_gain(const ScenarioConfig& sc, int obj_index,
                         double distance_override) {
  const ObjectSpec& o = sc.objects.at(obj_index);
  if (!is_comm_capable(o.role))
    throw std::domain_error("comm_channel_gain: object is not comm-capable");
  const double d = distance_override > 0 ? distance_override : o.distance_m;
  const double pl_db = comm_pathloss_db(d, sc.carrier_hz / 1e9);
  return std::pow(10.0, -pl_db / 10.0) / sc.noise_psd_w_hz();
}

ChannelGains channel_gains(const ScenarioConfig& sc) {
  ChannelGains g;
  g.sensing.assign(sc.size(), 0.0);
  g.comm.assign(sc.size(), 0.0);
  for (int i = 0; i < sc.size(); ++i) {
    if (is_sensing_capable(sc.objects[i].role))
      g.sensing[i] = sensing_channel_gain(sc, i);
    if (is_comm_capable(sc.objects[i].role))
      g.comm[i] = comm_channel_gain(sc, i);
  }
  return g;
}

double sum_rate(const std::vector<double>& power_w,
                const std::vector<double>& bandwidth_hz,
                const ChannelGains& gains) {
  double rate = 0.0;
  for (size_t k = 0; k < gains.comm.size(); ++k) {
    if (gains.comm[k] <= 0.0) continue;
    const double p = power_w.at(k);
    const double b = bandwidth_hz.at(k);
    if (b <= 0.0) continue;  // b -> 0+ limit of b log2(1 + p s / b) is 0
    rate += b * std::log2(1.0 + p * gains.comm[k] / b);
  }
  return rate;
}

}  // namespace perceptive
