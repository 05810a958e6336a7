#pragma once

#include <complex>
#include <vector>

#include "perceptive/scenario.hpp"

namespace perceptive {

inline constexpr double kSpeedOfLight = 299792458.0;

// Unit-norm ULA steering vector, half-wavelength spacing.
std::vector<std::complex<double>> steering_vector(double theta_deg, int n);

// |a^H(theta_true) a(theta_hat)| in [0, 1].
double beam_gain(double theta_true_deg, double theta_hat_deg, int n);

// Reflection-coefficient variance from the radar equation:
// sigma_alpha^2 = rcs * lambda^2 / ((4 pi)^3 d^4).
double radar_pathloss_var(double distance_m, double rcs_m2, double carrier_hz);

// 32.4 + 20 log10(d_m) + 20 log10(f_GHz)  [dB]
double comm_pathloss_db(double distance_m, double carrier_ghz);

// Normalized sensing channel gain varsigma_q =
// sigma_alpha^2 kappa^4 eps^2 eps~^2 / (N_r sigma_r^2).
// distance_override < 0 uses the object's configured distance.
double sensing_channel_gain(const ScenarioConfig& sc, int obj_index,
                            double distance_override = -1.0);

// Communication channel gain normalized by the noise PSD. The transmit and
// receive beamforming chain is folded into the path-loss figure (perfect
// beamforming, unit gain factors), so varsigma_k^c = 10^(-PL/10) / sigma0.
double comm_channel_gain(const ScenarioConfig& sc, int obj_index,
                         double distance_override = -1.0);

// Gains for every object in the scenario at its configured distance.
ChannelGains channel_gains(const ScenarioConfig& sc);

// Achievable sum-rate over the comm-capable entries of `gains` [bps].
double sum_rate(const std::vector<double>& power_w,
                const std::vector<double>& bandwidth_hz,
                const ChannelGains& gains);

}  // namespace perceptive
