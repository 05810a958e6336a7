#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perceptive/scenario.hpp"

namespace perceptive {

// CDF of the central chi-squared distribution with two degrees of freedom.
double chi2_cdf_2dof(double x);

// Decision threshold delta meeting the desired false alarm rate:
// delta = (N_r sigma_r^2 / 2) * F^{-1}(1 - P_FA) = -N_r sigma_r^2 ln(P_FA).
double detection_threshold(double p_fa, int n_rx, double sigma_r2);

// Closed-form detection probability, P_D = P_FA^(1/(1+rho)) with rho = p*gain.
double prob_detection(double rho, double p_fa);

struct DetectionSim {
  double pd_empirical = 0.0;
  double pfa_empirical = 0.0;
  long trials = 0;
  std::uint64_t seed = 0;
};

// Monte Carlo of the matched-filter energy detector. The signal amplitude is
// a standardized complex normal with variance rho = p * gain against
// unit-variance noise, mirroring the analytic parameterization.
DetectionSim simulate_detection(double power_w, double gain, double p_fa,
                                long trials, std::uint64_t seed);

struct DetectionSetup {
  double p_fa = 1e-6;
  int n_rx = 32;
  double sigma_r2 = 0.0;
  ChannelGains gains;
  std::vector<double> gamma;  // per sensing-capable object

  static DetectionSetup from_scenario(const ScenarioConfig& sc, double p_fa);
};

struct DetectionReport {
  Allocation allocation;
  std::vector<int> sensing_objects;   // object indices of the entries below
  std::vector<double> rho;            // rho_q = p_q * varsigma_q
  std::vector<double> pd_analytic;
  std::optional<std::vector<DetectionSim>> pd_empirical;
  bool feasible = false;
  bool phase1_failure = false;  // infeasible model vs. solver non-convergence
  double min_rho = 0.0;
  double sum_rho = 0.0;
  double achieved_rate_bps = 0.0;
  double kkt_residual = 0.0;
  std::string message;
};

// Max-min detection power allocation: maximize min_q rho_q subject to the
// power budget, the sum-rate threshold and the per-beam power box. Bandwidth
// stays at the scenario's per-object default (uniform split).
DetectionReport allocate_power_fairness(const ScenarioConfig& sc,
                                        const DetectionSetup& setup,
                                        double gamma_c_bps_hz);

// Sum-rho allocation with proportional constraints
// rho_1 : ... : rho_Ms = gamma_1 : ... : gamma_Ms.
DetectionReport allocate_power_comprehensive(const ScenarioConfig& sc,
                                             const DetectionSetup& setup,
                                             double gamma_c_bps_hz);

}  // namespace perceptive
