#pragma once

#include <string>
#include <vector>

#include "perceptive/scenario.hpp"

namespace perceptive {

enum class Waveform { FilteredRect, Lfm };
enum class Criterion { Fairness, Comprehensive };

// Scale constants of the generalized estimation CRBs:
//   CRB(d)     = beta1 / (p * gain * b)
//   CRB(theta) = beta2 / (p * gain)
//   CRB(v)     = beta3 / (p * gain)
// with `gain` the normalized sensing channel power gain. omega_tau/omega_theta
// are the unit-normalization weights of the localization objective.
struct CrbModel {
  double beta1 = 0.0;   // m^2 W Hz
  double beta2 = 0.0;   // rad^2 W
  double beta3 = 0.0;   // m^2/s^2 W
  double omega_tau = 1.0;
  double omega_theta = 1.0;
  double t_pulse_s = 1e-5;
  double t_effective_s = 1e-3;

  // beta1 from the classical delay bound with the filtered-rectangular
  // effective bandwidth folded in; beta2 so CRB(theta) is O(1e-4 rad^2) at the
  // reference point; beta3 from a Doppler-duration surrogate; omegas equalize
  // the two reciprocal-CRB terms at d = 90 m under an equal resource split.
  static CrbModel defaults_for(const ScenarioConfig& sc);
};

// Squared effective (rms) bandwidth of the waveform family.
double effective_bandwidth_sq(double b_hz, double t_pulse_s, Waveform w);

double crb_range(double p_w, double b_hz, double gain, const CrbModel& m);
double crb_angle(double p_w, double gain, const CrbModel& m);

// rho_q = omega_tau / CRB(d) + omega_theta / CRB(theta); bilinear in (p, b).
double localization_objective(double p_w, double b_hz, double gain,
                              const CrbModel& m);

// ---- SBP trade-off -------------------------------------------------------

struct SbpConfig {
  std::vector<double> angles_deg;
  int n_tx = 32;
  int n_rx = 32;
  double sigma_eff2 = 1.0;  // equivalent noise power
  double b_total_hz = 100e6;
  double b_share_hz = 100e6 / 3.0;
};

// SBP_total / SBP_orth for the reference object, first-order inter-beam
// interference factors from the steering vectors (i != ref excluded).
double sbp_ratio(const SbpConfig& cfg, int ref_index);

// ---- Joint power/bandwidth allocation -------------------------------------

struct SeedResult {
  Allocation alloc;
  double sum_rate_bps = 0.0;
  double spectral_efficiency = 0.0;  // sum rate / B_total
  bool feasible = false;
  std::string message;
};

// Initialization of the joint allocation: uniform bandwidth, rate-maximizing
// power under budget/box/proportional constraints, then rate-maximizing
// bandwidth. Empty gamma disables the proportional ties.
SeedResult initial_bandwidth(const ScenarioConfig& sc, const CrbModel& model,
                             const std::vector<double>& gamma);

struct TargetCrbReport {
  int object_index = 0;
  double crb_range_m2 = 0.0;
  double crb_angle_rad2 = 0.0;
  double rho = 0.0;
};

struct LocalizationResult {
  Allocation alloc;
  std::vector<TargetCrbReport> targets;
  bool feasible = false;
  int ao_iters = 0;
  std::vector<double> objective_trace;
  double achieved_rate_bps = 0.0;
  double seed_rate_bps = 0.0;
  std::string message;
};

// Alternating power/bandwidth optimization of the localization QoS under the
// sum-rate threshold. Proportional resource control uses the degenerate form
// gamma_q * p_q * b_q equal across sensing-capable objects, so an object with
// a smaller gamma receives proportionally more resources.
LocalizationResult allocate_joint_localization(const ScenarioConfig& sc,
                                               const CrbModel& model,
                                               double gamma_c_bps_hz,
                                               const std::vector<double>& gamma,
                                               Criterion criterion);

// Largest spectral efficiency attainable with the uniform bandwidth split
// (step 2 of the initialization); the uniform-init feasibility boundary.
double uniform_bandwidth_rate_ceiling(const ScenarioConfig& sc,
                                      const std::vector<double>& gamma);

}  // namespace perceptive
