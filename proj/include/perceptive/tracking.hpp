#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "perceptive/estimation.hpp"
#include "perceptive/scenario.hpp"

namespace perceptive {

// Kinematic state [x, y, vx, vy].
struct MotionState {
  double x_m = 0, y_m = 0, vx_mps = 0, vy_mps = 0;

  Eigen::Vector4d vec() const { return {x_m, y_m, vx_mps, vy_mps}; }
  static MotionState from(const Eigen::Vector4d& v) {
    return {v(0), v(1), v(2), v(3)};
  }
  static MotionState from(const MotionInit& mi) {
    return {mi.x_m, mi.y_m, mi.vx_mps, mi.vy_mps};
  }
};

struct StateModel {
  double t_s = 0.02;        // sample interval
  double sigma_tilde = 0.0; // process noise intensity
};

// Constant-velocity transition matrix [[1, T], [0, 1]] (x) I2.
Eigen::Matrix4d transition_matrix(double t_s);
MotionState state_transition(const MotionState& xi, const StateModel& model);

// Process noise covariance [[T^3/3, T^2/2], [T^2/2, T]] (x) sigma~ I2.
Eigen::Matrix4d process_noise_cov(const StateModel& model);

struct PolarMeasurement {
  double range_m = 0, range_rate_mps = 0, angle_rad = 0;
  Eigen::Vector3d vec() const { return {range_m, range_rate_mps, angle_rad}; }
};

// Cartesian -> polar measurement h(xi) = (d, v, theta); throws on the origin.
PolarMeasurement measure(const MotionState& xi);
Eigen::Matrix<double, 3, 4> measurement_jacobian(const MotionState& xi);

// diag(CRB(d), CRB(v), CRB(theta)) as a function of the allocated resources.
Eigen::Matrix3d measurement_cov(double p_w, double b_hz, double gain,
                                const CrbModel& model);

// Posterior Fisher information and the state it was linearized at.
struct FisherState {
  Eigen::Matrix4d j = Eigen::Matrix4d::Identity();
  MotionState predicted_state;
};

// Prior-information FIM (Phi + F J^-1 F^T)^-1.
Eigen::Matrix4d prior_fim(const Eigen::Matrix4d& j_prev,
                          const StateModel& model);

// Prediction-only recursion (no measurement; the p -> 0 limit).
FisherState fim_predict_only(const FisherState& prev, const StateModel& model);

// Full recursion: prior FIM plus the data FIM H^T Psi^-1 H evaluated at the
// propagated predicted state.
FisherState fim_recursion(const FisherState& prev, const StateModel& model,
                          const CrbModel& crb, double p_w, double b_hz,
                          double gain);

struct PcrbTrace {
  double value = 0.0;
  bool ill_conditioned = false;  // cond(J) > 1e12
};
PcrbTrace pcrb_trace(const FisherState& fs);

// trace((E + p V)^-1) = sum_i 1/(a_i + b_i p), from the eigendecomposition of
// E^-1/2 V E^-1/2. Requires E SPD and V PSD; a_i > 0, b_i >= 0.
struct PcrbScalarization {
  std::array<double, 4> a{}, b{};
  double eval(double p) const {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += 1.0 / (a[i] + b[i] * p);
    return s;
  }
};
PcrbScalarization scalarize_pcrb(const Eigen::Matrix4d& e,
                                 const Eigen::Matrix4d& v);

// ---- Per-epoch resource allocation ----------------------------------------

// Inputs for one tracked object at the current epoch.
struct TrackedTarget {
  int object_index = 0;        // position in the scenario object list
  Eigen::Matrix4d prior;       // E_q = (Phi + F J^-1 F^T)^-1
  MotionState predicted;
  double sensing_gain = 0.0;   // at the predicted range
};

struct TrackingAllocation {
  Allocation alloc;
  bool feasible = false;
  int ao_iters = 0;
  double objective = 0.0;  // sum (or max) of PCRB traces at the allocation
  std::string message;
};

// Joint power/bandwidth allocation minimizing the summed (comprehensiveness)
// or worst (fairness) PCRB trace under the sum-rate threshold. Proportional
// trace constraints, when gamma is non-empty, are first-order Taylor
// linearized at prev. On infeasibility the caller keeps `prev`.
TrackingAllocation allocate_tracking(const std::vector<TrackedTarget>& targets,
                                     const ScenarioConfig& sc,
                                     const CrbModel& model, double gamma_c,
                                     const std::vector<double>& gamma,
                                     const Allocation& prev,
                                     Criterion criterion,
                                     const ChannelGains& gains);

// ---- EKF -------------------------------------------------------------------

struct EkfUpdate {
  MotionState predicted, filtered;
  Eigen::Matrix4d mse_pred, mse;
};

// One extended Kalman cycle: predict, gain, innovation (angle wrapped to
// (-pi, pi]), state and MSE update. psi is evaluated at the predicted state.
EkfUpdate ekf_epoch(const MotionState& estimate, const Eigen::Matrix4d& mse,
                    const StateModel& model, const Eigen::Matrix3d& psi,
                    const PolarMeasurement& y);

// ---- Closed tracking loop ---------------------------------------------------

struct TrackRunConfig {
  double horizon_s = 5.0;
  double dt_s = 0.02;
  int trials = 500;
  double gamma_c_bps_hz = 7.6;
  std::uint64_t seed = 1;
  Criterion criterion = Criterion::Comprehensive;
  std::vector<double> gamma;  // empty: no proportional constraints
  int max_threads = 0;        // 0: PERCEPTIVE_RA_THREADS or hardware
};

struct EpochTargetStats {
  int epoch = 0;
  int object_index = 0;
  double true_x = 0, true_y = 0;    // trial 0 trajectory
  double est_x = 0, est_y = 0;
  double mean_power_w = 0;
  double mean_bandwidth_hz = 0;
  double mean_pcrb_trace = 0;       // full-state
  double mean_pcrb_pos_trace = 0;   // position sub-block
  double mean_sq_err = 0;           // squared position error
  double mean_comm_gain = 0;        // 0 for sensing-only objects
  int infeasible_trials = 0;
};

struct TrackRecord {
  int epochs = 0;
  std::vector<int> target_objects;           // tracked object indices
  std::vector<EpochTargetStats> stats;       // epoch-major, then target
  std::vector<double> mse_samples;           // per trial x epoch x target
  std::vector<double> best_comm_only_gain;   // per epoch (static users)
  const EpochTargetStats& at(int epoch, int target) const {
    return stats[epoch * target_objects.size() + target];
  }
};

// Full closed loop: propagate truth, predict, allocate, synthesize a noisy
// measurement from the true state, EKF-update, log. Deterministic per seed
// and independent of the trial schedule.
TrackRecord run_tracking(const ScenarioConfig& sc, const CrbModel& model,
                         const TrackRunConfig& cfg);

}  // namespace perceptive
