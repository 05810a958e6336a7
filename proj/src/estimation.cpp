#include "perceptive/estimation.hpp"

#include <cmath>
#include <stdexcept>

#include "perceptive/channel.hpp"
#include "perceptive/optim.hpp"

namespace perceptive {

double effective_bandwidth_sq(double b_hz, double t_pulse_s, Waveform w) {
  if (!(b_hz > 0) || !(t_pulse_s > 0))
    throw std::domain_error("effective_bandwidth_sq: inputs must be > 0");
  switch (w) {
    case Waveform::FilteredRect:
      return b_hz / (2.0 * M_PI * M_PI * t_pulse_s);
    case Waveform::Lfm:
      return b_hz * b_hz / 6.0;
  }
  return 0.0;
}

CrbModel CrbModel::defaults_for(const ScenarioConfig& sc) {
  CrbModel m;
  m.t_pulse_s = 1e-5;
  m.t_effective_s = 1e-3;
  // Classical delay bound var(d) = c^2 / (8 pi^2 B_rms^2 SNR) with the
  // filtered-rect B_rms^2 = B/(2 pi^2 T_p) folded in: beta1 = c^2 T_p / 4.
  m.beta1 = kSpeedOfLight * kSpeedOfLight * m.t_pulse_s / 4.0;
  m.beta2 = 2e-4;
  const double lambda = kSpeedOfLight / sc.carrier_hz;
  m.beta3 = lambda * lambda /
            (32.0 * M_PI * M_PI * m.t_effective_s * m.t_effective_s);

  // Equalize the two objective terms at the reference point: d = 90 m,
  // eps = eps~ = 0.5, equal split of power and bandwidth.
  const double p_ref = sc.p_total_w / std::max(1, sc.size());
  const double b_ref = sc.b_total_hz / std::max(1, sc.size());
  const double var_alpha = radar_pathloss_var(90.0, 1.0, sc.carrier_hz);
  const double kappa2 = sc.array.kappa2();
  const double gain_ref = var_alpha * kappa2 * kappa2 * 0.0625 /
                          (sc.array.n_rx * sc.radar_noise());
  const double inv_crb_d = p_ref * gain_ref * b_ref / m.beta1;
  const double inv_crb_th = p_ref * gain_ref / m.beta2;
  m.omega_tau = 0.5 / inv_crb_d;
  m.omega_theta = 0.5 / inv_crb_th;
  return m;
}

double crb_range(double p_w, double b_hz, double gain, const CrbModel& m) {
  const double denom = p_w * gain * b_hz;
  if (!(denom > 0)) return std::numeric_limits<double>::infinity();
  return m.beta1 / denom;
}

double crb_angle(double p_w, double gain, const CrbModel& m) {
  const double denom = p_w * gain;
  if (!(denom > 0)) return std::numeric_limits<double>::infinity();
  return m.beta2 / denom;
}

double localization_objective(double p_w, double b_hz, double gain,
                              const CrbModel& m) {
  return m.omega_tau * p_w * gain * b_hz / m.beta1 +
         m.omega_theta * p_w * gain / m.beta2;
}

double sbp_ratio(const SbpConfig& cfg, int ref_index) {
  const int n = static_cast<int>(cfg.angles_deg.size());
  if (n < 1 || ref_index < 0 || ref_index >= n)
    throw std::domain_error("sbp_ratio: invalid reference index");
  const double theta_q = cfg.angles_deg[ref_index];
  double interference = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == ref_index) continue;
    interference += beam_gain(theta_q, cfg.angles_deg[i], cfg.n_tx);
    interference += beam_gain(theta_q, cfg.angles_deg[i], cfg.n_rx);
  }
  const double kappa2 = static_cast<double>(cfg.n_tx) * cfg.n_rx;
  const double front =
      cfg.sigma_eff2 / (kappa2 * interference + cfg.sigma_eff2);
  return front * cfg.b_total_hz / cfg.b_share_hz;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct LocContext {
  const ScenarioConfig* sc;
  ChannelGains gains;
  std::vector<int> sensing, comm;
  std::vector<double> gamma;       // empty disables proportional ties
  std::vector<double> c1, c2;      // per sensing entry: rho = c1 p b + c2 p
  double rho_scale = 1.0;
  double rate_target = 0.0;        // gamma_c * b_total; <= 0 disables
};

LocContext make_context(const ScenarioConfig& sc, const CrbModel& model,
                        double gamma_c, const std::vector<double>& gamma) {
  LocContext ctx;
  ctx.sc = &sc;
  ctx.gains = channel_gains(sc);
  ctx.sensing = sc.sensing_indices();
  ctx.comm = sc.comm_indices();
  ctx.gamma = gamma;
  if (!gamma.empty() && gamma.size() != ctx.sensing.size())
    throw std::invalid_argument("gamma size must match sensing-capable count");
  const int m = sc.size();
  double scale = 0.0;
  for (int q : ctx.sensing) {
    const double g = ctx.gains.sensing[q];
    ctx.c1.push_back(model.omega_tau * g / model.beta1);
    ctx.c2.push_back(model.omega_theta * g / model.beta2);
    scale += localization_objective(sc.p_total_w / m, sc.b_total_hz / m, g,
                                    model);
  }
  ctx.rho_scale = scale > 0 ? scale : 1.0;
  ctx.rate_target = gamma_c * sc.b_total_hz;
  return ctx;
}

double rho_scaled(const LocContext& ctx, size_t k, double p, double b) {
  return (ctx.c1[k] * p * b + ctx.c2[k] * p) / ctx.rho_scale;
}

double objective_value(const LocContext& ctx, Criterion crit,
                       const VectorXd& x, const VectorXd& z) {
  double sum = 0.0, mn = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < ctx.sensing.size(); ++k) {
    const int q = ctx.sensing[k];
    const double r = rho_scaled(ctx, k, x(q) * ctx.sc->p_total_w,
                                z(q) * ctx.sc->b_total_hz);
    sum += r;
    mn = std::min(mn, r);
  }
  return crit == Criterion::Comprehensive ? sum : mn;
}

// R as a function of the normalized active block, other block fixed.
ScalarField rate_field(const LocContext& ctx, bool over_power,
                       const VectorXd& fixed, double denom) {
  const double p_total = ctx.sc->p_total_w;
  const double b_total = ctx.sc->b_total_hz;
  auto comm = ctx.comm;
  std::vector<double> g(comm.size());
  for (size_t k = 0; k < comm.size(); ++k) g[k] = ctx.gains.comm[comm[k]];
  return [comm, g, fixed, over_power, p_total, b_total, denom](
             const VectorXd& v, VectorXd* gr, MatrixXd* he) {
    if (gr) gr->setZero();
    if (he) he->setZero();
    double rate = 0.0;
    constexpr double ln2 = M_LN2;
    for (size_t k = 0; k < comm.size(); ++k) {
      const int i = comm[k];
      const double p = (over_power ? v(i) : fixed(i)) * p_total;
      const double b = (over_power ? fixed(i) : v(i)) * b_total;
      const double a = p * g[k];
      rate += b * std::log2(1.0 + a / b);
      if (over_power) {
        if (gr) (*gr)(i) += p_total * b * g[k] / (ln2 * (b + a)) / denom;
        if (he)
          (*he)(i, i) += -p_total * p_total * b * g[k] * g[k] /
                         (ln2 * (b + a) * (b + a)) / denom;
      } else {
        if (gr)
          (*gr)(i) += b_total *
                      (std::log2(1.0 + a / b) - a / (ln2 * (b + a))) / denom;
        if (he)
          (*he)(i, i) +=
              -b_total * b_total * a * a / (ln2 * b * (b + a) * (b + a)) /
              denom;
      }
    }
    return rate / denom;
  };
}

// Subproblem over one block. Ties (gamma_q p_q b_q equal) are linear in the
// active block. `with_rate_ineq`: rate >= target; `rate_objective`: maximize
// the rate instead of the localization objective (initialization steps).
ConvexProblem build_subproblem(const LocContext& ctx, Criterion crit,
                               bool over_power, const VectorXd& fixed,
                               bool rate_objective, bool with_rate_ineq) {
  const ScenarioConfig& sc = *ctx.sc;
  const int m = sc.size();
  const bool epigraph = !rate_objective && crit == Criterion::Fairness;
  ConvexProblem prob;
  prob.dim = m + (epigraph ? 1 : 0);
  prob.lower.resize(prob.dim);
  prob.upper.resize(prob.dim);
  const double lo = over_power ? sc.p_box[0] / sc.p_total_w
                               : sc.b_box[0] / sc.b_total_hz;
  const double hi = over_power ? sc.p_box[1] / sc.p_total_w
                               : sc.b_box[1] / sc.b_total_hz;
  for (int i = 0; i < m; ++i) {
    prob.lower(i) = lo;
    prob.upper(i) = hi;
  }
  if (epigraph) {
    prob.lower(m) = 0.0;
    prob.upper(m) = 100.0;
  }

  // budget + proportional tie rows
  const int n_prop =
      ctx.gamma.empty() ? 0 : static_cast<int>(ctx.sensing.size()) - 1;
  prob.eq_a = MatrixXd::Zero(1 + std::max(0, n_prop), prob.dim);
  prob.eq_rhs = VectorXd::Zero(1 + std::max(0, n_prop));
  prob.eq_a.row(0).head(m).setOnes();
  prob.eq_rhs(0) = 1.0;
  for (int r = 0; r < n_prop; ++r) {
    const int q0 = ctx.sensing[0];
    const int q = ctx.sensing[r + 1];
    const double c0 = ctx.gamma[0] * fixed(q0);
    const double cq = ctx.gamma[r + 1] * fixed(q);
    const double s = std::max(std::abs(c0), std::abs(cq));
    prob.eq_a(1 + r, q) = cq / s;
    prob.eq_a(1 + r, q0) = -c0 / s;
  }

  const double p_total = sc.p_total_w, b_total = sc.b_total_hz;
  if (rate_objective) {
    ScalarField rate = rate_field(ctx, over_power, fixed, sc.b_total_hz);
    prob.objective = [rate](const VectorXd& v, VectorXd* gr, MatrixXd* he) {
      const double r = rate(v, gr, he);
      if (gr) *gr = -*gr;
      if (he) *he = -*he;
      return -r;
    };
  } else if (crit == Criterion::Comprehensive) {
    // linear in the active block
    std::vector<double> coef(m, 0.0);
    for (size_t k = 0; k < ctx.sensing.size(); ++k) {
      const int q = ctx.sensing[k];
      if (over_power)
        coef[q] = (ctx.c1[k] * fixed(q) * b_total + ctx.c2[k]) * p_total /
                  ctx.rho_scale;
      else
        coef[q] = ctx.c1[k] * fixed(q) * p_total * b_total / ctx.rho_scale;
    }
    prob.objective = [coef, m](const VectorXd& v, VectorXd* gr, MatrixXd* he) {
      if (he) he->setZero();
      if (gr) gr->setZero();
      double val = 0.0;
      for (int i = 0; i < m; ++i) {
        val -= coef[i] * v(i);
        if (gr) (*gr)(i) = -coef[i];
      }
      return val;
    };
  } else {
    // fairness epigraph: maximize t with rho~_q >= t
    prob.objective = [m](const VectorXd& v, VectorXd* gr, MatrixXd* he) {
      if (gr) { gr->setZero(); (*gr)(m) = -1.0; }
      if (he) he->setZero();
      return -v(m);
    };
    for (size_t k = 0; k < ctx.sensing.size(); ++k) {
      const int q = ctx.sensing[k];
      double lin = 0.0;
      if (over_power)
        lin = (ctx.c1[k] * fixed(q) * b_total + ctx.c2[k]) * p_total /
              ctx.rho_scale;
      else
        lin = ctx.c1[k] * fixed(q) * p_total * b_total / ctx.rho_scale;
      const double cst =
          over_power ? 0.0
                     : ctx.c2[k] * fixed(q) * p_total / ctx.rho_scale;
      prob.ineq.push_back([q, m, lin, cst](const VectorXd& v, VectorXd* gr,
                                           MatrixXd* he) {
        if (gr) { gr->setZero(); (*gr)(q) = lin; (*gr)(m) = -1.0; }
        if (he) he->setZero();
        return lin * v(q) + cst - v(m);
      });
    }
  }

  if (with_rate_ineq && ctx.rate_target > 0 && !ctx.comm.empty()) {
    ScalarField rate = rate_field(ctx, over_power, fixed, ctx.rate_target);
    prob.ineq.push_back(
        [rate](const VectorXd& v, VectorXd* gr, MatrixXd* he) {
          return rate(v, gr, he) - 1.0;
        });
  }
  return prob;
}

}  // namespace

SeedResult initial_bandwidth(const ScenarioConfig& sc, const CrbModel& model,
                             const std::vector<double>& gamma) {
  LocContext ctx = make_context(sc, model, 0.0, gamma);
  const int m = sc.size();
  SeedResult out;

  // Step 1: uniform bandwidth.
  VectorXd z_unif = VectorXd::Constant(m, 1.0 / m);

  // Step 2: rate-maximizing power at uniform bandwidth.
  ConvexProblem p_prob = build_subproblem(ctx, Criterion::Comprehensive,
                                          /*over_power=*/true, z_unif,
                                          /*rate_objective=*/true,
                                          /*with_rate_ineq=*/false);
  SolverReport p_rep = solve(p_prob);
  if (p_rep.status != SolveStatus::Optimal) {
    out.message = std::string("initialization power step: ") +
                  to_string(p_rep.status) + " " + p_rep.message;
    return out;
  }

  // Step 3: rate-maximizing bandwidth at that power.
  ConvexProblem b_prob = build_subproblem(ctx, Criterion::Comprehensive,
                                          /*over_power=*/false, p_rep.x,
                                          /*rate_objective=*/true,
                                          /*with_rate_ineq=*/false);
  SolverReport b_rep = solve(b_prob);
  if (b_rep.status != SolveStatus::Optimal) {
    out.message = std::string("initialization bandwidth step: ") +
                  to_string(b_rep.status) + " " + b_rep.message;
    return out;
  }

  out.alloc.power_w.resize(m);
  out.alloc.bandwidth_hz.resize(m);
  for (int i = 0; i < m; ++i) {
    out.alloc.power_w[i] = p_rep.x(i) * sc.p_total_w;
    out.alloc.bandwidth_hz[i] = b_rep.x(i) * sc.b_total_hz;
  }
  out.sum_rate_bps =
      sum_rate(out.alloc.power_w, out.alloc.bandwidth_hz, ctx.gains);
  out.spectral_efficiency = out.sum_rate_bps / sc.b_total_hz;
  out.feasible = true;
  return out;
}

double uniform_bandwidth_rate_ceiling(const ScenarioConfig& sc,
                                      const std::vector<double>& gamma) {
  LocContext ctx = make_context(sc, CrbModel::defaults_for(sc), 0.0, gamma);
  const int m = sc.size();
  VectorXd z_unif = VectorXd::Constant(m, 1.0 / m);
  ConvexProblem prob = build_subproblem(ctx, Criterion::Comprehensive, true,
                                        z_unif, true, false);
  SolverReport rep = solve(prob);
  if (rep.status != SolveStatus::Optimal) return 0.0;
  return -rep.objective;  // objective was -R / b_total
}

LocalizationResult allocate_joint_localization(const ScenarioConfig& sc,
                                               const CrbModel& model,
                                               double gamma_c_bps_hz,
                                               const std::vector<double>& gamma,
                                               Criterion criterion) {
  LocalizationResult out;
  SeedResult seed = initial_bandwidth(sc, model, gamma);
  if (!seed.feasible) {
    out.message = seed.message;
    return out;
  }
  out.seed_rate_bps = seed.sum_rate_bps;

  LocContext ctx = make_context(sc, model, gamma_c_bps_hz, gamma);
  const int m = sc.size();
  VectorXd p0(m), b0(m);
  for (int i = 0; i < m; ++i) {
    p0(i) = seed.alloc.power_w[i] / sc.p_total_w;
    b0(i) = seed.alloc.bandwidth_hz[i] / sc.b_total_hz;
  }

  if (ctx.sensing.empty()) {
    // Nothing to localize; the seed already maximizes the sum-rate.
    out.alloc = seed.alloc;
    out.achieved_rate_bps = seed.sum_rate_bps;
    out.feasible = seed.sum_rate_bps + 1e-9 * sc.b_total_hz >=
                   gamma_c_bps_hz * sc.b_total_hz;
    if (!out.feasible)
      out.message = "rate threshold above the maximum achievable sum-rate";
    return out;
  }

  auto p_sub = [&ctx, criterion](const VectorXd& b) {
    return build_subproblem(ctx, criterion, true, b, false, true);
  };
  auto b_sub = [&ctx, criterion](const VectorXd& p) {
    return build_subproblem(ctx, criterion, false, p, false, true);
  };
  auto objective = [&ctx, criterion](const VectorXd& p, const VectorXd& b) {
    return objective_value(ctx, criterion, p, b);
  };

  AoOptions opts;
  opts.maximize = true;
  AoResult ao = alternating_optimize(p_sub, b_sub, objective, p0, b0, opts);
  out.ao_iters = ao.outer_iters;
  out.objective_trace = ao.trace;
  if (ao.status == AoStatus::InfeasibleP || ao.status == AoStatus::InfeasibleB) {
    out.feasible = false;
    out.message = "infeasible at half-step " +
                  std::to_string(ao.failed_half_step) +
                  "; seed rate " + std::to_string(seed.spectral_efficiency) +
                  " bps/Hz bounds the feasible thresholds";
    return out;
  }
  if (ao.status == AoStatus::NumericalFailure) {
    out.feasible = false;
    out.message = "numerical failure: " + ao.message;
    return out;
  }

  out.alloc.power_w.resize(m);
  out.alloc.bandwidth_hz.resize(m);
  for (int i = 0; i < m; ++i) {
    out.alloc.power_w[i] = ao.p(i) * sc.p_total_w;
    out.alloc.bandwidth_hz[i] = ao.b(i) * sc.b_total_hz;
  }
  for (size_t k = 0; k < ctx.sensing.size(); ++k) {
    const int q = ctx.sensing[k];
    TargetCrbReport t;
    t.object_index = q;
    t.crb_range_m2 = crb_range(out.alloc.power_w[q], out.alloc.bandwidth_hz[q],
                               ctx.gains.sensing[q], model);
    t.crb_angle_rad2 =
        crb_angle(out.alloc.power_w[q], ctx.gains.sensing[q], model);
    t.rho = localization_objective(out.alloc.power_w[q],
                                   out.alloc.bandwidth_hz[q],
                                   ctx.gains.sensing[q], model);
    out.targets.push_back(t);
  }
  out.achieved_rate_bps =
      sum_rate(out.alloc.power_w, out.alloc.bandwidth_hz, ctx.gains);
  out.feasible = true;
  return out;
}

}  // namespace perceptive
