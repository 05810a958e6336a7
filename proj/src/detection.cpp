#include "perceptive/detection.hpp"

#include <cmath>
#include <stdexcept>

#include "perceptive/channel.hpp"
#include "perceptive/optim.hpp"
#include "perceptive/rng.hpp"

namespace perceptive {

double chi2_cdf_2dof(double x) {
  if (x < 0) throw std::domain_error("chi2_cdf_2dof: x must be >= 0");
  return 1.0 - std::exp(-0.5 * x);
}

double detection_threshold(double p_fa, int n_rx, double sigma_r2) {
  if (!(p_fa > 0.0) || !(p_fa < 1.0))
    throw std::domain_error("detection_threshold: p_fa must lie in (0,1)");
  return -static_cast<double>(n_rx) * sigma_r2 * std::log(p_fa);
}

double prob_detection(double rho, double p_fa) {
  if (rho < 0) throw std::domain_error("prob_detection: rho must be >= 0");
  if (!(p_fa > 0.0) || !(p_fa < 1.0))
    throw std::domain_error("prob_detection: p_fa must lie in (0,1)");
  return std::pow(p_fa, 1.0 / (1.0 + rho));
}

DetectionSim simulate_detection(double power_w, double gain, double p_fa,
                                long trials, std::uint64_t seed) {
  if (trials < 1)
    throw std::domain_error("simulate_detection: trials must be >= 1");
  const double rho = power_w * gain;
  const double delta = -std::log(p_fa);  // unit-variance noise
  const double amp = std::sqrt(rho);
  long hits = 0, false_alarms = 0;
  for (long t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
    // alpha, z ~ CN(0,1): independent N(0, 1/2) components.
    const double ar = rng.next_gaussian() * M_SQRT1_2;
    const double ai = rng.next_gaussian() * M_SQRT1_2;
    const double zr = rng.next_gaussian() * M_SQRT1_2;
    const double zi = rng.next_gaussian() * M_SQRT1_2;
    const double e1 = (amp * ar + zr) * (amp * ar + zr) +
                      (amp * ai + zi) * (amp * ai + zi);
    const double e0 = zr * zr + zi * zi;
    if (e1 > delta) ++hits;
    if (e0 > delta) ++false_alarms;
  }
  DetectionSim sim;
  sim.pd_empirical = static_cast<double>(hits) / trials;
  sim.pfa_empirical = static_cast<double>(false_alarms) / trials;
  sim.trials = trials;
  sim.seed = seed;
  return sim;
}

DetectionSetup DetectionSetup::from_scenario(const ScenarioConfig& sc,
                                             double p_fa) {
  DetectionSetup s;
  s.p_fa = p_fa;
  s.n_rx = sc.array.n_rx;
  s.sigma_r2 = sc.radar_noise();
  s.gains = channel_gains(sc);
  s.gamma = sc.sensing_gammas();
  return s;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Concave rate constraint R(p)/(Gc*B) - 1 >= 0 in normalized power y = p/P.
ScalarField rate_constraint_p(const ScenarioConfig& sc,
                              const ChannelGains& gains,
                              const std::vector<double>& bw, double gamma_c) {
  const double p_total = sc.p_total_w;
  const double target = gamma_c * sc.b_total_hz;
  std::vector<int> users = sc.comm_indices();
  std::vector<double> g(users.size()), b(users.size());
  for (size_t k = 0; k < users.size(); ++k) {
    g[k] = gains.comm[users[k]];
    b[k] = bw[users[k]];
  }
  return [users, g, b, p_total, target](const VectorXd& y, VectorXd* gr,
                                        MatrixXd* he) {
    if (gr) gr->setZero();
    if (he) he->setZero();
    double rate = 0.0;
    constexpr double ln2 = M_LN2;
    for (size_t k = 0; k < users.size(); ++k) {
      const int i = users[k];
      const double p = y(i) * p_total;
      const double denom = b[k] + p * g[k];
      rate += b[k] * std::log2(1.0 + p * g[k] / b[k]);
      if (gr) (*gr)(i) += p_total * b[k] * g[k] / (ln2 * denom) / target;
      if (he)
        (*he)(i, i) += -p_total * p_total * b[k] * g[k] * g[k] /
                       (ln2 * denom * denom) / target;
    }
    return rate / target - 1.0;
  };
}

DetectionReport finish_report(const ScenarioConfig& sc,
                              const DetectionSetup& setup,
                              const std::vector<double>& bw,
                              const SolverReport& rep, int extra_vars) {
  DetectionReport out;
  out.sensing_objects = sc.sensing_indices();
  out.kkt_residual = rep.kkt_residual;
  if (rep.status == SolveStatus::Infeasible) {
    out.feasible = false;
    out.phase1_failure = true;
    out.message = "infeasible: " + rep.message;
    return out;
  }
  if (rep.status != SolveStatus::Optimal) {
    out.feasible = false;
    out.phase1_failure = false;
    out.message = std::string("solver did not converge: ") +
                  to_string(rep.status) + " " + rep.message;
    return out;
  }
  const int m = sc.size();
  out.allocation.power_w.resize(m);
  for (int i = 0; i < m; ++i)
    out.allocation.power_w[i] = rep.x(i) * sc.p_total_w;
  out.allocation.bandwidth_hz = bw;
  out.min_rho = std::numeric_limits<double>::infinity();
  for (int q : out.sensing_objects) {
    const double rho = out.allocation.power_w[q] * setup.gains.sensing[q];
    out.rho.push_back(rho);
    out.pd_analytic.push_back(prob_detection(rho, setup.p_fa));
    out.min_rho = std::min(out.min_rho, rho);
    out.sum_rho += rho;
  }
  out.achieved_rate_bps =
      sum_rate(out.allocation.power_w, bw, setup.gains);
  out.feasible = true;
  (void)extra_vars;
  return out;
}

}  // namespace

DetectionReport allocate_power_fairness(const ScenarioConfig& sc,
                                        const DetectionSetup& setup,
                                        double gamma_c_bps_hz) {
  const int m = sc.size();
  const auto sensing = sc.sensing_indices();
  std::vector<double> bw(m, sc.b_total_hz / m);

  // rho scale so the epigraph variable is O(1).
  double rho_scale = 0.0;
  for (int q : sensing)
    rho_scale = std::max(rho_scale, sc.p_total_w * setup.gains.sensing[q]);
  if (rho_scale <= 0.0) rho_scale = 1.0;

  ConvexProblem prob;
  prob.dim = m + 1;  // normalized powers + epigraph t
  prob.lower = VectorXd::Constant(m + 1, 0.0);
  prob.upper = VectorXd::Constant(m + 1, 0.0);
  for (int i = 0; i < m; ++i) {
    prob.lower(i) = sc.p_box[0] / sc.p_total_w;
    prob.upper(i) = sc.p_box[1] / sc.p_total_w;
  }
  prob.lower(m) = 0.0;
  prob.upper(m) = 2.0;
  prob.eq_a = MatrixXd::Zero(1, m + 1);
  prob.eq_a.leftCols(m).setOnes();
  prob.eq_rhs = VectorXd::Constant(1, 1.0);
  prob.objective = [m](const VectorXd& x, VectorXd* gr, MatrixXd* he) {
    if (gr) { gr->setZero(); (*gr)(m) = -1.0; }
    if (he) he->setZero();
    return -x(m);
  };
  for (int q : sensing) {
    const double coef = sc.p_total_w * setup.gains.sensing[q] / rho_scale;
    prob.ineq.push_back([q, m, coef](const VectorXd& x, VectorXd* gr,
                                     MatrixXd* he) {
      if (gr) { gr->setZero(); (*gr)(q) = coef; (*gr)(m) = -1.0; }
      if (he) he->setZero();
      return coef * x(q) - x(m);
    });
  }
  if (gamma_c_bps_hz > 0.0)
    prob.ineq.push_back(
        rate_constraint_p(sc, setup.gains, bw, gamma_c_bps_hz));

  return finish_report(sc, setup, bw, solve(prob), 1);
}

DetectionReport allocate_power_comprehensive(const ScenarioConfig& sc,
                                             const DetectionSetup& setup,
                                             double gamma_c_bps_hz) {
  const int m = sc.size();
  const auto sensing = sc.sensing_indices();
  std::vector<double> bw(m, sc.b_total_hz / m);
  if (setup.gamma.size() != sensing.size())
    throw std::invalid_argument(
        "allocate_power_comprehensive: gamma size mismatch");

  double rho_scale = 0.0;
  for (int q : sensing)
    rho_scale = std::max(rho_scale, sc.p_total_w * setup.gains.sensing[q]);
  if (rho_scale <= 0.0) rho_scale = 1.0;

  ConvexProblem prob;
  prob.dim = m;
  prob.lower = VectorXd::Constant(m, sc.p_box[0] / sc.p_total_w);
  prob.upper = VectorXd::Constant(m, sc.p_box[1] / sc.p_total_w);

  // Budget row plus proportionality rows rho_q / gamma_q = rho_1 / gamma_1,
  // linear in p; each row scaled to O(1).
  const int n_prop = static_cast<int>(sensing.size()) - 1;
  prob.eq_a = MatrixXd::Zero(1 + std::max(0, n_prop), m);
  prob.eq_rhs = VectorXd::Zero(1 + std::max(0, n_prop));
  prob.eq_a.row(0).setOnes();
  prob.eq_rhs(0) = 1.0;
  for (int r = 0; r < n_prop; ++r) {
    const int q0 = sensing[0];
    const int q = sensing[r + 1];
    const double c0 =
        sc.p_total_w * setup.gains.sensing[q0] / setup.gamma[0] / rho_scale;
    const double cq =
        sc.p_total_w * setup.gains.sensing[q] / setup.gamma[r + 1] / rho_scale;
    const double s = std::max(std::abs(c0), std::abs(cq));
    prob.eq_a(1 + r, q) = cq / s;
    prob.eq_a(1 + r, q0) = -c0 / s;
  }

  std::vector<double> coef(m, 0.0);
  for (size_t k = 0; k < sensing.size(); ++k)
    coef[sensing[k]] =
        sc.p_total_w * setup.gains.sensing[sensing[k]] / rho_scale;
  prob.objective = [coef, m](const VectorXd& x, VectorXd* gr, MatrixXd* he) {
    if (he) he->setZero();
    double v = 0.0;
    if (gr) gr->setZero();
    for (int i = 0; i < m; ++i) {
      v -= coef[i] * x(i);
      if (gr) (*gr)(i) = -coef[i];
    }
    return v;
  };
  if (gamma_c_bps_hz > 0.0)
    prob.ineq.push_back(
        rate_constraint_p(sc, setup.gains, bw, gamma_c_bps_hz));

  return finish_report(sc, setup, bw, solve(prob), 0);
}

}  // namespace perceptive
