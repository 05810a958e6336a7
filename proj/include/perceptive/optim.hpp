#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace perceptive {

// Smooth scalar field callback: returns the value at x and, when the pointers
// are non-null, fills gradient and Hessian. Must be pure.
using ScalarField = std::function<double(const Eigen::VectorXd& x,
                                         Eigen::VectorXd* grad,
                                         Eigen::MatrixXd* hess)>;

// minimize f0(x)  s.t.  A x = c,  g_j(x) >= 0 (g_j concave),  lo <= x <= hi.
// Callers are expected to pose problems in O(1)-scaled variables; tolerances
// are interpreted in those units.
struct ConvexProblem {
  int dim = 0;
  ScalarField objective;
  Eigen::MatrixXd eq_a;    // may have zero rows
  Eigen::VectorXd eq_rhs;
  std::vector<ScalarField> ineq;
  Eigen::VectorXd lower, upper;
  Eigen::VectorXd x0_hint;  // optional warm start (empty if unused)
};

enum class SolveStatus { Optimal, Infeasible, MaxIter, NumericalFailure };
const char* to_string(SolveStatus s);

struct SolverReport {
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double kkt_residual = std::numeric_limits<double>::infinity();
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;          // total Newton steps across both phases
  double barrier_mu_final = 0.0;
  double max_violation = 0.0;  // phase-I residual when infeasible
  std::string message;
  // Multipliers at the final barrier center (used by check_kkt).
  Eigen::VectorXd ineq_mult, box_lo_mult, box_hi_mult, eq_mult;
};

SolverReport solve(const ConvexProblem& problem, double tol = 1e-6);

// Infinity-norm KKT residual (stationarity, primal feasibility,
// complementary slackness, dual sign) at x with the report's multipliers.
double check_kkt(const ConvexProblem& problem, const Eigen::VectorXd& x,
                 const SolverReport& report);

// Independent constraint audit: worst violation of equalities, inequalities
// and box bounds, relative to O(1) problem scaling.
double constraint_violation(const ConvexProblem& problem,
                            const Eigen::VectorXd& x);

// ---- Alternating optimization ------------------------------------------

enum class AoStatus { Converged, MaxIter, InfeasibleP, InfeasibleB, NumericalFailure };
const char* to_string(AoStatus s);

struct AoOptions {
  double tol_rel = 1e-6;   // stop when |dF| <= tol_rel * max(1, |F|)
  int max_outer = 100;
  bool maximize = true;    // direction of the task objective
  bool try_both_orders = true;  // run p-first and b-first, keep the better
  double subproblem_tol = 1e-6;
};

struct AoResult {
  Eigen::VectorXd p, b;
  std::vector<double> trace;  // task objective after every half-step
  AoStatus status = AoStatus::NumericalFailure;
  int outer_iters = 0;
  int failed_half_step = -1;  // 1-based half-step index on infeasibility
  std::string message;
};

// Block-coordinate driver. Builders produce the convex subproblem for one
// block with the other held fixed; `objective` evaluates the task objective
// F(p, b). Half-steps are guarded: a subproblem solution is accepted only if
// it does not worsen F, so the trace is monotone by construction.
AoResult alternating_optimize(
    const std::function<ConvexProblem(const Eigen::VectorXd& b)>& p_subproblem,
    const std::function<ConvexProblem(const Eigen::VectorXd& p)>& b_subproblem,
    const std::function<double(const Eigen::VectorXd& p,
                               const Eigen::VectorXd& b)>& objective,
    const Eigen::VectorXd& p0, const Eigen::VectorXd& b0,
    const AoOptions& opts = {});

}  // namespace perceptive
