#include "perceptive/optim.hpp"

#include <algorithm>
#include <cmath>

namespace perceptive {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kStrictMargin = 1e-9;

bool finite(double v) { return std::isfinite(v); }

// Internal problem view shared by phase I and phase II.
struct Inner {
  ScalarField f;
  const std::vector<ScalarField>* ineqs;
  VectorXd lo, hi;
  MatrixXd a;
  VectorXd c;
};

double max_violation_of(const Inner& pr, const VectorXd& x) {
  double v = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    v = std::max(v, pr.lo(i) - x(i));
    v = std::max(v, x(i) - pr.hi(i));
  }
  for (const auto& g : *pr.ineqs) {
    const double gv = g(x, nullptr, nullptr);
    if (!finite(gv)) return std::numeric_limits<double>::infinity();
    v = std::max(v, -gv);
  }
  return v;
}

bool strictly_feasible(const Inner& pr, const VectorXd& x, double margin) {
  for (int i = 0; i < x.size(); ++i)
    if (!(x(i) - pr.lo(i) > margin) || !(pr.hi(i) - x(i) > margin)) return false;
  for (const auto& g : *pr.ineqs)
    if (!(g(x, nullptr, nullptr) > margin)) return false;
  return true;
}

// Barrier merit f(x) + mu * phi(x); infinity outside the strict interior.
double merit(const Inner& pr, const VectorXd& x, double mu) {
  double val = pr.f(x, nullptr, nullptr);
  if (!finite(val)) return std::numeric_limits<double>::infinity();
  for (int i = 0; i < x.size(); ++i) {
    const double dl = x(i) - pr.lo(i), du = pr.hi(i) - x(i);
    if (!(dl > 0) || !(du > 0)) return std::numeric_limits<double>::infinity();
    val -= mu * (std::log(dl) + std::log(du));
  }
  for (const auto& g : *pr.ineqs) {
    const double gv = g(x, nullptr, nullptr);
    if (!(gv > 0)) return std::numeric_limits<double>::infinity();
    val -= mu * std::log(gv);
  }
  return finite(val) ? val : std::numeric_limits<double>::infinity();
}

struct CenterResult {
  bool ok = false;
  int newton_steps = 0;
  VectorXd eq_mult;
  std::string message;
};

// Equality-constrained Newton on f + mu*phi from a strictly feasible x with
// A x = c. Early-stop predicate lets phase I bail out once strictly feasible.
CenterResult center(const Inner& pr, VectorXd& x, double mu,
                    const std::function<bool(const VectorXd&)>& stop_early) {
  CenterResult res;
  const int n = static_cast<int>(x.size());
  const int p = static_cast<int>(pr.a.rows());
  res.eq_mult = VectorXd::Zero(p);

  VectorXd grad(n), gg(n);
  MatrixXd hess(n, n), gh(n, n);
  for (int it = 0; it < 60; ++it) {
    if (stop_early && stop_early(x)) {
      res.ok = true;
      return res;
    }
    double val = pr.f(x, &grad, &hess);
    if (!finite(val)) {
      res.message = "objective returned non-finite value";
      return res;
    }
    // box barrier
    for (int i = 0; i < n; ++i) {
      const double dl = x(i) - pr.lo(i), du = pr.hi(i) - x(i);
      grad(i) += mu * (-1.0 / dl + 1.0 / du);
      hess(i, i) += mu * (1.0 / (dl * dl) + 1.0 / (du * du));
    }
    // concave inequality barrier: -mu log g
    for (const auto& g : *pr.ineqs) {
      const double gv = g(x, &gg, &gh);
      if (!(gv > 0) || !finite(gv)) {
        res.message = "inequality callback non-finite or boundary reached";
        return res;
      }
      grad.noalias() += (-mu / gv) * gg;
      hess.noalias() += (mu / (gv * gv)) * (gg * gg.transpose());
      hess.noalias() += (-mu / gv) * gh;
    }
    if (!grad.allFinite() || !hess.allFinite()) {
      res.message = "non-finite derivatives";
      return res;
    }

    // KKT solve by Schur complement; H is SPD thanks to the box barrier.
    VectorXd dx(n), w = VectorXd::Zero(p);
    double jitter = 0.0;
    for (int attempt = 0; attempt < 6; ++attempt) {
      MatrixXd h = hess;
      if (jitter > 0) h.diagonal().array() += jitter;
      Eigen::LLT<MatrixXd> llt(h);
      if (llt.info() == Eigen::Success) {
        if (p == 0) {
          dx = llt.solve(-grad);
        } else {
          MatrixXd hinv_at = llt.solve(pr.a.transpose());
          VectorXd hinv_g = llt.solve(grad);
          MatrixXd schur = pr.a * hinv_at;
          w = schur.ldlt().solve(-pr.a * hinv_g);
          dx = -hinv_g - hinv_at * w;
        }
        if (dx.allFinite()) break;
      }
      jitter = jitter == 0 ? 1e-12 : jitter * 100;
      if (attempt == 5) {
        res.message = "Hessian factorization failed";
        return res;
      }
    }
    res.eq_mult = w;

    const double dec2 = dx.dot(hess * dx);
    if (!(dec2 > 1e-22)) {
      res.ok = true;
      res.newton_steps += it;
      return res;
    }

    const double m0 = merit(pr, x, mu);
    const double slope = grad.dot(dx);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 70; ++ls) {
      VectorXd xn = x + alpha * dx;
      const double mn = merit(pr, xn, mu);
      if (mn <= m0 + 0.01 * alpha * slope) {
        x = xn;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++res.newton_steps;
    if (!accepted) {
      // Flat to machine precision; treat as centered.
      res.ok = true;
      return res;
    }
    if (dec2 * 0.5 < 1e-11) {
      res.ok = true;
      return res;
    }
  }
  res.ok = true;  // hit inner cap at a usable point; outer loop continues
  return res;
}

// Drop linearly dependent equality rows; returns false on inconsistent rows.
// `kept` receives the original indices of surviving rows.
bool preprocess_equalities(MatrixXd& a, VectorXd& c, std::vector<int>* kept,
                           std::string* msg) {
  if (kept) {
    kept->resize(a.rows());
    for (int i = 0; i < a.rows(); ++i) (*kept)[i] = i;
  }
  if (a.rows() == 0) return true;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(a.transpose());
  const double thresh =
      1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff());
  qr.setThreshold(thresh);
  const int rank = static_cast<int>(qr.rank());
  if (rank == a.rows()) return true;
  // Least-squares point of the full system to test consistency.
  VectorXd xls = a.colPivHouseholderQr().solve(c);
  if ((a * xls - c).cwiseAbs().maxCoeff() >
      1e-8 * std::max(1.0, c.cwiseAbs().maxCoeff())) {
    if (msg) *msg = "inconsistent equality constraints";
    return false;
  }
  // Keep the first `rank` independent rows found greedily.
  MatrixXd rows(rank, a.cols());
  VectorXd rhs(rank);
  std::vector<int> idx;
  int k = 0;
  MatrixXd basis(a.cols(), 0);
  for (int i = 0; i < a.rows() && k < rank; ++i) {
    MatrixXd trial(a.cols(), k + 1);
    if (k > 0) trial.leftCols(k) = basis;
    trial.col(k) = a.row(i).transpose();
    Eigen::ColPivHouseholderQR<MatrixXd> tqr(trial);
    tqr.setThreshold(thresh);
    if (static_cast<int>(tqr.rank()) == k + 1) {
      rows.row(k) = a.row(i);
      rhs(k) = c(i);
      idx.push_back(i);
      basis = trial;
      ++k;
    }
  }
  a = rows;
  c = rhs;
  if (kept) *kept = idx;
  return true;
}

VectorXd project_onto_equalities(const MatrixXd& a, const VectorXd& c,
                                 const VectorXd& x) {
  if (a.rows() == 0) return x;
  const VectorXd r = a * x - c;
  return x - a.transpose() * (a * a.transpose()).ldlt().solve(r);
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

double constraint_violation(const ConvexProblem& problem,
                            const Eigen::VectorXd& x) {
  double v = 0.0;
  if (problem.eq_a.rows() > 0) {
    const VectorXd r = problem.eq_a * x - problem.eq_rhs;
    for (int i = 0; i < r.size(); ++i)
      v = std::max(v, std::abs(r(i)) /
                          std::max(1.0, std::abs(problem.eq_rhs(i))));
  }
  for (int i = 0; i < problem.dim; ++i) {
    const double span = std::max(1.0, problem.upper(i) - problem.lower(i));
    v = std::max(v, (problem.lower(i) - x(i)) / span);
    v = std::max(v, (x(i) - problem.upper(i)) / span);
  }
  for (const auto& g : problem.ineq)
    v = std::max(v, -g(x, nullptr, nullptr));
  return v;
}

double check_kkt(const ConvexProblem& problem, const Eigen::VectorXd& x,
                 const SolverReport& report) {
  const int n = problem.dim;
  VectorXd grad(n), gg(n);
  problem.objective(x, &grad, nullptr);
  VectorXd lagr = grad;
  double comp = 0.0, dual = 0.0;
  for (size_t j = 0; j < problem.ineq.size(); ++j) {
    const double gv = problem.ineq[j](x, &gg, nullptr);
    const double lam = report.ineq_mult.size() ? report.ineq_mult(j) : 0.0;
    lagr.noalias() -= lam * gg;
    comp = std::max(comp, std::abs(lam * gv));
    dual = std::max(dual, -lam);
  }
  for (int i = 0; i < n; ++i) {
    const double llo = report.box_lo_mult.size() ? report.box_lo_mult(i) : 0.0;
    const double lhi = report.box_hi_mult.size() ? report.box_hi_mult(i) : 0.0;
    lagr(i) += -llo + lhi;
    comp = std::max(comp, std::abs(llo * (x(i) - problem.lower(i))));
    comp = std::max(comp, std::abs(lhi * (problem.upper(i) - x(i))));
    dual = std::max(dual, std::max(-llo, -lhi));
  }
  if (problem.eq_a.rows() > 0 && report.eq_mult.size() == problem.eq_a.rows())
    lagr.noalias() += problem.eq_a.transpose() * report.eq_mult;
  const double stat = lagr.cwiseAbs().maxCoeff();
  const double prim = constraint_violation(problem, x);
  return std::max({stat, prim, comp, dual});
}

SolverReport solve(const ConvexProblem& problem, double tol) {
  SolverReport rep;
  const int n = problem.dim;
  if (n <= 0 || !problem.objective || problem.lower.size() != n ||
      problem.upper.size() != n) {
    rep.message = "malformed problem";
    return rep;
  }
  for (int i = 0; i < n; ++i) {
    if (!(problem.lower(i) < problem.upper(i))) {
      rep.message = "box must satisfy lower < upper";
      return rep;
    }
  }

  MatrixXd a = problem.eq_a;
  VectorXd c = problem.eq_rhs;
  std::vector<int> kept_rows;
  std::string msg;
  if (!preprocess_equalities(a, c, &kept_rows, &msg)) {
    rep.status = SolveStatus::Infeasible;
    rep.message = msg;
    rep.max_violation = std::numeric_limits<double>::infinity();
    return rep;
  }

  Inner pr{problem.objective, &problem.ineq, problem.lower, problem.upper, a, c};

  // Starting point: warm-start hint if usable, else box midpoint, both
  // projected onto the equality manifold.
  VectorXd x = 0.5 * (problem.lower + problem.upper);
  if (problem.x0_hint.size() == n) x = problem.x0_hint;
  x = project_onto_equalities(a, c, x);

  int total_newton = 0;
  if (!strictly_feasible(pr, x, kStrictMargin)) {
    // Phase I: elastic slack minimization over (x, s).
    const int ne = n + 1;
    const double v0 = max_violation_of(pr, x);
    if (!finite(v0)) {
      rep.message = "constraint callback non-finite at start";
      return rep;
    }
    const double s_hi = std::max(10.0, 4.0 * v0);
    VectorXd elo(ne), ehi(ne);
    elo.head(n) = problem.lower.array() - s_hi;
    ehi.head(n) = problem.upper.array() + s_hi;
    elo(n) = -s_hi;
    ehi(n) = s_hi;

    std::vector<ScalarField> eineqs;
    for (int i = 0; i < n; ++i) {
      eineqs.push_back([i, &problem](const VectorXd& z, VectorXd* gr,
                                     MatrixXd* he) {
        if (gr) { gr->setZero(); (*gr)(i) = 1.0; (*gr)(z.size() - 1) = 1.0; }
        if (he) he->setZero();
        return z(i) - problem.lower(i) + z(z.size() - 1);
      });
      eineqs.push_back([i, &problem](const VectorXd& z, VectorXd* gr,
                                     MatrixXd* he) {
        if (gr) { gr->setZero(); (*gr)(i) = -1.0; (*gr)(z.size() - 1) = 1.0; }
        if (he) he->setZero();
        return problem.upper(i) - z(i) + z(z.size() - 1);
      });
    }
    for (const auto& g : problem.ineq) {
      eineqs.push_back([&g, n](const VectorXd& z, VectorXd* gr, MatrixXd* he) {
        VectorXd gg(n);
        MatrixXd gh;
        if (he) gh.resize(n, n);
        const double gv = g(z.head(n), gr ? &gg : nullptr, he ? &gh : nullptr);
        if (gr) { gr->setZero(); gr->head(n) = gg; (*gr)(n) = 1.0; }
        if (he) { he->setZero(); he->topLeftCorner(n, n) = gh; }
        return gv + z(n);
      });
    }
    ScalarField fslack = [](const VectorXd& z, VectorXd* gr, MatrixXd* he) {
      if (gr) { gr->setZero(); (*gr)(z.size() - 1) = 1.0; }
      if (he) he->setZero();
      return z(z.size() - 1);
    };
    MatrixXd ae(a.rows(), ne);
    if (a.rows() > 0) {
      ae.leftCols(n) = a;
      ae.col(n).setZero();
    }
    Inner pe{fslack, &eineqs, elo, ehi, ae, c};

    VectorXd z(ne);
    z.head(n) = x;
    z(n) = v0 * 1.25 + 1e-3;
    auto good_enough = [&](const VectorXd& zz) {
      return strictly_feasible(pr, zz.head(n), 1e-7);
    };
    bool found = false;
    for (double mu = std::max(1.0, z(n)); ; mu /= 10.0) {
      CenterResult cr = center(pe, z, mu, good_enough);
      total_newton += cr.newton_steps;
      if (!cr.ok) {
        rep.message = "phase-I: " + cr.message;
        rep.iterations = total_newton;
        return rep;
      }
      if (good_enough(z)) {
        found = true;
        break;
      }
      if (mu <= 1e-9) break;
    }
    if (!found) {
      rep.status = SolveStatus::Infeasible;
      rep.max_violation = std::max(0.0, max_violation_of(pr, z.head(n)));
      rep.message = "phase-I optimum leaves constraint violation " +
                    std::to_string(rep.max_violation);
      rep.iterations = total_newton;
      rep.x = z.head(n);
      return rep;
    }
    x = project_onto_equalities(a, c, z.head(n));
    if (!strictly_feasible(pr, x, 0.0)) x = z.head(n);
  }

  // Phase II: barrier path following, mu: 1 -> tol/dim.
  const double mu_final = tol / std::max(1, n);
  VectorXd eq_mult = VectorXd::Zero(a.rows());
  double mu = 1.0;
  while (true) {
    CenterResult cr = center(pr, x, mu, nullptr);
    total_newton += cr.newton_steps;
    if (!cr.ok) {
      rep.message = "phase-II: " + cr.message;
      rep.iterations = total_newton;
      rep.x = x;
      return rep;
    }
    eq_mult = cr.eq_mult;
    if (mu <= mu_final) break;
    mu = std::max(mu / 10.0, mu_final);
  }

  rep.x = x;
  rep.objective = problem.objective(x, nullptr, nullptr);
  rep.iterations = total_newton;
  rep.barrier_mu_final = mu_final;
  rep.ineq_mult.resize(problem.ineq.size());
  for (size_t j = 0; j < problem.ineq.size(); ++j)
    rep.ineq_mult(j) = mu_final / problem.ineq[j](x, nullptr, nullptr);
  rep.box_lo_mult = (mu_final / (x - problem.lower).array()).matrix();
  rep.box_hi_mult = (mu_final / (problem.upper - x).array()).matrix();
  // Scatter multipliers of the kept equality rows back to original indices;
  // dropped (dependent) rows get zero, which preserves stationarity.
  rep.eq_mult = VectorXd::Zero(problem.eq_a.rows());
  for (size_t r = 0; r < kept_rows.size(); ++r)
    rep.eq_mult(kept_rows[r]) = eq_mult(r);
  rep.kkt_residual = check_kkt(problem, x, rep);
  const double audit = constraint_violation(problem, x);
  rep.max_violation = std::max(0.0, audit);
  if (rep.kkt_residual <= tol && audit <= 1e-8) {
    rep.status = SolveStatus::Optimal;
  } else {
    rep.status = SolveStatus::MaxIter;
    rep.message = "kkt residual " + std::to_string(rep.kkt_residual) +
                  ", violation " + std::to_string(audit);
  }
  return rep;
}

const char* to_string(AoStatus s) {
  switch (s) {
    case AoStatus::Converged: return "converged";
    case AoStatus::MaxIter: return "max_iter";
    case AoStatus::InfeasibleP: return "infeasible_p";
    case AoStatus::InfeasibleB: return "infeasible_b";
    case AoStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

namespace {

AoResult ao_single_order(
    const std::function<ConvexProblem(const VectorXd&)>& p_sub,
    const std::function<ConvexProblem(const VectorXd&)>& b_sub,
    const std::function<double(const VectorXd&, const VectorXd&)>& objective,
    VectorXd p, VectorXd b, const AoOptions& opts, bool p_first) {
  AoResult res;
  const double sgn = opts.maximize ? 1.0 : -1.0;
  double f_curr = objective(p, b);
  res.trace.push_back(f_curr);
  int half = 0;

  auto half_step = [&](bool on_p) -> bool {
    ++half;
    ConvexProblem prob = on_p ? p_sub(b) : b_sub(p);
    const VectorXd& block = on_p ? p : b;
    // Subproblem variables start with the block being optimized; auxiliary
    // variables (epigraph heights) follow and get a near-lower-bound hint.
    if (prob.x0_hint.size() == 0 && prob.dim >= block.size()) {
      prob.x0_hint.resize(prob.dim);
      prob.x0_hint.head(block.size()) = block;
      for (int i = static_cast<int>(block.size()); i < prob.dim; ++i)
        prob.x0_hint(i) =
            prob.lower(i) + 0.01 * (prob.upper(i) - prob.lower(i));
    }
    SolverReport r = solve(prob, opts.subproblem_tol);
    if (r.status == SolveStatus::Infeasible) {
      res.status = on_p ? AoStatus::InfeasibleP : AoStatus::InfeasibleB;
      res.failed_half_step = half;
      res.message = r.message;
      return false;
    }
    if (r.status == SolveStatus::NumericalFailure) {
      res.status = AoStatus::NumericalFailure;
      res.failed_half_step = half;
      res.message = r.message;
      return false;
    }
    const VectorXd cand = r.x.head(block.size());
    const double f_cand = on_p ? objective(cand, b) : objective(p, cand);
    // Guarded acceptance keeps the trace monotone even when the subproblem
    // solver returns a point marginally worse than the incumbent.
    if (sgn * (f_cand - f_curr) > 0) {
      (on_p ? p : b) = cand;
      f_curr = f_cand;
    }
    res.trace.push_back(f_curr);
    return true;
  };

  for (int it = 0; it < opts.max_outer; ++it) {
    const double f_outer_prev = f_curr;
    if (!half_step(p_first)) { res.p = p; res.b = b; return res; }
    if (!half_step(!p_first)) { res.p = p; res.b = b; return res; }
    res.outer_iters = it + 1;
    if (std::abs(f_curr - f_outer_prev) <=
        opts.tol_rel * std::max(1.0, std::abs(f_curr))) {
      res.status = AoStatus::Converged;
      res.p = p;
      res.b = b;
      return res;
    }
  }
  res.status = AoStatus::MaxIter;
  res.p = p;
  res.b = b;
  return res;
}

}  // namespace

AoResult alternating_optimize(
    const std::function<ConvexProblem(const Eigen::VectorXd&)>& p_subproblem,
    const std::function<ConvexProblem(const Eigen::VectorXd&)>& b_subproblem,
    const std::function<double(const Eigen::VectorXd&,
                               const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& p0, const Eigen::VectorXd& b0,
    const AoOptions& opts) {
  AoResult first = ao_single_order(p_subproblem, b_subproblem, objective, p0,
                                   b0, opts, /*p_first=*/true);
  if (!opts.try_both_orders) return first;
  if (first.status != AoStatus::Converged && first.status != AoStatus::MaxIter)
    return first;
  AoResult second = ao_single_order(p_subproblem, b_subproblem, objective, p0,
                                    b0, opts, /*p_first=*/false);
  if (second.status != AoStatus::Converged && second.status != AoStatus::MaxIter)
    return first;
  const double sgn = opts.maximize ? 1.0 : -1.0;
  return sgn * (second.trace.back() - first.trace.back()) > 0 ? second : first;
}

}  // namespace perceptive
