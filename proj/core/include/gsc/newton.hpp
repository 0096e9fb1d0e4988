#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "gsc/linsys.hpp"
#include "gsc/problem.hpp"

namespace gsc {

/// Current point of an approximate Newton run. The loss gradient (reg term
/// excluded) is cached so consecutive steps and regularization changes reuse
/// it; decrement_sq_estimate is grad . step of the solve that produced this
/// iterate, which sandwiches the squared Newton decrement within (1 +- rho).
struct Iterate {
  Eigen::VectorXd x;
  double mu = 0.0;
  Eigen::VectorXd loss_grad;
  double decrement_sq_estimate = 0.0;

  Eigen::VectorXd gradient(double mu_now) const { return loss_grad + mu_now * x; }
};

/// How each Newton system H_mu(x) step = grad is solved.
struct AnmConfig {
  double rho = 1.0 / 7.0;  ///< relative solve tolerance; convergence needs <= 1/7
  enum class Solver { Exact, Pcg } solver = Solver::Exact;
  int pcg_iters = 3;                       ///< tau
  Eigen::Index subsamples = 0;             ///< Q for the subsampled preconditioner
  Sampling sampling = Sampling::Uniform;   ///< preconditioner row sampling
  int max_steps = 400;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Running cost counters, shared with the globalization trace.
struct StepCounters {
  std::int64_t inner_iters = 0;
  double passes = 0.0;
  std::int64_t solves = 0;
};

Iterate make_iterate(const RegularizedObjective& problem, Eigen::VectorXd x, double mu);

/// Solves H_mu(x) z = rhs with the configured solver and returns the
/// certificate-carrying result. Counters (when given) also provide the
/// stream index for the preconditioner's seed derivation.
LsoResult relative_solve(const RegularizedObjective& problem, const Eigen::VectorXd& x, double mu,
                         const Eigen::VectorXd& rhs, const AnmConfig& config,
                         StepCounters* counters = nullptr);

/// nu_lambda(x) = ||grad f_lambda(x)||_{H_lambda(x)^{-1}} via a dense solve.
double newton_decrement_exact(const RegularizedObjective& problem, const Eigen::VectorXd& x,
                              double lambda);

/// One approximate Newton step x <- x - step with step from the configured
/// solver. The returned iterate caches the fresh gradient and the
/// grad . step estimate of the step just taken.
Iterate anm_step(const RegularizedObjective& problem, const Iterate& it, const AnmConfig& config,
                 StepCounters* counters = nullptr);

/// t >= 1 approximate Newton steps at fixed regularization mu.
Iterate anm_run(const RegularizedObjective& problem, const Eigen::VectorXd& x0, double mu, int t,
                const AnmConfig& config, StepCounters* counters = nullptr);

struct AnmUntilResult {
  Iterate iterate;
  int solves = 0;
};

/// Self-stopping run: returns the first iterate whose decrement estimate
/// grad . step falls to (6/7) eps, which certifies nu^2 <= eps and an
/// objective gap <= eps. Throws ConvergenceError past config.max_steps.
AnmUntilResult anm_run_until(const RegularizedObjective& problem, const Eigen::VectorXd& x0,
                             double lambda, double eps, const AnmConfig& config,
                             StepCounters* counters = nullptr);

struct DikinReport {
  bool member = false;
  bool vacuous = false;  ///< radius 0: every point qualifies
  double decrement = 0.0;
  double threshold = 0.0;  ///< c sqrt(lambda) / R
};

/// Exact membership test x in D_lambda(c) = { nu_lambda(x) <= c sqrt(lambda)/R }.
DikinReport dikin_membership(const RegularizedObjective& problem, const Eigen::VectorXd& x,
                             double lambda, double c);

struct GapBoundsReport {
  bool applicable = false;  ///< x was inside D_lambda(1/7)
  bool pass = false;
  double nu_sq = 0.0;
  double gap = 0.0;  ///< f_lambda(x) - f_lambda(x*)
};

/// Checks the sandwich nu^2/4 <= f_lambda(x) - f_lambda(x*) <= nu^2 on a
/// dense fixture; the optimum is computed by full Newton from x (quadratic
/// convergence inside the ellipsoid makes this the natural oracle).
GapBoundsReport function_gap_bounds_check(const RegularizedObjective& problem,
                                          const Eigen::VectorXd& x, double lambda);

/// Minimizer of f_lambda by exact full Newton from `x0`, iterated until the
/// decrement falls below tol. Valid whenever x0 lies in the quadratic
/// convergence region; used by dense diagnostics.
Eigen::VectorXd newton_refine(const RegularizedObjective& problem, const Eigen::VectorXd& x0,
                              double lambda, double tol = 1e-14, int max_steps = 100);

}  // namespace gsc
