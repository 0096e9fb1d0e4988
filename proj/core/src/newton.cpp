#include "gsc/newton.hpp"

#include <cmath>
#include <limits>

#include "gsc/rng.hpp"
#include "gsc/trace.hpp"

namespace gsc {

void AnmConfig::validate() const {
  if (!(rho > 0) || rho > 1.0 / 7.0 + 1e-15) {
    throw DomainError("AnmConfig: rho must lie in (0, 1/7]");
  }
  if (solver == Solver::Pcg) {
    if (pcg_iters < 1) throw DomainError("AnmConfig: pcg_iters must be >= 1");
    if (subsamples < 1) throw DomainError("AnmConfig: Pcg solver needs subsamples >= 1");
  }
  if (max_steps < 1) throw DomainError("AnmConfig: max_steps must be >= 1");
}

Iterate make_iterate(const RegularizedObjective& problem, Eigen::VectorXd x, double mu) {
  Iterate it;
  it.loss_grad = problem.loss_gradient(x);
  it.x = std::move(x);
  it.mu = mu;
  it.decrement_sq_estimate = 0.0;
  return it;
}

double newton_decrement_exact(const RegularizedObjective& problem, const Eigen::VectorXd& x,
                              double lambda) {
  if (!(lambda > 0)) throw DomainError("newton_decrement_exact: need lambda > 0");
  const Eigen::VectorXd g = problem.gradient(x, lambda);
  const Eigen::MatrixXd h = problem.hessian_dense(x, lambda);
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) {
    throw SingularError("newton_decrement_exact: Hessian is not SPD");
  }
  return std::sqrt(std::max(0.0, g.dot(llt.solve(g))));
}

LsoResult relative_solve(const RegularizedObjective& problem, const Eigen::VectorXd& x, double mu,
                         const Eigen::VectorXd& rhs, const AnmConfig& config,
                         StepCounters* counters) {
  LsoResult sol;
  if (config.solver == AnmConfig::Solver::Exact) {
    sol = exact_solve(problem.hessian_dense(x, mu), rhs);
    if (counters != nullptr) {
      counters->inner_iters += 1;
      counters->passes += 1.0;  // one full pass assembles the Hessian
    }
  } else {
    const std::uint64_t step_index =
        counters != nullptr ? static_cast<std::uint64_t>(counters->solves) : 0;
    const auto precond_seed = SplitMix64::derive(config.seed, step_index);
    const Preconditioner precond =
        problem.build_preconditioner(x, mu, config.subsamples, config.sampling, precond_seed);
    sol = pcg_solve([&](const Eigen::VectorXd& v) { return problem.hessian_vec(x, mu, v); }, rhs,
                    precond, config.pcg_iters);
    if (counters != nullptr) {
      counters->inner_iters += sol.inner_iters;
      counters->passes += static_cast<double>(sol.inner_iters);
    }
  }
  if (counters != nullptr) counters->solves += 1;
  return sol;
}

Iterate anm_step(const RegularizedObjective& problem, const Iterate& it, const AnmConfig& config,
                 StepCounters* counters) {
  config.validate();
  const Eigen::VectorXd grad = it.gradient(it.mu);
  const LsoResult sol = relative_solve(problem, it.x, it.mu, grad, config, counters);

  Iterate next;
  next.x = it.x - sol.z;
  next.mu = it.mu;
  next.loss_grad = problem.loss_gradient(next.x);
  next.decrement_sq_estimate = sol.b_dot_z;
  return next;
}

Iterate anm_run(const RegularizedObjective& problem, const Eigen::VectorXd& x0, double mu, int t,
                const AnmConfig& config, StepCounters* counters) {
  if (t < 1) throw DomainError("anm_run: need t >= 1 steps");
  Iterate it = make_iterate(problem, x0, mu);
  for (int s = 0; s < t; ++s) it = anm_step(problem, it, config, counters);
  return it;
}

AnmUntilResult anm_run_until(const RegularizedObjective& problem, const Eigen::VectorXd& x0,
                             double lambda, double eps, const AnmConfig& config,
                             StepCounters* counters) {
  config.validate();
  if (!(eps > 0)) throw DomainError("anm_run_until: need eps > 0");
  StepCounters local;
  StepCounters* cnt = counters != nullptr ? counters : &local;

  Iterate it = make_iterate(problem, x0, lambda);
  for (int s = 0; s < config.max_steps; ++s) {
    const Eigen::VectorXd grad = it.gradient(lambda);
    const LsoResult sol = relative_solve(problem, it.x, lambda, grad, config, cnt);
    it.decrement_sq_estimate = sol.b_dot_z;
    if (sol.b_dot_z <= (6.0 / 7.0) * eps) {
      return {std::move(it), s + 1};
    }
    it.x -= sol.z;
    it.loss_grad = problem.loss_gradient(it.x);
  }
  SolveTrace trace;
  trace.lambda = lambda;
  trace.final_decrement_estimate = it.decrement_sq_estimate;
  trace.total_newton_steps = config.max_steps;
  throw ConvergenceError("anm_run_until: max_steps exceeded before reaching the target estimate",
                         std::move(trace));
}

DikinReport dikin_membership(const RegularizedObjective& problem, const Eigen::VectorXd& x,
                             double lambda, double c) {
  DikinReport rep;
  rep.decrement = newton_decrement_exact(problem, x, lambda);
  const double r = problem.radius();
  if (r == 0.0) {
    rep.vacuous = true;
    rep.member = true;
    rep.threshold = std::numeric_limits<double>::infinity();
    return rep;
  }
  rep.threshold = c * std::sqrt(lambda) / r;
  rep.member = rep.decrement <= rep.threshold;
  return rep;
}

Eigen::VectorXd newton_refine(const RegularizedObjective& problem, const Eigen::VectorXd& x0,
                              double lambda, double tol, int max_steps) {
  Eigen::VectorXd x = x0;
  for (int s = 0; s < max_steps; ++s) {
    const Eigen::VectorXd g = problem.gradient(x, lambda);
    const Eigen::MatrixXd h = problem.hessian_dense(x, lambda);
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) throw SingularError("newton_refine: Hessian not SPD");
    const Eigen::VectorXd step = llt.solve(g);
    const double nu = std::sqrt(std::max(0.0, g.dot(step)));
    x -= step;
    if (nu <= tol) return x;
  }
  return x;
}

GapBoundsReport function_gap_bounds_check(const RegularizedObjective& problem,
                                          const Eigen::VectorXd& x, double lambda) {
  GapBoundsReport rep;
  const DikinReport dikin = dikin_membership(problem, x, lambda, 1.0 / 7.0);
  rep.applicable = dikin.member;
  if (!rep.applicable) return rep;

  const double nu = dikin.decrement;
  rep.nu_sq = nu * nu;
  const Eigen::VectorXd xstar = newton_refine(problem, x, lambda);
  rep.gap = problem.value(x, lambda) - problem.value(xstar, lambda);
  const double slack = 1e-9 * (1.0 + rep.nu_sq);
  rep.pass = (0.25 * rep.nu_sq <= rep.gap + slack) && (rep.gap <= rep.nu_sq + slack);
  return rep;
}

}  // namespace gsc
