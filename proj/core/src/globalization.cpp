#include "gsc/globalization.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace gsc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string echo_config(const GlobalizationConfig& cfg) {
  std::ostringstream os;
  os << "q_rule=";
  switch (cfg.q_rule) {
    case QRule::Adaptive: os << "adaptive"; break;
    case QRule::AdaptiveVariant: os << "adaptive-variant"; break;
    case QRule::Fixed: os << "fixed(" << cfg.fixed_q << ")"; break;
  }
  os << ",t=" << cfg.t << ",rho=" << cfg.solver.rho << ",eps=" << cfg.epsilon << ",solver="
     << (cfg.solver.solver == AnmConfig::Solver::Exact ? "exact" : "pcg");
  if (cfg.solver.solver == AnmConfig::Solver::Pcg) {
    os << ",tau=" << cfg.solver.pcg_iters << ",Q=" << cfg.solver.subsamples << ",sampling="
       << (cfg.solver.sampling == Sampling::Uniform ? "uniform" : "leverage");
  }
  os << ",phase2=" << (cfg.phase2 == Phase2Mode::FixedCount ? "fixed-T" : "certified")
     << ",seed=" << cfg.solver.seed;
  return os.str();
}

}  // namespace

void GlobalizationConfig::validate() const {
  solver.validate();
  if (!(epsilon > 0)) throw DomainError("GlobalizationConfig: epsilon must be positive");
  if (q_rule == QRule::Fixed) {
    if (!(fixed_q > 0.0 && fixed_q < 1.0)) {
      throw DomainError("GlobalizationConfig: fixed q must lie in (0,1)");
    }
    if (t < 1) throw DomainError("GlobalizationConfig: t must be >= 1");
  } else if (t < 2) {
    throw DomainError("GlobalizationConfig: adaptive q rules need t >= 2");
  }
  if (mu0_override && !(*mu0_override > 0)) {
    throw DomainError("GlobalizationConfig: mu0 override must be positive");
  }
}

double initial_mu(const RegularizedObjective& problem) {
  if (problem.radius() == 0.0) return 0.0;
  const Eigen::VectorXd g0 = problem.loss_gradient(Eigen::VectorXd::Zero(problem.dim()));
  return 7.0 * problem.radius() * g0.norm();
}

double adaptive_q(const Eigen::VectorXd& x, double radius) {
  if (radius < 0) throw DomainError("adaptive_q: radius must be nonnegative");
  const double s = 7.0 * radius * x.norm();
  return (1.0 / 3.0 + s) / (1.0 + s);
}

double adaptive_q_variant(const RegularizedObjective& problem, const Eigen::VectorXd& x, double mu,
                          const AnmConfig& solver, StepCounters* counters) {
  if (!(mu > 0)) throw DomainError("adaptive_q_variant: need mu > 0");
  const double xs = x.squaredNorm() == 0.0
                        ? 0.0
                        : std::max(0.0, relative_solve(problem, x, mu, x, solver, counters).b_dot_z);
  const double t = 7.0 * std::sqrt(7.0 / 6.0) * problem.radius() * std::sqrt(mu) * std::sqrt(xs);
  return (1.0 / 3.0 + t) / (1.0 + t);
}

InclusionReport next_mu_inclusion_check(const RegularizedObjective& problem,
                                        const Eigen::VectorXd& x, double mu, double c, double q) {
  InclusionReport rep;
  const double r = problem.radius();
  if (r == 0.0 || !(q > 0.0 && q < 1.0) || !(c > 0.0)) {
    rep.applicable = false;
    return rep;
  }
  rep.nu_before = newton_decrement_exact(problem, x, mu);
  const double s = 1.0 + r * x.norm() / c;
  rep.q_floor = 1.0 - 2.0 / (3.0 * s);
  const bool in_small = rep.nu_before <= (c / 3.0) * std::sqrt(mu) / r;
  rep.applicable = in_small && q >= rep.q_floor;
  if (!rep.applicable) return rep;
  rep.nu_after = newton_decrement_exact(problem, x, q * mu);
  rep.pass = rep.nu_after <= c * std::sqrt(q * mu) / r * (1.0 + 1e-12);
  return rep;
}

double effective_dimension(const RegularizedObjective& problem, const Eigen::VectorXd& x,
                           double lambda) {
  const Eigen::MatrixXd h = problem.loss_hessian_dense(x);
  Eigen::MatrixXd hl = h;
  hl.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(hl);
  if (llt.info() != Eigen::Success) throw SingularError("effective_dimension: H_lambda not SPD");
  return llt.solve(h).trace();
}

SolveResult solve(const RegularizedObjective& problem, double lambda,
                  const GlobalizationConfig& config) {
  config.validate();
  if (!(lambda > 0)) throw DomainError("solve: need lambda > 0");

  const auto start = Clock::now();
  const double radius = problem.radius();

  SolveTrace trace;
  trace.seed = config.solver.seed;
  trace.config_echo = echo_config(config);
  trace.lambda = lambda;

  StepCounters counters;
  auto wall = [&]() { return config.record_wall_clock ? elapsed_ms(start) : 0.0; };

  const double mu0 = config.mu0_override.value_or(initial_mu(problem));
  trace.mu0 = mu0;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(problem.dim());
  double last_estimate = 0.0;

  // Phase I: shrink mu from mu0 down to lambda. Skipped when the start is
  // already inside the target ellipsoid (mu0 <= lambda covers the zero-
  // gradient sentinel) or the problem is quadratic.
  if (radius > 0.0 && mu0 > lambda) {
    double mu = mu0;
    for (int k = 0;; ++k) {
      const int cap = config.max_outer > 0
                          ? config.max_outer
                          : 10 * std::max(1, static_cast<int>(std::floor(
                                                 (3.0 + 11.0 * radius * x.norm()) *
                                                 std::log(mu0 / lambda))));
      if (k >= cap) {
        trace.final_objective = problem.value(x, lambda);
        trace.wall_ms_total = elapsed_ms(start);
        throw ConvergenceError("globalization: outer iteration cap exceeded in phase I",
                               std::move(trace));
      }

      const Iterate it = anm_run(problem, x, mu, config.t, config.solver, &counters);
      x = it.x;
      last_estimate = it.decrement_sq_estimate;
      trace.phase1_runs += 1;
      trace.total_newton_steps += config.t;
      if (config.phase1_observer) config.phase1_observer(k, mu, x);

      double q = 0.0;
      switch (config.q_rule) {
        case QRule::Adaptive: q = adaptive_q(x, radius); break;
        case QRule::AdaptiveVariant:
          q = adaptive_q_variant(problem, x, mu, config.solver, &counters);
          break;
        case QRule::Fixed: q = config.fixed_q; break;
      }

      trace.rows.push_back({k, "I", mu, q, last_estimate, problem.value(x, mu),
                            counters.inner_iters, counters.passes, wall()});

      const double mu_next = q * mu;
      if (mu_next < lambda) {
        trace.stopping_index = k;
        break;
      }
      mu = mu_next;
    }
  }

  // Phase II at lambda. The fixed iteration count from the adaptive scheme
  // needs R > 0; quadratic problems use the certified stopping rule, whose
  // estimate is exact for them.
  Iterate it = make_iterate(problem, x, lambda);
  const bool certified = config.phase2 == Phase2Mode::Certified || radius == 0.0;
  int phase2_step = 0;
  if (certified) {
    for (;; ++phase2_step) {
      if (phase2_step >= config.solver.max_steps) {
        trace.final_objective = problem.value(it.x, lambda);
        trace.wall_ms_total = elapsed_ms(start);
        throw ConvergenceError("globalization: certified phase II exceeded max_steps",
                               std::move(trace));
      }
      const Eigen::VectorXd grad = it.gradient(lambda);
      const LsoResult sol = relative_solve(problem, it.x, lambda, grad, config.solver, &counters);
      it.decrement_sq_estimate = sol.b_dot_z;
      if (sol.b_dot_z <= (6.0 / 7.0) * config.epsilon) {
        trace.rows.push_back({phase2_step, "II", lambda, 0.0, it.decrement_sq_estimate,
                              problem.value(it.x, lambda), counters.inner_iters, counters.passes,
                              wall()});
        break;
      }
      it.x -= sol.z;
      it.loss_grad = problem.loss_gradient(it.x);
      trace.total_newton_steps += 1;
      trace.rows.push_back({phase2_step, "II", lambda, 0.0, it.decrement_sq_estimate,
                            problem.value(it.x, lambda), counters.inner_iters, counters.passes,
                            wall()});
    }
  } else {
    const double ratio = lambda / (config.epsilon * radius * radius);
    const int t_final =
        static_cast<int>(std::ceil(std::log2(std::sqrt(std::max(1.0, ratio)))));
    for (; phase2_step < t_final; ++phase2_step) {
      it = anm_step(problem, it, config.solver, &counters);
      trace.total_newton_steps += 1;
      trace.rows.push_back({phase2_step, "II", lambda, 0.0, it.decrement_sq_estimate,
                            problem.value(it.x, lambda), counters.inner_iters, counters.passes,
                            wall()});
    }
  }

  trace.inner_iters = counters.inner_iters;
  trace.passes = counters.passes;
  trace.final_objective = problem.value(it.x, lambda);
  trace.final_decrement_estimate = it.decrement_sq_estimate;
  trace.wall_ms_total = config.record_wall_clock ? elapsed_ms(start) : 0.0;
  return {std::move(it.x), std::move(trace)};
}

}  // namespace gsc
