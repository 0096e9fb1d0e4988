#pragma once

#include <functional>
#include <optional>

#include "gsc/newton.hpp"
#include "gsc/trace.hpp"

namespace gsc {

enum class QRule { Adaptive, AdaptiveVariant, Fixed };
enum class Phase2Mode { FixedCount, Certified };

/// Parameters of the two-phase scheme: phase I shrinks the regularizer from
/// mu0 = 7 R ||grad f(0)|| down to lambda by factors q while an inner
/// t-step approximate Newton run keeps the iterate inside each Dikin
/// ellipsoid; phase II polishes at lambda.
struct GlobalizationConfig {
  QRule q_rule = QRule::Adaptive;
  double fixed_q = 0.0;  ///< required in (0,1) for QRule::Fixed
  int t = 2;             ///< inner Newton steps per mu; the adaptive rules need 2
  double epsilon = 1e-8;
  std::optional<double> mu0_override;
  int max_outer = 0;  ///< 0 = automatic cap (10x the adaptive K bound)
  Phase2Mode phase2 = Phase2Mode::FixedCount;
  AnmConfig solver;  ///< rho, solver kind, preconditioner parameters, seed
  bool record_wall_clock = false;  ///< off keeps output files byte-reproducible
  /// Diagnostic hook called after each phase-I outer step with (k, mu_k,
  /// x_{k+1}); lets dense fixtures audit the loop invariant.
  std::function<void(int, double, const Eigen::VectorXd&)> phase1_observer;

  void validate() const;
};

struct SolveResult {
  Eigen::VectorXd x;
  SolveTrace trace;
};

/// mu0 = 7 R ||grad f(0)||, which puts 0 inside D_mu0(1/7). Returns 0 when
/// the gradient at zero vanishes (phase I can be skipped: zero is optimal
/// for every regularizer direction) and when R = 0.
double initial_mu(const RegularizedObjective& problem);

/// q = (1/3 + 7 R ||x||) / (1 + 7 R ||x||), in [1/3, 1).
double adaptive_q(const Eigen::VectorXd& x, double radius);

/// Variant that measures x in the inverse-Hessian norm through one extra
/// relative solve s ~= H_mu(x)^{-1} x: q = (1/3 + t)/(1 + t) with
/// t = 7 sqrt(7/6) R sqrt(mu) sqrt(x . s). Never larger than needed when the
/// Hessian is well conditioned along x.
double adaptive_q_variant(const RegularizedObjective& problem, const Eigen::VectorXd& x, double mu,
                          const AnmConfig& solver, StepCounters* counters = nullptr);

struct InclusionReport {
  bool applicable = false;  ///< hypotheses held (x in D_mu(c/3), q >= 1 - 2/(3s))
  bool pass = false;
  double nu_before = 0.0;  ///< nu_mu(x)
  double nu_after = 0.0;   ///< nu_{q mu}(x)
  double q_floor = 0.0;    ///< 1 - 2/(3s), s = 1 + R||x||/c
};

/// Dense check that D_mu(c/3) is contained in D_{q mu}(c) for admissible q.
InclusionReport next_mu_inclusion_check(const RegularizedObjective& problem,
                                        const Eigen::VectorXd& x, double mu, double c, double q);

/// Two-phase solve of f_lambda to objective gap <= epsilon (under the
/// scheme's hypotheses). The trace records every outer step, the q
/// sequence, the stopping index K and cumulative solver costs.
SolveResult solve(const RegularizedObjective& problem, double lambda,
                  const GlobalizationConfig& config);

/// df_lambda = tr(H(x) H_lambda(x)^{-1}): the count of loss-Hessian
/// eigenvalues above lambda. Dense diagnostic.
double effective_dimension(const RegularizedObjective& problem, const Eigen::VectorXd& x,
                           double lambda);

}  // namespace gsc
