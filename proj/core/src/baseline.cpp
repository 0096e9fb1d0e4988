#include "gsc/baseline.hpp"

#include <chrono>
#include <cmath>

#include "gsc/rng.hpp"

namespace gsc {

void FoConfig::validate() const {
  if (step_size < 0) throw DomainError("FoConfig: step size must be positive (or 0 for auto)");
  if (batch < 1) throw DomainError("FoConfig: batch size must be >= 1");
  if (epochs < 1) throw DomainError("FoConfig: epochs must be >= 1");
  if (inner_per_epoch < 0) throw DomainError("FoConfig: inner_per_epoch must be >= 0");
}

FoResult fo_solve(const RegularizedObjective& problem, double lambda, const FoConfig& config) {
  config.validate();
  if (!(lambda > 0)) throw DomainError("fo_solve: need lambda > 0");

  const auto start = std::chrono::steady_clock::now();
  const auto n = problem.num_samples();
  const auto batch = std::min<Eigen::Index>(config.batch, n);
  const int inner =
      config.inner_per_epoch > 0
          ? config.inner_per_epoch
          : static_cast<int>((n + batch - 1) / batch);
  const double lips = problem.smoothness_bound() + lambda;
  const double eta = config.step_size > 0 ? config.step_size : 1.0 / (3.0 * lips);
  const bool katyusha = config.momentum == FoConfig::Momentum::Katyusha;

  // Standard Katyusha coefficients: tau_2 = 1/2 fixed,
  // tau_1 = min(sqrt(m sigma / (3 L)), 1/2) with sigma = lambda.
  const double tau1 =
      katyusha ? std::min(0.5, std::sqrt(static_cast<double>(inner) * lambda / (3.0 * lips))) : 0.0;
  const double tau2 = 0.5;
  const double z_step = katyusha ? 1.0 / (3.0 * tau1 * lips) : 0.0;

  SplitMix64 rng(config.seed);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(batch));

  Eigen::VectorXd x = Eigen::VectorXd::Zero(problem.dim());
  Eigen::VectorXd z = x;  // Katyusha mirror point
  Eigen::VectorXd y = x;  // Katyusha gradient point

  SolveTrace trace;
  trace.seed = config.seed;
  trace.lambda = lambda;
  trace.config_echo = katyusha ? "baseline=katyusha-svrg" : "baseline=svrg";
  double passes = 0.0;
  std::int64_t inner_total = 0;

  const double f0 = problem.value(x, lambda);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Eigen::VectorXd snapshot = katyusha ? y : x;
    const Eigen::VectorXd full_grad = problem.loss_gradient(snapshot);
    passes += 1.0;

    for (int step = 0; step < inner; ++step) {
      for (auto& r : rows) r = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
      if (katyusha) {
        const Eigen::VectorXd xk = tau1 * z + tau2 * snapshot + (1.0 - tau1 - tau2) * y;
        const Eigen::VectorXd g = problem.batch_loss_gradient(xk, rows) -
                                  problem.batch_loss_gradient(snapshot, rows) + full_grad +
                                  lambda * xk;
        z -= z_step * g;
        y = xk - (1.0 / (3.0 * lips)) * g;
      } else {
        const Eigen::VectorXd g = problem.batch_loss_gradient(x, rows) -
                                  problem.batch_loss_gradient(snapshot, rows) + full_grad +
                                  lambda * x;
        x -= eta * g;
      }
      passes += 2.0 * static_cast<double>(batch) / static_cast<double>(n);
      ++inner_total;
    }
    if (katyusha) x = y;

    const double obj = problem.value(x, lambda);
    const double wall = config.record_wall_clock
                            ? std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - start)
                                  .count()
                            : 0.0;
    trace.rows.push_back({epoch, "FO", lambda, 0.0, 0.0, obj, inner_total, passes, wall});
    if (!std::isfinite(obj) || obj > 1e3 * std::max(1.0, f0)) {
      trace.final_objective = obj;
      throw NumericalError("fo_solve: objective diverged, reduce the step size");
    }
  }

  trace.passes = passes;
  trace.inner_iters = inner_total;
  trace.final_objective = problem.value(x, lambda);
  trace.wall_ms_total =
      config.record_wall_clock
          ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count()
          : 0.0;
  return {std::move(x), std::move(trace)};
}

}  // namespace gsc
