#pragma once

#include <cstdint>

#include "gsc/problem.hpp"
#include "gsc/trace.hpp"

namespace gsc {

/// Variance-reduced first-order baseline: mini-batched SVRG, optionally
/// with Katyusha-style momentum (tau_2 = 1/2). A yardstick for the pass
/// comparisons, not a contribution; step size defaults to 1/(3 L) with
/// L = smoothness_bound() + lambda.
struct FoConfig {
  double step_size = 0.0;  ///< 0 = 1/(3L)
  Eigen::Index batch = 1;
  int epochs = 50;
  int inner_per_epoch = 0;  ///< 0 = ceil(n / batch)
  enum class Momentum { None, Katyusha } momentum = Momentum::None;
  std::uint64_t seed = 0;
  bool record_wall_clock = false;

  void validate() const;
};

struct FoResult {
  Eigen::VectorXd x;
  SolveTrace trace;
};

/// Runs the configured number of epochs on f_lambda. The trace records one
/// row per epoch; passes count one per full gradient and batch/n per batch
/// gradient evaluation. Throws NumericalError if the objective blows up
/// a thousandfold (step size too large).
FoResult fo_solve(const RegularizedObjective& problem, double lambda, const FoConfig& config);

}  // namespace gsc
