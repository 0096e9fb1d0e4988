#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "gsc/errors.hpp"

namespace gsc {

/// One audit row per outer step (phase I), Newton step (phase II) or epoch
/// (first-order baseline). Columns not applicable to a phase are zero.
struct TraceRow {
  int step = 0;
  std::string phase;  // "I", "II" or "FO"
  double mu = 0.0;
  double q = 0.0;
  double decrement_estimate = 0.0;  // grad . step of the last solve
  double objective = 0.0;
  std::int64_t cum_inner_iters = 0;
  double cum_passes = 0.0;
  double wall_ms = 0.0;
};

/// Full audit record of one solve. Passes follow the CG convention: one CG
/// iteration of the second-order method is one pass; the baseline counts
/// batch gradients as batch/n passes and full gradients as one pass.
struct SolveTrace {
  std::vector<TraceRow> rows;

  int phase1_runs = 0;          ///< number of inner ANM(t) calls in phase I
  int stopping_index = 0;       ///< K: last phase-I index with mu_K >= lambda
  int total_newton_steps = 0;   ///< approximate Newton steps over both phases
  std::int64_t inner_iters = 0;
  double passes = 0.0;
  std::uint64_t seed = 0;
  std::string config_echo;
  double mu0 = 0.0;
  double lambda = 0.0;
  double final_objective = 0.0;
  double final_decrement_estimate = 0.0;
  double wall_ms_total = 0.0;

  static const char* csv_schema() {
    return "step,phase,mu,q,decrement_estimate,objective,cum_inner_iters,cum_passes,wall_ms";
  }

  /// Writes the trace as CSV. `header_lines` are emitted first as '#'
  /// comments (run spec echo, seed, artifact version).
  void write_csv(std::ostream& os, const std::vector<std::string>& header_lines = {}) const;
};

/// Solver failed to converge within its safety cap; the partial trace rides
/// along for postmortems.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, SolveTrace trace)
      : Error(what), trace_(std::move(trace)) {}
  const SolveTrace& trace() const { return trace_; }

 private:
  SolveTrace trace_;
};

}  // namespace gsc
