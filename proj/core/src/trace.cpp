#include "gsc/trace.hpp"

#include <cinttypes>
#include <cstdio>

namespace gsc {

namespace {

// Shortest round-trip double formatting; stable across runs.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void SolveTrace::write_csv(std::ostream& os, const std::vector<std::string>& header_lines) const {
  for (const auto& line : header_lines) os << "# " << line << "\n";
  os << csv_schema() << "\n";
  for (const auto& r : rows) {
    os << r.step << ',' << r.phase << ',' << fmt(r.mu) << ',' << fmt(r.q) << ','
       << fmt(r.decrement_estimate) << ',' << fmt(r.objective) << ',' << r.cum_inner_iters << ','
       << fmt(r.cum_passes) << ',' << fmt(r.wall_ms) << "\n";
  }
}

}  // namespace gsc
