#include <benchmark/benchmark.h>

#include "gsc/data_io.hpp"
#include "gsc/globalization.hpp"
#include "gsc/nystrom.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace gsc;

namespace {

FiniteSumProblem make_logistic(Eigen::Index n, Eigen::Index d) {
  const Dataset data = synth_logistic(n, d, 0.5, 0.2, 1);
  return FiniteSumProblem(data.x, data.y, LossFamily::logistic());
}

ProjectedProblem make_projected(Eigen::Index n, Eigen::Index m) {
  const Dataset data = synth_two_moons(n, 0.12, 1);
  const auto kernel = KernelSpec::gaussian(0.8);
  const auto idx = select_centers(data.x, kernel, m, Sampling::Uniform, 0.0, 2);
  MatrixXd centers(m, 2);
  for (Eigen::Index j = 0; j < m; ++j) centers.row(j) = data.x.row(idx[static_cast<std::size_t>(j)]);
  auto factor = factor_T(kernel, centers);
  return ProjectedProblem(data.x, data.y, LossFamily::logistic(), kernel, std::move(centers),
                          std::move(factor));
}

void BM_gradient(benchmark::State& state) {
  const auto p = make_logistic(state.range(0), 50);
  const VectorXd x = VectorXd::Constant(50, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(p.gradient(x, 1e-4));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_gradient)->Range(1 << 10, 1 << 14)->Complexity(benchmark::oN);

void BM_hessian_vec(benchmark::State& state) {
  const auto p = make_logistic(state.range(0), 50);
  const VectorXd x = VectorXd::Constant(50, 0.1);
  const VectorXd v = VectorXd::Constant(50, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(p.hessian_vec(x, 1e-4, v));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_hessian_vec)->Range(1 << 10, 1 << 14)->Complexity(benchmark::oN);

void BM_projected_hvp(benchmark::State& state) {
  const auto pp = make_projected(4096, state.range(0));
  const VectorXd alpha = VectorXd::Zero(state.range(0));
  const VectorXd v = VectorXd::Constant(state.range(0), 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pp.hessian_vec(alpha, 1e-4, v));
  }
}
BENCHMARK(BM_projected_hvp)->Arg(32)->Arg(64)->Arg(128);

void BM_preconditioner(benchmark::State& state) {
  const auto pp = make_projected(4096, 64);
  const VectorXd alpha = VectorXd::Zero(64);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        compute_preconditioner(pp, alpha, 1e-4, state.range(0), Sampling::Uniform, ++seed));
  }
}
BENCHMARK(BM_preconditioner)->Arg(128)->Arg(256)->Arg(512);

void BM_factor_T(benchmark::State& state) {
  const Dataset data = synth_two_moons(state.range(0), 0.12, 3);
  const auto kernel = KernelSpec::gaussian(0.8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(factor_T(kernel, data.x));
  }
}
BENCHMARK(BM_factor_T)->Arg(64)->Arg(128)->Arg(256);

void BM_kernel_solve(benchmark::State& state) {
  const Dataset data = synth_two_moons(state.range(0), 0.12, 5);
  KernelSolveConfig cfg;
  cfg.centers = 50;
  cfg.scheme.epsilon = 1e-6;
  cfg.scheme.solver.solver = AnmConfig::Solver::Pcg;
  cfg.scheme.solver.subsamples = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel_solve(data.x, data.y, LossFamily::logistic(),
                                          KernelSpec::gaussian(0.8), 1e-4, cfg));
  }
}
BENCHMARK(BM_kernel_solve)->Arg(2048)->Arg(4096)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
