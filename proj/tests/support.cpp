#include "support.hpp"

#include <cmath>

namespace testsup {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd damped_newton_minimize(const gsc::RegularizedObjective& problem, double lambda,
                                double tol, int max_iters) {
  VectorXd x = VectorXd::Zero(problem.dim());
  double fx = problem.value(x, lambda);
  for (int it = 0; it < max_iters; ++it) {
    const VectorXd g = problem.gradient(x, lambda);
    const MatrixXd h = problem.hessian_dense(x, lambda);
    const Eigen::LLT<MatrixXd> llt(h);
    const VectorXd step = llt.solve(g);
    const double nu_sq = g.dot(step);
    if (nu_sq <= tol * tol) return x;

    double t = 1.0;
    for (int back = 0; back < 70; ++back) {
      const VectorXd cand = x - t * step;
      const double fc = problem.value(cand, lambda);
      if (fc <= fx - 0.25 * t * nu_sq) {
        x = cand;
        fx = fc;
        break;
      }
      t *= 0.5;
    }
  }
  return x;
}

VectorXd fd_gradient(const gsc::RegularizedObjective& problem, const VectorXd& x, double lambda,
                     double eps) {
  VectorXd g(x.size());
  VectorXd e = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double backup = e[j];
    e[j] = backup + eps;
    const double fp = problem.value(e, lambda);
    e[j] = backup - eps;
    const double fm = problem.value(e, lambda);
    e[j] = backup;
    g[j] = (fp - fm) / (2.0 * eps);
  }
  return g;
}

double dense_decrement(const gsc::RegularizedObjective& problem, const VectorXd& x,
                       double lambda) {
  const VectorXd g = problem.gradient(x, lambda);
  const MatrixXd h = problem.hessian_dense(x, lambda);
  return std::sqrt(std::max(0.0, g.dot(Eigen::LLT<MatrixXd>(h).solve(g))));
}

VectorXd adversarial_relative_step(const MatrixXd& h_reg, const VectorXd& grad, double rho,
                                   gsc::SplitMix64& rng) {
  const Eigen::LLT<MatrixXd> llt(h_reg);
  const VectorXd exact = llt.solve(grad);
  const double nu = std::sqrt(std::max(0.0, grad.dot(exact)));
  VectorXd dir(grad.size());
  for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = rng.normal();
  const double hn = std::sqrt(std::max(1e-300, dir.dot(h_reg * dir)));
  return exact + (rho * nu * (1.0 - 1e-9) / hn) * dir;
}

VectorXd generalized_eigenvalues(const MatrixXd& a, const MatrixXd& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> solver(a, b, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  return solver.eigenvalues();
}

gsc::FiniteSumProblem golden_logistic_fixture() {
  MatrixXd w(8, 2);
  w << 1.0, 0.5, -0.3, 1.2, 0.8, -0.7, -1.1, -0.4, 0.2, 0.9, -0.6, 0.3, 1.3, 0.1, -0.2, -1.0;
  VectorXd y(8);
  y << 1, -1, 1, -1, 1, -1, 1, -1;
  return gsc::FiniteSumProblem(std::move(w), std::move(y), gsc::LossFamily::logistic());
}

gsc::FiniteSumProblem random_logistic(Eigen::Index n, Eigen::Index d, std::uint64_t seed,
                                      double margin, double noise) {
  const gsc::Dataset data = gsc::synth_logistic(n, d, margin, noise, seed);
  return gsc::FiniteSumProblem(data.x, data.y, gsc::LossFamily::logistic());
}

VectorXd dikin_point(const gsc::RegularizedObjective& problem, double lambda, double c,
                     gsc::SplitMix64& rng, double target_fraction) {
  const VectorXd xstar = damped_newton_minimize(problem, lambda);
  const double threshold = c * std::sqrt(lambda) / problem.radius();
  VectorXd dir(problem.dim());
  for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = rng.normal();
  dir.normalize();
  double scale = 1.0;
  for (int halvings = 0; halvings < 200; ++halvings) {
    const VectorXd cand = xstar + scale * dir;
    if (dense_decrement(problem, cand, lambda) <= target_fraction * threshold) return cand;
    scale *= 0.5;
  }
  return xstar;
}

}  // namespace testsup
