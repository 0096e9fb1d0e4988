#pragma once

#include <Eigen/Dense>

#include "gsc/data_io.hpp"
#include "gsc/problem.hpp"
#include "gsc/rng.hpp"

namespace testsup {

/// Independent minimizer oracle: damped Newton with Armijo backtracking and
/// dense Cholesky solves. Deliberately shares nothing with the production
/// scheme (no Dikin reasoning, no relative solves, line search instead).
Eigen::VectorXd damped_newton_minimize(const gsc::RegularizedObjective& problem, double lambda,
                                       double tol = 1e-14, int max_iters = 500);

/// Central-difference gradient of f_lambda.
Eigen::VectorXd fd_gradient(const gsc::RegularizedObjective& problem, const Eigen::VectorXd& x,
                            double lambda, double eps = 1e-6);

/// Dense Newton decrement, computed locally (not via the production code).
double dense_decrement(const gsc::RegularizedObjective& problem, const Eigen::VectorXd& x,
                       double lambda);

/// Worst-case rho-certified approximate Newton step: the exact step plus a
/// perturbation of Hessian-norm rho * nu in a random direction. Always a
/// member of the rho-relative approximation set, at its boundary.
Eigen::VectorXd adversarial_relative_step(const Eigen::MatrixXd& h_reg, const Eigen::VectorXd& grad,
                                          double rho, gsc::SplitMix64& rng);

/// Generalized eigenvalues of (A, B) with B SPD, ascending.
Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Small deterministic logistic fixture (n=8, d=2) used for golden values.
gsc::FiniteSumProblem golden_logistic_fixture();

/// Random logistic problem with standardized-ish gaussian features.
gsc::FiniteSumProblem random_logistic(Eigen::Index n, Eigen::Index d, std::uint64_t seed,
                                      double margin = 0.5, double noise = 0.2);

/// A point inside D_lambda(c): the oracle optimum plus a scaled random
/// direction, shrunk until the dense decrement clears the threshold.
Eigen::VectorXd dikin_point(const gsc::RegularizedObjective& problem, double lambda, double c,
                            gsc::SplitMix64& rng, double target_fraction = 0.8);

}  // namespace testsup
