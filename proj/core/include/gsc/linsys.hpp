#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "gsc/errors.hpp"

namespace gsc {

/// Row-sampling strategies for subsampled operators.
enum class Sampling { Uniform, LeverageScores };

/// Largest n for which exact leverage scores are computed directly; larger
/// sets are reduced to a uniform candidate subset of this size first.
inline constexpr Eigen::Index kLeverageExactCap = 2000;

/// An approximate linear-system solution z ~= A^{-1} b together with its
/// relative-error certificate in the A-norm. rho_bound = 0 means the solve
/// was exact up to machine precision. b_dot_z is kept because it estimates
/// ||b||^2_{A^{-1}} within a factor (1 +- rho), which the Newton layer uses
/// as its decrement estimate.
struct LsoResult {
  Eigen::VectorXd z;
  double rho_bound = 0.0;
  int inner_iters = 0;
  double b_dot_z = 0.0;
};

/// Upper-triangular factor B with B^T B SPD, used as a PCG preconditioner.
/// Immutable after construction; triangular applications are O(M^2).
class Preconditioner {
 public:
  Preconditioner() = default;
  Preconditioner(Eigen::MatrixXd upper, double mu, Eigen::Index subsamples)
      : b_(std::move(upper)), mu_(mu), subsamples_(subsamples) {}

  const Eigen::MatrixXd& upper() const { return b_; }
  double mu() const { return mu_; }
  Eigen::Index subsamples() const { return subsamples_; }
  Eigen::Index dim() const { return b_.rows(); }

  /// B^{-1} v.
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const {
    return b_.triangularView<Eigen::Upper>().solve(v);
  }
  /// B^{-T} v.
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& v) const {
    return b_.transpose().triangularView<Eigen::Lower>().solve(v);
  }

 private:
  Eigen::MatrixXd b_;
  double mu_ = 0.0;
  Eigen::Index subsamples_ = 0;
};

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Dense Cholesky solve; the oracle path for small systems.
LsoResult exact_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

/// Conjugate gradient from the zero vector for `iters` iterations. The
/// certificate is the classical rate 2((sqrt(k)-1)/(sqrt(k)+1))^iters for a
/// caller-supplied condition-number bound.
LsoResult cg_solve(const LinearOperator& apply_a, const Eigen::VectorXd& b, int iters,
                   double cond_bound);

/// CG on the split-preconditioned system B^{-T} A B^{-1} z = B^{-T} b,
/// returning x = B^{-1} z_tau. Under the spectral sandwich
/// (1/2) B^T B <= A <= (3/2) B^T B the preconditioned condition number is at
/// most 3, so rho_bound = 2((sqrt(3)-1)/(sqrt(3)+1))^tau; tau = 3 already
/// gives a 1/7-approximation.
LsoResult pcg_solve(const LinearOperator& apply_a, const Eigen::VectorXd& b,
                    const Preconditioner& precond, int tau);

/// Membership test for the set of rho-relative approximations of A^{-1} b:
/// computes z* exactly (dense) and checks ||z - z*||_A <= rho ||z*||_A.
bool lso_check(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& z,
               double rho);

/// Ridge leverage scores at level t > 0 from the Gram matrix:
/// l_i(t) = n ((G + t n I)^{-1} G)_{ii}. Their sum is the effective
/// dimension of the empirical operator at level t.
Eigen::VectorXd leverage_scores(const Eigen::MatrixXd& gram, double t);

/// Same from feature rows V (G = V V^T).
Eigen::VectorXd leverage_scores_from_rows(const Eigen::MatrixXd& rows, double t);

}  // namespace gsc
