#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "gsc/linsys.hpp"
#include "gsc/losses.hpp"

namespace gsc {

/// Dense Hessians are refused above this parameter dimension.
inline constexpr Eigen::Index kDenseGuard = 4096;

/// A regularized finite-sum objective f_mu(x) = f(x) + (mu/2)||x||^2 seen
/// through the oracles the Newton and first-order layers need. f itself is
/// generalized self-concordant with radius(). Implementations are immutable
/// after construction and safe to share across threads.
class RegularizedObjective {
 public:
  virtual ~RegularizedObjective() = default;

  virtual Eigen::Index dim() const = 0;
  virtual Eigen::Index num_samples() const = 0;
  /// Self-concordance radius R of the unregularized sum.
  virtual double radius() const = 0;
  /// Upper bound on the largest eigenvalue of any loss Hessian (no reg term).
  virtual double smoothness_bound() const = 0;

  virtual double loss_value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd loss_gradient(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd loss_hessian_vec(const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& v) const = 0;
  virtual Eigen::MatrixXd loss_hessian_dense(const Eigen::VectorXd& x) const = 0;
  /// Mean of per-sample loss gradients over the given rows (no reg term).
  virtual Eigen::VectorXd batch_loss_gradient(const Eigen::VectorXd& x,
                                              std::span<const Eigen::Index> rows) const = 0;
  /// Upper-triangular B with B^T B a subsampled estimate of the mu-Hessian.
  virtual Preconditioner build_preconditioner(const Eigen::VectorXd& x, double mu,
                                              Eigen::Index subsamples, Sampling sampling,
                                              std::uint64_t seed) const = 0;

  double value(const Eigen::VectorXd& x, double mu) const {
    return loss_value(x) + 0.5 * mu * x.squaredNorm();
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x, double mu) const {
    return loss_gradient(x) + mu * x;
  }
  Eigen::VectorXd hessian_vec(const Eigen::VectorXd& x, double mu,
                              const Eigen::VectorXd& v) const {
    return loss_hessian_vec(x, v) + mu * v;
  }
  Eigen::MatrixXd hessian_dense(const Eigen::VectorXd& x, double mu) const {
    if (dim() > kDenseGuard) {
      throw CapacityError("hessian_dense: parameter dimension exceeds the dense guard");
    }
    Eigen::MatrixXd h = loss_hessian_dense(x);
    h.diagonal().array() += mu;
    return h;
  }
};

/// The parametric finite-sum problem (1/n) sum_i l(w_i.x, y_i): feature rows
/// W, labels y, a loss family, and the derived self-concordance radius
/// R = R_l * max_i ||w_i||. Softmax parameters live in R^{d x k}, flattened
/// column by column (column j = weights of class j).
class FiniteSumProblem final : public RegularizedObjective {
 public:
  /// Logistic/robust labels may arrive as {0,1}; they are normalized to
  /// {-1,+1} here. radius_override replaces the derived R (used for
  /// diagnostics on degenerate fixtures and softmax calibration).
  FiniteSumProblem(Eigen::MatrixXd features, Eigen::VectorXd labels, LossFamily loss,
                   std::optional<double> radius_override = std::nullopt);

  const Eigen::MatrixXd& features() const { return w_; }
  const Eigen::VectorXd& labels() const { return y_; }
  const LossFamily& loss() const { return loss_; }
  double max_row_norm() const { return max_row_norm_; }
  bool labels_remapped() const { return labels_remapped_; }

  Eigen::Index dim() const override;
  Eigen::Index num_samples() const override { return w_.rows(); }
  double radius() const override { return radius_; }
  double smoothness_bound() const override {
    return loss_.smoothness() * max_row_norm_ * max_row_norm_;
  }

  double loss_value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd loss_gradient(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd loss_hessian_vec(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& v) const override;
  Eigen::MatrixXd loss_hessian_dense(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd batch_loss_gradient(const Eigen::VectorXd& x,
                                      std::span<const Eigen::Index> rows) const override;
  Preconditioner build_preconditioner(const Eigen::VectorXd& x, double mu,
                                      Eigen::Index subsamples, Sampling sampling,
                                      std::uint64_t seed) const override;

 private:
  void check_dim(const Eigen::VectorXd& x) const;

  Eigen::MatrixXd w_;
  Eigen::VectorXd y_;
  LossFamily loss_;
  double max_row_norm_ = 0.0;
  double radius_ = 0.0;
  bool labels_remapped_ = false;
};

/// R = R_l * max_i ||w_i||; 0 for the quadratic family.
double gsc_radius(const FiniteSumProblem& problem);

/// Subsampled-Hessian preconditioner for the parametric problem:
/// B^T B = (1/Q) sum_j weight_j l''_{i_j} w_{i_j} w_{i_j}^T + mu I, with
/// unit weights for uniform sampling (Q = n degenerates to the exact
/// mu-Hessian) and 1/(n p_i) weights for leverage-score sampling.
Preconditioner build_subsampled_preconditioner(const FiniteSumProblem& problem,
                                               const Eigen::VectorXd& x, double mu,
                                               Eigen::Index subsamples, Sampling sampling,
                                               std::uint64_t seed);

struct GscCheckReport {
  double third_derivative = 0.0;  ///< directional estimate d/ds k.H(x+s h)k
  double quadratic_form = 0.0;    ///< k.H(x)k
  double bound = 0.0;             ///< R ||h|| k.H(x)k
  double ratio = 0.0;             ///< third_derivative / (||h|| k.H(x)k)
  bool vacuous = false;           ///< radius 0, nothing to check
  bool pass = false;
};

/// Finite-difference check of the defining inequality
/// d^3 f(x)[h,k,k] <= R ||h|| * k.H(x)k, with relative slack `tol`.
GscCheckReport check_gsc_inequality(const RegularizedObjective& problem,
                                    const Eigen::VectorXd& x, const Eigen::VectorXd& h,
                                    const Eigen::VectorXd& k_dir, double tol = 1e-3);

}  // namespace gsc
