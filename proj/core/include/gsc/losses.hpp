#pragma once

#include <Eigen/Dense>

#include "gsc/errors.hpp"

namespace gsc {

enum class LossKind { Logistic, Softmax, RobustRegression, Squared };

/// A loss family together with the two constants the second-order analysis
/// needs: gsc_constant sup |l'''|/l'' and smoothness sup l''.
///
/// Logistic and robust regression have gsc_constant 1; the squared loss is
/// quadratic (constant 0) and is carried as the degenerate baseline family.
/// Softmax ships with a calibrated default of 2, overridable at
/// construction; the calibration test pins the shipped value.
class LossFamily {
 public:
  static LossFamily logistic() { return LossFamily(LossKind::Logistic, 1, 1.0, 0.25); }
  static LossFamily robust_regression() {
    return LossFamily(LossKind::RobustRegression, 1, 1.0, 1.0);
  }
  static LossFamily squared() { return LossFamily(LossKind::Squared, 1, 0.0, 1.0); }
  static LossFamily softmax(int classes, double gsc_constant = 2.0) {
    if (classes < 2) throw DomainError("softmax requires k >= 2 classes");
    if (gsc_constant < 0) throw DomainError("gsc_constant must be nonnegative");
    return LossFamily(LossKind::Softmax, classes, gsc_constant, 0.5);
  }

  LossKind kind() const { return kind_; }
  int classes() const { return classes_; }
  bool is_scalar() const { return kind_ != LossKind::Softmax; }
  /// sup_t |l'''(t)| / l''(t); 0 for quadratics.
  double gsc_constant() const { return gsc_constant_; }
  /// sup_t l''(t).
  double smoothness() const { return smoothness_; }

  const char* name() const;

 private:
  LossFamily(LossKind kind, int classes, double r, double a)
      : kind_(kind), classes_(classes), gsc_constant_(r), smoothness_(a) {}

  LossKind kind_;
  int classes_;
  double gsc_constant_;
  double smoothness_;
};

struct ScalarLossEval {
  double value;
  double d1;
  double d2;
};

/// Value and first two score derivatives of a scalar loss family at score t
/// with label y. Log-sum-exp formulations keep everything finite for |t| up
/// to ~700.
ScalarLossEval loss_eval(const LossFamily& family, double t, double y);

struct SoftmaxEval {
  double value;
  Eigen::VectorXd grad;   // p - e_y
  Eigen::VectorXd probs;  // softmax probabilities, for Hessian products
};

/// Softmax loss at a score vector with 1-based class label y.
SoftmaxEval softmax_eval(const Eigen::VectorXd& scores, int y);

/// (diag(p) - p p^T) v, the softmax score-space Hessian product.
Eigen::VectorXd softmax_hvp(const Eigen::VectorXd& probs, const Eigen::VectorXd& v);

}  // namespace gsc
