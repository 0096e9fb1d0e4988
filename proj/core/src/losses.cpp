#include "gsc/losses.hpp"

#include <cmath>

namespace gsc {

namespace {

// sigmoid(z) = 1/(1+e^-z) without overflow on either tail.
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z), linear branch for large z.
double log1p_exp(double z) {
  if (z > 0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

// sech^2(u) = 4 e^{-2|u|} / (1 + e^{-2|u|})^2.
double sech_sq(double u) {
  const double e = std::exp(-2.0 * std::abs(u));
  const double d = 1.0 + e;
  return 4.0 * e / (d * d);
}

}  // namespace

const char* LossFamily::name() const {
  switch (kind_) {
    case LossKind::Logistic: return "logistic";
    case LossKind::Softmax: return "softmax";
    case LossKind::RobustRegression: return "robust";
    case LossKind::Squared: return "squared";
  }
  return "unknown";
}

ScalarLossEval loss_eval(const LossFamily& family, double t, double y) {
  if (!std::isfinite(t) || !std::isfinite(y)) {
    throw DomainError("loss_eval: non-finite input");
  }
  switch (family.kind()) {
    case LossKind::Logistic: {
      // l(t) = log(1 + e^{-y t}), labels in {-1,+1}. The curvature is the
      // product of the two sigmoids; computing it that way keeps full
      // relative precision deep in the tails.
      const double z = -y * t;
      return {log1p_exp(z), -y * sigmoid(z), sigmoid(z) * sigmoid(-z)};
    }
    case LossKind::RobustRegression: {
      // l(t) = phi(y - t) with phi(u) = log(e^u + e^{-u}).
      const double u = y - t;
      const double value = std::abs(u) + std::log1p(std::exp(-2.0 * std::abs(u)));
      return {value, -std::tanh(u), std::max(0.0, sech_sq(u))};
    }
    case LossKind::Squared: {
      const double r = t - y;
      return {0.5 * r * r, r, 1.0};
    }
    case LossKind::Softmax:
      throw DomainError("loss_eval: softmax is not a scalar family, use softmax_eval");
  }
  throw DomainError("loss_eval: unknown loss kind");
}

SoftmaxEval softmax_eval(const Eigen::VectorXd& scores, int y) {
  const auto k = scores.size();
  if (k < 2) throw DomainError("softmax_eval: need k >= 2 scores");
  if (y < 1 || y > k) throw DomainError("softmax_eval: label out of 1..k");
  if (!scores.allFinite()) throw DomainError("softmax_eval: non-finite scores");

  const double m = scores.maxCoeff();
  Eigen::VectorXd p = (scores.array() - m).exp();
  const double total = p.sum();
  p /= total;

  SoftmaxEval out;
  out.value = m + std::log(total) - scores[y - 1];
  out.grad = p;
  out.grad[y - 1] -= 1.0;
  out.probs = std::move(p);
  return out;
}

Eigen::VectorXd softmax_hvp(const Eigen::VectorXd& probs, const Eigen::VectorXd& v) {
  if (probs.size() != v.size()) throw DimensionError("softmax_hvp: size mismatch");
  const double pv = probs.dot(v);
  return probs.array() * (v.array() - pv);
}

}  // namespace gsc
