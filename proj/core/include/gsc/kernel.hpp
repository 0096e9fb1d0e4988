#pragma once

#include <Eigen/Dense>

#include "gsc/errors.hpp"

namespace gsc {

struct KernelSpec {
  enum class Kind { Gaussian, Linear } kind = Kind::Gaussian;
  double sigma = 1.0;

  static KernelSpec gaussian(double sigma) {
    if (!(sigma > 0)) throw DomainError("gaussian kernel needs sigma > 0");
    return {Kind::Gaussian, sigma};
  }
  static KernelSpec linear() { return {Kind::Linear, 0.0}; }
};

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                   const Eigen::Ref<const Eigen::RowVectorXd>& y);

/// |X| x |Y| kernel matrix between row sets. Passing the same matrix for
/// both arguments routes to the symmetric evaluation order, which makes
/// K = K^T exact to the last ulp.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x,
                              const Eigen::Ref<const Eigen::MatrixXd>& y);

/// K(X, X) with entries evaluated once per unordered pair and mirrored.
Eigen::MatrixXd kernel_matrix_sym(const KernelSpec& spec,
                                  const Eigen::Ref<const Eigen::MatrixXd>& x);

}  // namespace gsc
