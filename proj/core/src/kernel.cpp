#include "gsc/kernel.hpp"

#include <cmath>

namespace gsc {

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                   const Eigen::Ref<const Eigen::RowVectorXd>& y) {
  if (x.size() != y.size()) throw DimensionError("kernel_eval: dimension mismatch");
  switch (spec.kind) {
    case KernelSpec::Kind::Gaussian: {
      if (!(spec.sigma > 0)) throw DomainError("kernel_eval: sigma must be positive");
      const double sq = (x - y).squaredNorm();
      return std::exp(-sq / (2.0 * spec.sigma * spec.sigma));
    }
    case KernelSpec::Kind::Linear:
      return x.dot(y);
  }
  throw DomainError("kernel_eval: unknown kernel kind");
}

Eigen::MatrixXd kernel_matrix_sym(const KernelSpec& spec,
                                  const Eigen::Ref<const Eigen::MatrixXd>& x) {
  const auto m = x.rows();
  Eigen::MatrixXd k(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel_eval(spec, x.row(i), x.row(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x,
                              const Eigen::Ref<const Eigen::MatrixXd>& y) {
  if (x.cols() != y.cols()) throw DimensionError("kernel_matrix: dimension mismatch");
  if (x.data() == y.data() && x.rows() == y.rows() && x.cols() == y.cols()) {
    return kernel_matrix_sym(spec, x);
  }
  switch (spec.kind) {
    case KernelSpec::Kind::Gaussian: {
      if (!(spec.sigma > 0)) throw DomainError("kernel_matrix: sigma must be positive");
      const Eigen::VectorXd xn = x.rowwise().squaredNorm();
      const Eigen::VectorXd yn = y.rowwise().squaredNorm();
      Eigen::MatrixXd sq = -2.0 * (x * y.transpose());
      sq.colwise() += xn;
      sq.rowwise() += yn.transpose();
      return (-sq.cwiseMax(0.0) / (2.0 * spec.sigma * spec.sigma)).array().exp();
    }
    case KernelSpec::Kind::Linear:
      return x * y.transpose();
  }
  throw DomainError("kernel_matrix: unknown kernel kind");
}

}  // namespace gsc
