#include "gsc/linsys.hpp"

#include <cmath>

namespace gsc {

namespace {

double cg_rate(double cond, int iters) {
  if (cond < 1.0) throw DomainError("condition bound must be >= 1");
  const double s = std::sqrt(cond);
  return 2.0 * std::pow((s - 1.0) / (s + 1.0), iters);
}

}  // namespace

LsoResult exact_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw DimensionError("exact_solve: shape mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularError("exact_solve: Cholesky failed, operator is not SPD");
  }
  LsoResult out;
  out.z = llt.solve(b);
  out.rho_bound = 0.0;
  out.inner_iters = 1;
  out.b_dot_z = b.dot(out.z);
  return out;
}

LsoResult cg_solve(const LinearOperator& apply_a, const Eigen::VectorXd& b, int iters,
                   double cond_bound) {
  if (iters < 1) throw DomainError("cg_solve: need iters >= 1");
  const double rho = cg_rate(cond_bound, iters);

  LsoResult out;
  out.z = Eigen::VectorXd::Zero(b.size());
  out.rho_bound = rho;
  if (b.squaredNorm() == 0.0) {
    out.rho_bound = 0.0;
    return out;
  }

  Eigen::VectorXd r = b;  // residual of x = 0
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  const double stop = rr * 1e-30;  // early exit on effectively-exact solves
  for (int k = 0; k < iters; ++k) {
    const Eigen::VectorXd ap = apply_a(p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) {
      throw NumericalError("cg_solve: p'Ap <= 0, operator is not positive definite");
    }
    const double alpha = rr / pap;
    out.z += alpha * p;
    r -= alpha * ap;
    ++out.inner_iters;
    const double rr_new = r.squaredNorm();
    if (rr_new <= stop) break;  // machine-precision residual; the certificate stands
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  out.b_dot_z = b.dot(out.z);
  return out;
}

LsoResult pcg_solve(const LinearOperator& apply_a, const Eigen::VectorXd& b,
                    const Preconditioner& precond, int tau) {
  if (precond.dim() != b.size()) throw DimensionError("pcg_solve: preconditioner size mismatch");
  // Preconditioned operator B^{-T} A B^{-1}; condition number <= 3 whenever
  // the caller's spectral sandwich holds.
  const LinearOperator transformed = [&](const Eigen::VectorXd& v) {
    return precond.solve_transpose(apply_a(precond.solve(v)));
  };
  LsoResult inner = cg_solve(transformed, precond.solve_transpose(b), tau, 3.0);
  LsoResult out;
  out.z = precond.solve(inner.z);
  out.rho_bound = inner.rho_bound;
  out.inner_iters = inner.inner_iters;
  out.b_dot_z = b.dot(out.z);
  return out;
}

bool lso_check(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& z,
               double rho) {
  if (z.size() != b.size()) throw DimensionError("lso_check: size mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw SingularError("lso_check: operator is not SPD");
  const Eigen::VectorXd zstar = llt.solve(b);
  const Eigen::VectorXd d = z - zstar;
  const double err = std::sqrt(std::max(0.0, d.dot(a * d)));
  const double ref = std::sqrt(std::max(0.0, zstar.dot(a * zstar)));
  return err <= rho * ref;
}

Eigen::VectorXd leverage_scores(const Eigen::MatrixXd& gram, double t) {
  if (!(t > 0.0)) throw DomainError("leverage_scores: need t > 0");
  if (gram.rows() != gram.cols()) throw DimensionError("leverage_scores: Gram must be square");
  const auto n = gram.rows();
  Eigen::MatrixXd reg = gram;
  reg.diagonal().array() += t * static_cast<double>(n);
  Eigen::LLT<Eigen::MatrixXd> llt(reg);
  if (llt.info() != Eigen::Success) {
    throw SingularError("leverage_scores: regularized Gram is not SPD");
  }
  const Eigen::MatrixXd solved = llt.solve(gram);
  Eigen::VectorXd scores = static_cast<double>(n) * solved.diagonal();
  scores = scores.cwiseMax(0.0);
  return scores;
}

Eigen::VectorXd leverage_scores_from_rows(const Eigen::MatrixXd& rows, double t) {
  return leverage_scores(rows * rows.transpose(), t);
}

}  // namespace gsc
