#include "gsc/problem.hpp"

#include <cmath>

#include "gsc/parallel.hpp"
#include "gsc/rng.hpp"

namespace gsc {

namespace {

bool is_pm_one(double v) { return v == 1.0 || v == -1.0; }

}  // namespace

FiniteSumProblem::FiniteSumProblem(Eigen::MatrixXd features, Eigen::VectorXd labels,
                                   LossFamily loss, std::optional<double> radius_override)
    : w_(std::move(features)), y_(std::move(labels)), loss_(loss) {
  if (w_.rows() < 1 || w_.cols() < 1) throw DimensionError("problem needs n >= 1, d >= 1");
  if (y_.size() != w_.rows()) throw DimensionError("label count does not match feature rows");
  if (!w_.allFinite() || !y_.allFinite()) throw DomainError("non-finite features or labels");

  switch (loss_.kind()) {
    case LossKind::Logistic:
    case LossKind::RobustRegression:
      for (Eigen::Index i = 0; i < y_.size(); ++i) {
        if (y_[i] == 0.0) {  // {0,1} convention
          y_[i] = -1.0;
          labels_remapped_ = true;
        }
        if (!is_pm_one(y_[i])) throw DomainError("binary labels must be in {-1,+1} or {0,1}");
      }
      break;
    case LossKind::Softmax:
      for (Eigen::Index i = 0; i < y_.size(); ++i) {
        if (y_[i] < 1 || y_[i] > loss_.classes() || std::floor(y_[i]) != y_[i]) {
          throw DomainError("softmax labels must be integers in 1..k");
        }
      }
      break;
    case LossKind::Squared:
      break;
  }

  max_row_norm_ = 0.0;
  for (Eigen::Index i = 0; i < w_.rows(); ++i) {
    max_row_norm_ = std::max(max_row_norm_, w_.row(i).norm());
  }
  radius_ = radius_override.value_or(loss_.gsc_constant() * max_row_norm_);
  if (radius_ < 0) throw DomainError("radius must be nonnegative");
}

Eigen::Index FiniteSumProblem::dim() const {
  return loss_.is_scalar() ? w_.cols() : w_.cols() * loss_.classes();
}

void FiniteSumProblem::check_dim(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw DimensionError("parameter dimension mismatch");
}

double gsc_radius(const FiniteSumProblem& problem) { return problem.radius(); }

double FiniteSumProblem::loss_value(const Eigen::VectorXd& x) const {
  check_dim(x);
  const auto n = w_.rows();
  if (loss_.is_scalar()) {
    const double total = chunked_reduce<double>(
        n, 0.0,
        [&](double& acc, Eigen::Index b, Eigen::Index e) {
          const Eigen::VectorXd s = w_.middleRows(b, e - b) * x;
          for (Eigen::Index i = 0; i < s.size(); ++i) {
            acc += loss_eval(loss_, s[i], y_[b + i]).value;
          }
        },
        [](double& acc, const double& p) { acc += p; });
    return total / static_cast<double>(n);
  }
  const int k = loss_.classes();
  const Eigen::Map<const Eigen::MatrixXd> xm(x.data(), w_.cols(), k);
  const double total = chunked_reduce<double>(
      n, 0.0,
      [&](double& acc, Eigen::Index b, Eigen::Index e) {
        const Eigen::MatrixXd scores = w_.middleRows(b, e - b) * xm;  // rows x k
        for (Eigen::Index i = 0; i < scores.rows(); ++i) {
          acc += softmax_eval(scores.row(i).transpose(), static_cast<int>(y_[b + i])).value;
        }
      },
      [](double& acc, const double& p) { acc += p; });
  return total / static_cast<double>(n);
}

Eigen::VectorXd FiniteSumProblem::loss_gradient(const Eigen::VectorXd& x) const {
  check_dim(x);
  const auto n = w_.rows();
  if (loss_.is_scalar()) {
    Eigen::VectorXd g = chunked_reduce<Eigen::VectorXd>(
        n, Eigen::VectorXd::Zero(dim()),
        [&](Eigen::VectorXd& acc, Eigen::Index b, Eigen::Index e) {
          const auto block = w_.middleRows(b, e - b);
          const Eigen::VectorXd s = block * x;
          Eigen::VectorXd d1(s.size());
          for (Eigen::Index i = 0; i < s.size(); ++i) {
            d1[i] = loss_eval(loss_, s[i], y_[b + i]).d1;
          }
          acc.noalias() += block.transpose() * d1;
        },
        [](Eigen::VectorXd& acc, const Eigen::VectorXd& p) { acc += p; });
    return g / static_cast<double>(n);
  }
  const int k = loss_.classes();
  const auto d = w_.cols();
  const Eigen::Map<const Eigen::MatrixXd> xm(x.data(), d, k);
  Eigen::MatrixXd gm = chunked_reduce<Eigen::MatrixXd>(
      n, Eigen::MatrixXd::Zero(d, k),
      [&](Eigen::MatrixXd& acc, Eigen::Index b, Eigen::Index e) {
        const auto block = w_.middleRows(b, e - b);
        const Eigen::MatrixXd scores = block * xm;
        Eigen::MatrixXd gs(scores.rows(), k);
        for (Eigen::Index i = 0; i < scores.rows(); ++i) {
          gs.row(i) =
              softmax_eval(scores.row(i).transpose(), static_cast<int>(y_[b + i])).grad.transpose();
        }
        acc.noalias() += block.transpose() * gs;
      },
      [](Eigen::MatrixXd& acc, const Eigen::MatrixXd& p) { acc += p; });
  gm /= static_cast<double>(n);
  return Eigen::Map<Eigen::VectorXd>(gm.data(), gm.size());
}

Eigen::VectorXd FiniteSumProblem::loss_hessian_vec(const Eigen::VectorXd& x,
                                                   const Eigen::VectorXd& v) const {
  check_dim(x);
  if (v.size() != dim()) throw DimensionError("hessian_vec: direction dimension mismatch");
  const auto n = w_.rows();
  if (loss_.is_scalar()) {
    Eigen::VectorXd hv = chunked_reduce<Eigen::VectorXd>(
        n, Eigen::VectorXd::Zero(dim()),
        [&](Eigen::VectorXd& acc, Eigen::Index b, Eigen::Index e) {
          const auto block = w_.middleRows(b, e - b);
          const Eigen::VectorXd s = block * x;
          Eigen::VectorXd u = block * v;
          for (Eigen::Index i = 0; i < s.size(); ++i) {
            u[i] *= loss_eval(loss_, s[i], y_[b + i]).d2;
          }
          acc.noalias() += block.transpose() * u;
        },
        [](Eigen::VectorXd& acc, const Eigen::VectorXd& p) { acc += p; });
    return hv / static_cast<double>(n);
  }
  const int k = loss_.classes();
  const auto d = w_.cols();
  const Eigen::Map<const Eigen::MatrixXd> xm(x.data(), d, k);
  const Eigen::Map<const Eigen::MatrixXd> vm(v.data(), d, k);
  Eigen::MatrixXd hm = chunked_reduce<Eigen::MatrixXd>(
      n, Eigen::MatrixXd::Zero(d, k),
      [&](Eigen::MatrixXd& acc, Eigen::Index b, Eigen::Index e) {
        const auto block = w_.middleRows(b, e - b);
        const Eigen::MatrixXd scores = block * xm;
        const Eigen::MatrixXd u = block * vm;
        Eigen::MatrixXd hs(scores.rows(), k);
        for (Eigen::Index i = 0; i < scores.rows(); ++i) {
          const auto ev = softmax_eval(scores.row(i).transpose(), static_cast<int>(y_[b + i]));
          hs.row(i) = softmax_hvp(ev.probs, u.row(i).transpose()).transpose();
        }
        acc.noalias() += block.transpose() * hs;
      },
      [](Eigen::MatrixXd& acc, const Eigen::MatrixXd& p) { acc += p; });
  hm /= static_cast<double>(n);
  return Eigen::Map<Eigen::VectorXd>(hm.data(), hm.size());
}

Eigen::MatrixXd FiniteSumProblem::loss_hessian_dense(const Eigen::VectorXd& x) const {
  check_dim(x);
  const auto n = w_.rows();
  const auto dd = dim();
  if (dd > kDenseGuard) {
    throw CapacityError("loss_hessian_dense: parameter dimension exceeds the dense guard");
  }
  if (loss_.is_scalar()) {
    Eigen::MatrixXd h = chunked_reduce<Eigen::MatrixXd>(
        n, Eigen::MatrixXd::Zero(dd, dd),
        [&](Eigen::MatrixXd& acc, Eigen::Index b, Eigen::Index e) {
          const auto block = w_.middleRows(b, e - b);
          const Eigen::VectorXd s = block * x;
          Eigen::VectorXd d2(s.size());
          for (Eigen::Index i = 0; i < s.size(); ++i) {
            d2[i] = loss_eval(loss_, s[i], y_[b + i]).d2;
          }
          acc.noalias() += block.transpose() * d2.asDiagonal() * block;
        },
        [](Eigen::MatrixXd& acc, const Eigen::MatrixXd& p) { acc += p; });
    return h / static_cast<double>(n);
  }
  const int k = loss_.classes();
  const auto d = w_.cols();
  const Eigen::Map<const Eigen::MatrixXd> xm(x.data(), d, k);
  Eigen::MatrixXd h = chunked_reduce<Eigen::MatrixXd>(
      n, Eigen::MatrixXd::Zero(dd, dd),
      [&](Eigen::MatrixXd& acc, Eigen::Index b, Eigen::Index e) {
        const auto block = w_.middleRows(b, e - b);
        const Eigen::MatrixXd scores = block * xm;
        for (Eigen::Index i = 0; i < scores.rows(); ++i) {
          const auto ev = softmax_eval(scores.row(i).transpose(), static_cast<int>(y_[b + i]));
          const Eigen::VectorXd& p = ev.probs;
          const Eigen::MatrixXd outer =
              block.row(i).transpose() * block.row(i);  // w w^T, d x d
          // Column-major flattening of R^{d x k}: block (j1, j2) of the
          // Hessian is (diag(p) - p p^T)_{j1 j2} * w w^T.
          for (int j2 = 0; j2 < k; ++j2) {
            for (int j1 = 0; j1 < k; ++j1) {
              const double sjj = (j1 == j2 ? p[j1] : 0.0) - p[j1] * p[j2];
              acc.block(j1 * d, j2 * d, d, d).noalias() += sjj * outer;
            }
          }
        }
      },
      [](Eigen::MatrixXd& acc, const Eigen::MatrixXd& p) { acc += p; });
  return h / static_cast<double>(n);
}

Eigen::VectorXd FiniteSumProblem::batch_loss_gradient(const Eigen::VectorXd& x,
                                                      std::span<const Eigen::Index> rows) const {
  check_dim(x);
  if (rows.empty()) throw DomainError("batch_loss_gradient: empty batch");
  if (loss_.is_scalar()) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim());
    for (const auto r : rows) {
      const double s = w_.row(r).dot(x);
      g.noalias() += loss_eval(loss_, s, y_[r]).d1 * w_.row(r).transpose();
    }
    return g / static_cast<double>(rows.size());
  }
  const int k = loss_.classes();
  const auto d = w_.cols();
  const Eigen::Map<const Eigen::MatrixXd> xm(x.data(), d, k);
  Eigen::MatrixXd gm = Eigen::MatrixXd::Zero(d, k);
  for (const auto r : rows) {
    const Eigen::VectorXd scores = xm.transpose() * w_.row(r).transpose();
    const auto ev = softmax_eval(scores, static_cast<int>(y_[r]));
    gm.noalias() += w_.row(r).transpose() * ev.grad.transpose();
  }
  gm /= static_cast<double>(rows.size());
  return Eigen::Map<Eigen::VectorXd>(gm.data(), gm.size());
}

Preconditioner FiniteSumProblem::build_preconditioner(const Eigen::VectorXd& x, double mu,
                                                      Eigen::Index subsamples, Sampling sampling,
                                                      std::uint64_t seed) const {
  return build_subsampled_preconditioner(*this, x, mu, subsamples, sampling, seed);
}

Preconditioner build_subsampled_preconditioner(const FiniteSumProblem& problem,
                                               const Eigen::VectorXd& x, double mu,
                                               Eigen::Index subsamples, Sampling sampling,
                                               std::uint64_t seed) {
  if (!problem.loss().is_scalar()) {
    throw DomainError("subsampled preconditioner is defined for scalar loss families");
  }
  const auto n = problem.num_samples();
  if (subsamples < 1 || subsamples > n) {
    throw DomainError("subsampled preconditioner: need 1 <= Q <= n");
  }
  if (!(mu > 0)) throw DomainError("subsampled preconditioner: need mu > 0");

  const Eigen::MatrixXd& w = problem.features();
  const Eigen::VectorXd& y = problem.labels();
  auto d2_at = [&](Eigen::Index row) {
    return loss_eval(problem.loss(), w.row(row).dot(x), y[row]).d2;
  };

  std::vector<Eigen::Index> picked;
  Eigen::VectorXd weights;
  SplitMix64 rng(seed);
  if (sampling == Sampling::Uniform) {
    if (subsamples == n) {
      // Degenerate full pass: every index exactly once, no randomness.
      picked.resize(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) picked[static_cast<std::size_t>(i)] = i;
    } else {
      picked = rng.sample_without_replacement(n, subsamples);
    }
    weights = Eigen::VectorXd::Ones(subsamples);
  } else {
    // Candidate pool capped for the exact score computation.
    std::vector<Eigen::Index> pool;
    if (n <= kLeverageExactCap) {
      pool.resize(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    } else {
      pool = rng.sample_without_replacement(n, kLeverageExactCap);
    }
    const auto m = static_cast<Eigen::Index>(pool.size());
    Eigen::MatrixXd rows(m, w.cols());
    for (Eigen::Index j = 0; j < m; ++j) {
      rows.row(j) = std::sqrt(d2_at(pool[static_cast<std::size_t>(j)])) *
                    w.row(pool[static_cast<std::size_t>(j)]);
    }
    const Eigen::VectorXd scores = leverage_scores_from_rows(rows, mu);
    const double total = scores.sum();
    if (!(total > 0)) throw NumericalError("leverage scores degenerate to zero");
    weights.resize(subsamples);
    picked.resize(static_cast<std::size_t>(subsamples));
    for (Eigen::Index j = 0; j < subsamples; ++j) {
      const Eigen::Index c = rng.sample_discrete(scores);
      picked[static_cast<std::size_t>(j)] = pool[static_cast<std::size_t>(c)];
      const double p = scores[c] / total;
      weights[j] = 1.0 / (static_cast<double>(m) * p);
    }
  }

  const auto d = w.cols();
  Eigen::MatrixXd approx = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < subsamples; ++j) {
    const auto r = picked[static_cast<std::size_t>(j)];
    const double coeff = weights[j] * d2_at(r);
    approx.noalias() += coeff * (w.row(r).transpose() * w.row(r));
  }
  approx /= static_cast<double>(subsamples);
  approx.diagonal().array() += mu;

  Eigen::LLT<Eigen::MatrixXd> llt(approx);
  if (llt.info() != Eigen::Success) {
    throw SingularError("subsampled preconditioner: Cholesky failed");
  }
  Eigen::MatrixXd upper = llt.matrixL().transpose();
  return Preconditioner(std::move(upper), mu, subsamples);
}

GscCheckReport check_gsc_inequality(const RegularizedObjective& problem, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& h, const Eigen::VectorXd& k_dir,
                                    double tol) {
  GscCheckReport rep;
  const double hn = h.norm();
  auto quad = [&](const Eigen::VectorXd& z) { return k_dir.dot(problem.loss_hessian_vec(z, k_dir)); };
  rep.quadratic_form = quad(x);
  if (hn == 0.0) {
    rep.pass = true;
    return rep;
  }
  const double eps = 1e-5 * std::max(1.0, x.norm()) / hn;
  rep.third_derivative = (quad(x + eps * h) - quad(x - eps * h)) / (2.0 * eps);
  rep.bound = problem.radius() * hn * rep.quadratic_form;
  if (rep.quadratic_form * hn > 0) {
    rep.ratio = rep.third_derivative / (hn * rep.quadratic_form);
  }
  rep.vacuous = problem.radius() == 0.0;
  const double abs_slack = 1e-9 * (1.0 + std::abs(rep.quadratic_form)) * (1.0 + hn);
  rep.pass = rep.third_derivative <= rep.bound * (1.0 + tol) + abs_slack;
  return rep;
}

}  // namespace gsc
