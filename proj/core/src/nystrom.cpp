#include "gsc/nystrom.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "gsc/parallel.hpp"
#include "gsc/rng.hpp"

namespace gsc {

namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, std::span<const Eigen::Index> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = x.row(rows[i]);
  return out;
}

double max_kernel_diag(const KernelSpec& kernel, const Eigen::MatrixXd& x) {
  if (kernel.kind == KernelSpec::Kind::Gaussian) return 1.0;
  double m = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) m = std::max(m, x.row(i).squaredNorm());
  return m;
}

}  // namespace

std::vector<Eigen::Index> select_centers(const Eigen::MatrixXd& x, const KernelSpec& kernel,
                                         Eigen::Index m, Sampling method, double t,
                                         std::uint64_t seed) {
  const auto n = x.rows();
  if (m < 1 || m > n) throw DomainError("select_centers: need 1 <= M <= n");
  SplitMix64 rng(seed);

  if (method == Sampling::Uniform) {
    if (m == n) {
      std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
      return all;
    }
    return rng.sample_without_replacement(n, m);
  }

  if (!(t > 0)) throw DomainError("select_centers: leverage sampling needs t > 0");
  std::vector<Eigen::Index> pool;
  if (n <= kLeverageExactCap) {
    pool.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  } else {
    pool = rng.sample_without_replacement(n, kLeverageExactCap);
  }
  const Eigen::MatrixXd pool_rows = gather_rows(x, pool);
  const Eigen::MatrixXd gram = kernel_matrix_sym(kernel, pool_rows);
  const Eigen::VectorXd scores = leverage_scores(gram, t);
  std::vector<Eigen::Index> picked(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    picked[static_cast<std::size_t>(j)] = pool[static_cast<std::size_t>(rng.sample_discrete(scores))];
  }
  return picked;
}

TriangularFactor factor_T(const KernelSpec& kernel, const Eigen::MatrixXd& centers) {
  if (centers.rows() < 1) throw DomainError("factor_T: need at least one center");
  const Eigen::MatrixXd kmm = kernel_matrix_sym(kernel, centers);
  const double scale = kmm.trace() / static_cast<double>(kmm.rows());

  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd reg = kmm;
    reg.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(reg);
    if (llt.info() == Eigen::Success) {
      TriangularFactor out;
      out.upper = llt.matrixL().transpose();
      out.jitter = jitter;
      return out;
    }
    if (jitter == 0.0) {
      jitter = 1e-12 * scale;
    } else if (jitter < 1e-6 * scale) {
      jitter *= 10.0;
    } else {
      throw SingularError("factor_T: Cholesky failed at maximum jitter");
    }
  }
}

Eigen::VectorXd NystromModel::scores(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (x.cols() != centers.cols()) throw DimensionError("predict: feature dimension mismatch");
  const Eigen::VectorXd gamma = tri.triangularView<Eigen::Upper>().solve(alpha);
  Eigen::VectorXd out(x.rows());
  for_each_chunk(x.rows(), [&](Eigen::Index, Eigen::Index b, Eigen::Index e) {
    out.segment(b, e - b) = kernel_matrix(kernel, x.middleRows(b, e - b), centers) * gamma;
  });
  return out;
}

Eigen::VectorXd NystromModel::predict_labels(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  Eigen::VectorXd s = scores(x);
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = s[i] >= 0 ? 1.0 : -1.0;
  return s;
}

ProjectedProblem::ProjectedProblem(Eigen::MatrixXd x, Eigen::VectorXd y, LossFamily loss,
                                   KernelSpec kernel, Eigen::MatrixXd centers,
                                   TriangularFactor factor)
    : x_(std::move(x)),
      y_(std::move(y)),
      loss_(loss),
      kernel_(kernel),
      centers_(std::move(centers)),
      factor_(std::move(factor)) {
  if (!loss_.is_scalar()) throw DomainError("projected problem supports scalar loss families");
  if (y_.size() != x_.rows()) throw DimensionError("projected problem: label count mismatch");
  if (centers_.cols() != x_.cols()) throw DimensionError("projected problem: center dim mismatch");
  if (factor_.upper.rows() != centers_.rows()) {
    throw DimensionError("projected problem: factor size mismatch");
  }
  const double kmax = max_kernel_diag(kernel_, x_);
  radius_ = loss_.gsc_constant() * std::sqrt(kmax);
  smoothness_ = loss_.smoothness() * kmax;
}

Eigen::VectorXd ProjectedProblem::scores_for(const Eigen::VectorXd& alpha) const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (cache_valid_ && cached_alpha_.size() == alpha.size() && cached_alpha_ == alpha) {
      return cached_scores_;
    }
  }
  const Eigen::VectorXd gamma = solve_tri(alpha);
  Eigen::VectorXd s(x_.rows());
  for_each_chunk(x_.rows(), [&](Eigen::Index, Eigen::Index b, Eigen::Index e) {
    s.segment(b, e - b) = kernel_matrix(kernel_, x_.middleRows(b, e - b), centers_) * gamma;
  });
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    cached_alpha_ = alpha;
    cached_scores_ = s;
    cache_valid_ = true;
  }
  return s;
}

double ProjectedProblem::loss_value(const Eigen::VectorXd& alpha) const {
  const Eigen::VectorXd s = scores_for(alpha);
  const double total = chunked_reduce<double>(
      x_.rows(), 0.0,
      [&](double& acc, Eigen::Index b, Eigen::Index e) {
        for (Eigen::Index i = b; i < e; ++i) acc += loss_eval(loss_, s[i], y_[i]).value;
      },
      [](double& acc, const double& p) { acc += p; });
  return total / static_cast<double>(x_.rows());
}

Eigen::VectorXd ProjectedProblem::loss_gradient(const Eigen::VectorXd& alpha) const {
  const Eigen::VectorXd s = scores_for(alpha);
  const auto m = dim();
  Eigen::VectorXd acc = chunked_reduce<Eigen::VectorXd>(
      x_.rows(), Eigen::VectorXd::Zero(m),
      [&](Eigen::VectorXd& a, Eigen::Index b, Eigen::Index e) {
        const Eigen::MatrixXd kb = kernel_matrix(kernel_, x_.middleRows(b, e - b), centers_);
        Eigen::VectorXd d1(e - b);
        for (Eigen::Index i = b; i < e; ++i) d1[i - b] = loss_eval(loss_, s[i], y_[i]).d1;
        a.noalias() += kb.transpose() * d1;
      },
      [](Eigen::VectorXd& a, const Eigen::VectorXd& p) { a += p; });
  return solve_tri_t(acc / static_cast<double>(x_.rows()));
}

Eigen::VectorXd ProjectedProblem::loss_hessian_vec(const Eigen::VectorXd& alpha,
                                                   const Eigen::VectorXd& p) const {
  if (p.size() != dim()) throw DimensionError("projected hvp: direction size mismatch");
  const Eigen::VectorXd s = scores_for(alpha);
  const Eigen::VectorXd pi = solve_tri(p);
  Eigen::VectorXd acc = chunked_reduce<Eigen::VectorXd>(
      x_.rows(), Eigen::VectorXd::Zero(dim()),
      [&](Eigen::VectorXd& a, Eigen::Index b, Eigen::Index e) {
        const Eigen::MatrixXd kb = kernel_matrix(kernel_, x_.middleRows(b, e - b), centers_);
        Eigen::VectorXd u = kb * pi;
        for (Eigen::Index i = b; i < e; ++i) u[i - b] *= loss_eval(loss_, s[i], y_[i]).d2;
        a.noalias() += kb.transpose() * u;
      },
      [](Eigen::VectorXd& a, const Eigen::VectorXd& p2) { a += p2; });
  return solve_tri_t(acc / static_cast<double>(x_.rows()));
}

Eigen::MatrixXd ProjectedProblem::loss_hessian_dense(const Eigen::VectorXd& alpha) const {
  const auto m = dim();
  if (m > kDenseGuard) throw CapacityError("projected dense Hessian exceeds the dense guard");
  const Eigen::VectorXd s = scores_for(alpha);
  Eigen::MatrixXd acc = chunked_reduce<Eigen::MatrixXd>(
      x_.rows(), Eigen::MatrixXd::Zero(m, m),
      [&](Eigen::MatrixXd& a, Eigen::Index b, Eigen::Index e) {
        const Eigen::MatrixXd kb = kernel_matrix(kernel_, x_.middleRows(b, e - b), centers_);
        // E = K_bM T^{-1}, one triangular solve per block column.
        const Eigen::MatrixXd et =
            factor_.upper.transpose().triangularView<Eigen::Lower>().solve(kb.transpose());
        Eigen::VectorXd d2(e - b);
        for (Eigen::Index i = b; i < e; ++i) d2[i - b] = loss_eval(loss_, s[i], y_[i]).d2;
        a.noalias() += et * d2.asDiagonal() * et.transpose();
      },
      [](Eigen::MatrixXd& a, const Eigen::MatrixXd& p) { a += p; });
  return acc / static_cast<double>(x_.rows());
}

Eigen::VectorXd ProjectedProblem::batch_loss_gradient(const Eigen::VectorXd& alpha,
                                                      std::span<const Eigen::Index> rows) const {
  if (rows.empty()) throw DomainError("batch_loss_gradient: empty batch");
  const Eigen::VectorXd gamma = solve_tri(alpha);
  const Eigen::MatrixXd xb = gather_rows(x_, rows);
  const Eigen::MatrixXd kb = kernel_matrix(kernel_, xb, centers_);
  const Eigen::VectorXd s = kb * gamma;
  Eigen::VectorXd d1(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    d1[i] = loss_eval(loss_, s[i], y_[rows[static_cast<std::size_t>(i)]]).d1;
  }
  return solve_tri_t(kb.transpose() * d1) / static_cast<double>(rows.size());
}

Preconditioner ProjectedProblem::build_preconditioner(const Eigen::VectorXd& alpha, double mu,
                                                      Eigen::Index subsamples, Sampling sampling,
                                                      std::uint64_t seed) const {
  return compute_preconditioner(*this, alpha, mu, subsamples, sampling, seed);
}

Preconditioner compute_preconditioner(const ProjectedProblem& pp, const Eigen::VectorXd& alpha,
                                      double mu, Eigen::Index subsamples, Sampling sampling,
                                      std::uint64_t seed) {
  const auto n = pp.num_samples();
  const auto m = pp.dim();
  if (subsamples < 1 || subsamples > n) throw DomainError("compute_preconditioner: need 1 <= Q <= n");
  if (!(mu > 0)) throw DomainError("compute_preconditioner: need mu > 0");

  const Eigen::VectorXd s = pp.scores_for(alpha);
  auto d2_at = [&](Eigen::Index row) { return loss_eval(pp.loss(), s[row], pp.labels()[row]).d2; };

  SplitMix64 rng(seed);
  std::vector<Eigen::Index> picked;
  Eigen::VectorXd weights;
  if (sampling == Sampling::Uniform) {
    if (subsamples == n) {
      picked.resize(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) picked[static_cast<std::size_t>(i)] = i;
    } else {
      picked = rng.sample_without_replacement(n, subsamples);
    }
    weights = Eigen::VectorXd::Ones(subsamples);
  } else {
    std::vector<Eigen::Index> pool;
    if (n <= kLeverageExactCap) {
      pool.resize(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    } else {
      pool = rng.sample_without_replacement(n, kLeverageExactCap);
    }
    // Gram of the weighted vectors sqrt(l''_i) phi(x_i): scaled kernel rows.
    const Eigen::MatrixXd pool_rows = gather_rows(pp.data(), pool);
    Eigen::MatrixXd gram = kernel_matrix_sym(pp.kernel(), pool_rows);
    Eigen::VectorXd c(static_cast<Eigen::Index>(pool.size()));
    for (Eigen::Index j = 0; j < c.size(); ++j) {
      c[j] = std::sqrt(d2_at(pool[static_cast<std::size_t>(j)]));
    }
    gram = c.asDiagonal() * gram * c.asDiagonal();
    const Eigen::VectorXd scores = leverage_scores(gram, mu);
    const double total = scores.sum();
    if (!(total > 0)) throw NumericalError("compute_preconditioner: degenerate leverage scores");
    picked.resize(static_cast<std::size_t>(subsamples));
    weights.resize(subsamples);
    const auto pool_n = static_cast<double>(pool.size());
    for (Eigen::Index j = 0; j < subsamples; ++j) {
      const Eigen::Index cidx = rng.sample_discrete(scores);
      picked[static_cast<std::size_t>(j)] = pool[static_cast<std::size_t>(cidx)];
      weights[j] = 1.0 / (pool_n * (scores[cidx] / total));
    }
  }

  // A = (1/Q) T^{-T} K_MQ D_Q K_QM T^{-1} + mu I, accumulated blockwise.
  Eigen::MatrixXd approx = Eigen::MatrixXd::Zero(m, m);
  const auto q = static_cast<Eigen::Index>(picked.size());
  for (Eigen::Index b = 0; b < q; b += kRowChunk) {
    const Eigen::Index e = std::min(q, b + kRowChunk);
    const Eigen::MatrixXd xb =
        gather_rows(pp.data(), std::span<const Eigen::Index>(picked).subspan(
                                   static_cast<std::size_t>(b), static_cast<std::size_t>(e - b)));
    const Eigen::MatrixXd kb = kernel_matrix(pp.kernel(), xb, pp.centers());
    const Eigen::MatrixXd et =
        pp.tri().transpose().triangularView<Eigen::Lower>().solve(kb.transpose());
    Eigen::VectorXd coeff(e - b);
    for (Eigen::Index j = b; j < e; ++j) {
      coeff[j - b] = weights[j] * d2_at(picked[static_cast<std::size_t>(j)]);
    }
    approx.noalias() += et * coeff.asDiagonal() * et.transpose();
  }
  approx /= static_cast<double>(q);
  approx.diagonal().array() += mu;

  Eigen::LLT<Eigen::MatrixXd> llt(approx);
  if (llt.info() != Eigen::Success) {
    throw SingularError("compute_preconditioner: Cholesky failed");
  }
  Eigen::MatrixXd upper = llt.matrixL().transpose();
  return Preconditioner(std::move(upper), mu, q);
}

KernelSolveResult kernel_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               LossFamily loss, const KernelSpec& kernel, double lambda,
                               const KernelSolveConfig& config) {
  if (!(lambda > 0)) throw DomainError("kernel_solve: need lambda > 0");
  if (config.centers < 1 || config.centers > x.rows()) {
    throw DomainError("kernel_solve: need 1 <= M <= n");
  }

  const double level = config.center_level > 0 ? config.center_level : lambda;
  const auto center_seed = SplitMix64::derive(config.scheme.solver.seed, 0x6e79736d);
  const auto idx =
      select_centers(x, kernel, config.centers, config.center_sampling, level, center_seed);
  Eigen::MatrixXd centers = gather_rows(x, idx);
  TriangularFactor factor = factor_T(kernel, centers);

  ProjectedProblem pp(x, y, loss, kernel, std::move(centers), std::move(factor));
  SolveResult res = solve(pp, lambda, config.scheme);

  NystromModel model;
  model.centers = pp.centers();
  model.tri = pp.tri();
  model.alpha = std::move(res.x);
  model.kernel = kernel;
  model.loss = loss.kind();
  model.lambda = lambda;
  model.jitter = pp.jitter();
  return {std::move(model), std::move(res.trace)};
}

// --- model file ------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'G', 'S', 'C', 'N', 'Y', 'M', '0', '1'};

std::uint8_t kernel_id(KernelSpec::Kind k) {
  return k == KernelSpec::Kind::Gaussian ? 0 : 1;
}

std::uint8_t loss_id(LossKind k) {
  switch (k) {
    case LossKind::Logistic: return 0;
    case LossKind::Softmax: return 1;
    case LossKind::RobustRegression: return 2;
    case LossKind::Squared: return 3;
  }
  return 255;
}

LossKind loss_from_id(std::uint8_t id) {
  switch (id) {
    case 0: return LossKind::Logistic;
    case 1: return LossKind::Softmax;
    case 2: return LossKind::RobustRegression;
    case 3: return LossKind::Squared;
  }
  throw ParseError("model file: unknown loss id");
}

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const char* what) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ParseError(std::string("model file truncated while reading ") + what);
  return v;
}

}  // namespace

void save_model(const std::string& path, const NystromModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("save_model: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(model.centers.rows()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(model.centers.cols()));
  put<std::uint8_t>(os, kernel_id(model.kernel.kind));
  put<double>(os, model.kernel.sigma);
  put<std::uint8_t>(os, loss_id(model.loss));
  put<double>(os, model.lambda);
  put<double>(os, model.jitter);
  // Row-major payloads, little-endian f64.
  for (Eigen::Index i = 0; i < model.centers.rows(); ++i) {
    for (Eigen::Index j = 0; j < model.centers.cols(); ++j) put<double>(os, model.centers(i, j));
  }
  for (Eigen::Index i = 0; i < model.tri.rows(); ++i) {
    for (Eigen::Index j = 0; j < model.tri.cols(); ++j) put<double>(os, model.tri(i, j));
  }
  for (Eigen::Index i = 0; i < model.alpha.size(); ++i) put<double>(os, model.alpha[i]);
  if (!os) throw Error("save_model: write failed for " + path);
}

NystromModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("load_model: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("model file: bad magic");
  }
  const auto m = get<std::uint32_t>(is, "M");
  const auto p = get<std::uint32_t>(is, "p");
  if (m == 0 || p == 0 || static_cast<std::uint64_t>(m) * p > (1ULL << 31)) {
    throw ParseError("model file: implausible dimensions");
  }
  NystromModel model;
  const auto kid = get<std::uint8_t>(is, "kernel id");
  if (kid > 1) throw ParseError("model file: unknown kernel id");
  const double sigma = get<double>(is, "sigma");
  model.kernel = kid == 0 ? KernelSpec::gaussian(sigma) : KernelSpec::linear();
  model.loss = loss_from_id(get<std::uint8_t>(is, "loss id"));
  model.lambda = get<double>(is, "lambda");
  model.jitter = get<double>(is, "jitter");

  model.centers.resize(m, p);
  for (std::uint32_t i = 0; i < m; ++i) {
    for (std::uint32_t j = 0; j < p; ++j) model.centers(i, j) = get<double>(is, "centers");
  }
  model.tri.resize(m, m);
  for (std::uint32_t i = 0; i < m; ++i) {
    for (std::uint32_t j = 0; j < m; ++j) model.tri(i, j) = get<double>(is, "factor");
  }
  model.alpha.resize(m);
  for (std::uint32_t i = 0; i < m; ++i) model.alpha[i] = get<double>(is, "alpha");

  char extra;
  is.read(&extra, 1);
  if (!is.eof()) throw ParseError("model file: trailing bytes");
  return model;
}

}  // namespace gsc
