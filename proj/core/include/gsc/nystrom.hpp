#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "gsc/globalization.hpp"
#include "gsc/kernel.hpp"
#include "gsc/problem.hpp"

namespace gsc {

/// M center indices from the n dataset rows. Uniform picks M distinct
/// indices; leverage-score sampling draws M i.i.d. indices proportional to
/// the ridge leverage scores at level t (computed exactly on a capped
/// candidate pool).
std::vector<Eigen::Index> select_centers(const Eigen::MatrixXd& x, const KernelSpec& kernel,
                                         Eigen::Index m, Sampling method, double t,
                                         std::uint64_t seed);

struct TriangularFactor {
  Eigen::MatrixXd upper;  ///< T with T^T T = K_MM + jitter I
  double jitter = 0.0;    ///< 0 when the clean factorization succeeded
};

/// Upper-triangular factor of the center kernel matrix. On Cholesky failure
/// the diagonal jitter escalates from 1e-12 to 1e-6 of trace(K)/M in decade
/// steps; the jitter actually used is recorded in the result and the model.
TriangularFactor factor_T(const KernelSpec& kernel, const Eigen::MatrixXd& centers);

/// Fitted Nystrom predictor g(x) = v(x) . (T^{-1} alpha) with
/// v(x) = (k(x, c_1), ..., k(x, c_M)). Under the triangular
/// reparametrization the RKHS norm of g equals ||alpha||.
struct NystromModel {
  Eigen::MatrixXd centers;  // M x p
  Eigen::MatrixXd tri;      // T, upper triangular
  Eigen::VectorXd alpha;
  KernelSpec kernel;
  LossKind loss = LossKind::Logistic;
  double lambda = 0.0;
  double jitter = 0.0;

  /// Scores for each row of x; one triangular solve shared by all rows.
  Eigen::VectorXd scores(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
  /// Sign decisions for the binary classification families.
  Eigen::VectorXd predict_labels(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
};

/// Flat little-endian model file, magic "GSCNYM01". Readers validate the
/// magic and every size before trusting the payload.
void save_model(const std::string& path, const NystromModel& model);
NystromModel load_model(const std::string& path);

/// The kernel objective restricted to the span of M centers, expressed in
/// the triangular reparametrization: an M-dimensional generalized
/// self-concordant finite sum whose gradient and Hessian-vector products
/// stream over the data in fixed row blocks. No n x n object is ever
/// formed; per-application cost is O(nM + M^2) and auxiliary memory O(n).
class ProjectedProblem final : public RegularizedObjective {
 public:
  ProjectedProblem(Eigen::MatrixXd x, Eigen::VectorXd y, LossFamily loss, KernelSpec kernel,
                   Eigen::MatrixXd centers, TriangularFactor factor);

  Eigen::Index dim() const override { return centers_.rows(); }
  Eigen::Index num_samples() const override { return x_.rows(); }
  double radius() const override { return radius_; }
  double smoothness_bound() const override { return smoothness_; }

  double loss_value(const Eigen::VectorXd& alpha) const override;
  Eigen::VectorXd loss_gradient(const Eigen::VectorXd& alpha) const override;
  Eigen::VectorXd loss_hessian_vec(const Eigen::VectorXd& alpha,
                                   const Eigen::VectorXd& p) const override;
  Eigen::MatrixXd loss_hessian_dense(const Eigen::VectorXd& alpha) const override;
  Eigen::VectorXd batch_loss_gradient(const Eigen::VectorXd& alpha,
                                      std::span<const Eigen::Index> rows) const override;
  Preconditioner build_preconditioner(const Eigen::VectorXd& alpha, double mu,
                                      Eigen::Index subsamples, Sampling sampling,
                                      std::uint64_t seed) const override;

  const Eigen::MatrixXd& data() const { return x_; }
  const Eigen::VectorXd& labels() const { return y_; }
  const LossFamily& loss() const { return loss_; }
  const KernelSpec& kernel() const { return kernel_; }
  const Eigen::MatrixXd& centers() const { return centers_; }
  const Eigen::MatrixXd& tri() const { return factor_.upper; }
  double jitter() const { return factor_.jitter; }

  /// Per-row scores v(x_i) . T^{-1} alpha, cached for the current alpha so
  /// the PCG inner loop does not recompute them.
  Eigen::VectorXd scores_for(const Eigen::VectorXd& alpha) const;

 private:
  Eigen::VectorXd solve_tri(const Eigen::VectorXd& v) const {  // T^{-1} v
    return factor_.upper.triangularView<Eigen::Upper>().solve(v);
  }
  Eigen::VectorXd solve_tri_t(const Eigen::VectorXd& v) const {  // T^{-T} v
    return factor_.upper.transpose().triangularView<Eigen::Lower>().solve(v);
  }

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  LossFamily loss_;
  KernelSpec kernel_;
  Eigen::MatrixXd centers_;
  TriangularFactor factor_;
  double radius_ = 0.0;
  double smoothness_ = 0.0;

  mutable std::mutex cache_mutex_;
  mutable Eigen::VectorXd cached_alpha_;
  mutable Eigen::VectorXd cached_scores_;
  mutable bool cache_valid_ = false;
};

/// Subsampled projected-Hessian preconditioner
/// B^T B = (1/Q) T^{-T} K_MQ D_Q K_QM T^{-1} + mu I.
Preconditioner compute_preconditioner(const ProjectedProblem& pp, const Eigen::VectorXd& alpha,
                                      double mu, Eigen::Index subsamples, Sampling sampling,
                                      std::uint64_t seed);

struct KernelSolveConfig {
  GlobalizationConfig scheme;  ///< solver.subsamples is the preconditioner Q
  Eigen::Index centers = 0;    ///< M
  Sampling center_sampling = Sampling::Uniform;
  double center_level = 0.0;  ///< leverage level t for center sampling; 0 = lambda
};

struct KernelSolveResult {
  NystromModel model;
  SolveTrace trace;
};

/// End-to-end kernel fit: select centers, factor K_MM, then run the
/// decreasing-regularization scheme on the projected problem with
/// preconditioned-CG Newton steps.
KernelSolveResult kernel_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               LossFamily loss, const KernelSpec& kernel, double lambda,
                               const KernelSolveConfig& config);

}  // namespace gsc
