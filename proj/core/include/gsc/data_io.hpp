#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gsc/errors.hpp"

namespace gsc {

/// Dense in-memory dataset. Loads refuse to materialize more than the
/// 2 GiB guard. Labels arriving as {0,1} for binary losses are normalized
/// to {-1,+1} downstream (see FiniteSumProblem), not here.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd mean;  ///< set by standardize()
  Eigen::VectorXd std;   ///< set by standardize(); 1 for flagged columns
  std::vector<Eigen::Index> unscaled_columns;  ///< zero-variance columns left alone
  std::string provenance;

  Eigen::Index rows() const { return x.rows(); }
  Eigen::Index cols() const { return x.cols(); }
};

/// Sparse 1-based libsvm text: "label idx:val idx:val ...", strictly
/// increasing indices per line. Parse errors carry the offending line.
Dataset load_libsvm(const std::string& path);

/// Lossless writer (shortest round-trip formatting); zeros are skipped.
void write_libsvm(const std::string& path, const Dataset& data);

/// CSV with a header row; label_column names the target column.
Dataset load_csv(const std::string& path, const std::string& label_column);

/// Per-column mean 0 / population std 1; zero-variance columns are left
/// unscaled and flagged. Already-standardized data passes through within
/// roundoff (idempotent).
Dataset standardize(Dataset data);

/// Seeded permutation split into (train, test).
std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed);

/// Gaussian features with a planted unit separator: labels are the sign of
/// the margin-shifted score and then flipped with probability `noise`, so
/// noise = 0 is linearly separable and the Bayes error is ~noise.
Dataset synth_logistic(Eigen::Index n, Eigen::Index d, double margin, double noise,
                       std::uint64_t seed);

/// The classic interleaved half-circles with Gaussian jitter; labels +-1.
Dataset synth_two_moons(Eigen::Index n, double noise, std::uint64_t seed);

}  // namespace gsc
