#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "gsc/data_io.hpp"
#include "gsc/nystrom.hpp"
#include "support.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace gsc;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& contents) : path(name) {
    std::ofstream os(path);
    os << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_SUITE_BEGIN("data_io");

TEST_CASE("libsvm parsing") {
  TempFile f("t_basic.libsvm", "+1 1:0.5 3:2.0\n-1 2:1.5\n");
  const Dataset d = load_libsvm(f.path);
  CHECK(d.rows() == 2);
  CHECK(d.cols() == 3);
  CHECK(d.y[0] == 1.0);
  CHECK(d.x(0, 0) == 0.5);
  CHECK(d.x(0, 1) == 0.0);
  CHECK(d.x(0, 2) == 2.0);
  CHECK(d.x(1, 1) == 1.5);

  SUBCASE("empty file") {
    TempFile e("t_empty.libsvm", "");
    CHECK_THROWS_AS(load_libsvm(e.path), ParseError);
  }

  SUBCASE("parse errors carry line numbers") {
    TempFile bad("t_bad.libsvm", "+1 1:0.5\n-1 3:1.0 2:2.0\n");
    try {
      load_libsvm(bad.path);
      FAIL("expected a parse error");
    } catch (const ParseError& err) {
      CHECK(std::string(err.what()).find(":2:") != std::string::npos);
    }
  }

  SUBCASE("zero-based index is rejected") {
    TempFile bad("t_zero.libsvm", "+1 0:0.5\n");
    CHECK_THROWS_AS(load_libsvm(bad.path), ParseError);
  }

  SUBCASE("capacity guard refuses absurd dimensions") {
    TempFile huge("t_huge.libsvm", "+1 400000000:1.0\n");
    CHECK_THROWS_AS(load_libsvm(huge.path), CapacityError);
  }
}

TEST_CASE("libsvm round trip is bit exact") {
  SplitMix64 rng(3);
  Dataset d;
  d.x.resize(7, 4);
  d.y.resize(7);
  for (Eigen::Index i = 0; i < 7; ++i) {
    d.y[i] = i % 2 == 0 ? 1.0 : -1.0;
    for (int j = 0; j < 4; ++j) {
      d.x(i, j) = (i + j) % 3 == 0 ? 0.0 : rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
    }
  }
  // Keep at least one nonzero in the last column so the width survives.
  d.x(0, 3) = 1.25;
  write_libsvm("t_round.libsvm", d);
  const Dataset back = load_libsvm("t_round.libsvm");
  std::remove("t_round.libsvm");
  REQUIRE(back.cols() == d.cols());
  CHECK(back.x == d.x);
  CHECK(back.y == d.y);
}

TEST_CASE("csv parsing") {
  TempFile f("t_basic.csv", "a,b,label\n1.0,2.0,1\n3.0,4.0,-1\n");
  const Dataset d = load_csv(f.path, "label");
  CHECK(d.rows() == 2);
  CHECK(d.cols() == 2);
  CHECK(d.y[1] == -1.0);
  CHECK(d.x(1, 0) == 3.0);

  CHECK_THROWS_AS(load_csv(f.path, "missing"), ParseError);

  TempFile ragged("t_ragged.csv", "a,label\n1.0,1\n2.0\n");
  try {
    load_csv(ragged.path, "label");
    FAIL("expected a parse error");
  } catch (const ParseError& err) {
    CHECK(std::string(err.what()).find(":3:") != std::string::npos);
  }
}

TEST_CASE("standardize") {
  Dataset d;
  d.x.resize(2, 2);
  d.x << 1.0, 5.0, 3.0, 5.0;
  d.y.resize(2);
  d.y << 1.0, -1.0;
  const Dataset s = standardize(d);
  CHECK(s.x(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(s.x(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  // Constant column left alone, flagged.
  REQUIRE(s.unscaled_columns.size() == 1);
  CHECK(s.unscaled_columns[0] == 1);
  CHECK(s.x(0, 1) == 0.0);

  SUBCASE("idempotent") {
    const Dataset twice = standardize(s);
    CHECK((twice.x - s.x).lpNorm<Eigen::Infinity>() <= 1e-12);
  }

  SUBCASE("needs at least two rows") {
    Dataset one;
    one.x.resize(1, 2);
    one.x << 1.0, 2.0;
    one.y.resize(1);
    one.y << 1.0;
    CHECK_THROWS_AS(standardize(one), DomainError);
  }

  SUBCASE("column means vanish") {
    const auto data = synth_logistic(100, 5, 0.5, 0.1, 17);
    const Dataset std1 = standardize(data);
    CHECK(std1.x.colwise().mean().lpNorm<Eigen::Infinity>() <= 1e-12);
    for (Eigen::Index j = 0; j < std1.cols(); ++j) {
      CHECK(std1.x.col(j).squaredNorm() / 100.0 == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("split") {
  const auto data = synth_logistic(10, 3, 0.5, 0.0, 5);
  const auto [train, test] = split(data, 0.2, 99);
  CHECK(train.rows() == 8);
  CHECK(test.rows() == 2);

  const auto [train2, test2] = split(data, 0.2, 99);
  CHECK(train.x == train2.x);
  CHECK(test.y == test2.y);

  const auto [train3, test3] = split(data, 0.2, 100);
  CHECK(train.x != train3.x);  // different permutation almost surely
}

TEST_CASE("synthetic generators") {
  SUBCASE("determinism") {
    const auto a = synth_logistic(50, 4, 0.5, 0.1, 123);
    const auto b = synth_logistic(50, 4, 0.5, 0.1, 123);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    const auto m1 = synth_two_moons(40, 0.1, 9);
    const auto m2 = synth_two_moons(40, 0.1, 9);
    CHECK(m1.x == m2.x);
  }

  SUBCASE("noise-free planted problem is separable") {
    const auto data = synth_logistic(200, 5, 0.5, 0.0, 31);
    const FiniteSumProblem p(data.x, data.y, LossFamily::logistic());
    const VectorXd x = testsup::damped_newton_minimize(p, 1e-6);
    int errors = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const double s = data.x.row(i).dot(x);
      if ((s >= 0 ? 1.0 : -1.0) != data.y[i]) ++errors;
    }
    CHECK(static_cast<double>(errors) / 200.0 <= 0.001);
  }

  SUBCASE("two moons are separable by a kernel fit") {
    const auto data = synth_two_moons(300, 0.1, 77);
    const auto [train, test] = split(data, 0.3, 1);
    // Oracle kernel logistic fit with every training point as a center.
    const auto kernel = KernelSpec::gaussian(0.5);
    const auto idx = select_centers(train.x, kernel, train.rows(), Sampling::Uniform, 0.0, 1);
    MatrixXd centers(train.rows(), 2);
    for (Eigen::Index j = 0; j < train.rows(); ++j) {
      centers.row(j) = train.x.row(idx[static_cast<std::size_t>(j)]);
    }
    auto factor = factor_T(kernel, centers);
    const MatrixXd tri = factor.upper;
    const ProjectedProblem pp(train.x, train.y, LossFamily::logistic(), kernel, centers, factor);
    const VectorXd alpha = testsup::damped_newton_minimize(pp, 1e-5, 1e-12);

    NystromModel model{centers, tri, alpha, kernel, LossKind::Logistic, 1e-5, factor.jitter};
    const VectorXd labels = model.predict_labels(test.x);
    int errors = 0;
    for (Eigen::Index i = 0; i < test.rows(); ++i) {
      if (labels[i] != test.y[i]) ++errors;
    }
    CHECK(static_cast<double>(errors) / static_cast<double>(test.rows()) < 0.05);
  }
}

TEST_SUITE_END();
