#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "emgpipe/errors.hpp"
#include "emgpipe/rng.hpp"
#include "emgpipe/svm.hpp"
#include "oracles.hpp"

using namespace emg;

namespace {

std::vector<std::vector<double>> random_points(Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (auto& p : pts) {
    for (auto& v : p) v = rng.uniform(-2.0, 2.0);
  }
  return pts;
}

std::vector<std::vector<double>> kernel_matrix(const std::vector<std::vector<double>>& pts,
                                               double gamma) {
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> k(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i][j] = rbf_kernel(pts[i], pts[j], gamma);
  }
  return k;
}

double dual_objective_of(const BinarySvm& svm,
                         const std::vector<std::vector<double>>& pts,
                         const std::vector<int>& labels, double gamma) {
  // recover alpha_i >= 0 from the signed dual coefficients of the support set
  std::vector<double> alpha(pts.size(), 0.0);
  for (std::size_t s = 0; s < svm.support_vectors.size(); ++s) {
    // match the support vector back to its training point
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (svm.support_vectors[s] == pts[i] && alpha[i] == 0.0 &&
          svm.dual_coefficients[s] * labels[i] > 0.0) {
        alpha[i] = svm.dual_coefficients[s] * labels[i];
        break;
      }
    }
  }
  oracle::QpProblem prob;
  prob.kernel = kernel_matrix(pts, gamma);
  prob.labels = labels;
  prob.c = svm.trained_c;
  return oracle::dual_objective(prob, alpha);
}

}  // namespace

TEST_SUITE("svm") {

TEST_CASE("rbf kernel basics") {
  const std::vector<double> x = {1.0, 2.0};
  const std::vector<double> y = {2.0, 0.0};
  CHECK(rbf_kernel(x, x, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rbf_kernel(x, y, 0.5) == doctest::Approx(std::exp(-0.5 * 5.0)).epsilon(1e-14));
  CHECK(rbf_kernel(x, y, 0.5) == doctest::Approx(rbf_kernel(y, x, 0.5)).epsilon(1e-15));
  const std::vector<double> z = {1.0};
  CHECK_THROWS_AS(rbf_kernel(x, z, 0.5), DomainError);
  KernelParams bad;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("kernel matrices are positive semidefinite") {
  Rng rng(404);
  for (double gamma : {0.01, 0.3, 4.0}) {
    const auto pts = random_points(rng, 16, 3);
    const auto k = kernel_matrix(pts, gamma);
    Eigen::MatrixXd m(16, 16);
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) m(i, j) = k[i][j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    CHECK(solver.eigenvalues().minCoeff() >= -1e-9);
  }
}

TEST_CASE("two symmetric points have the closed-form solution") {
  // Points +/-1 in 1D, gamma = 1: alpha_1 = alpha_2 = 1/(1 - e^-4), bias 0.
  const std::vector<std::vector<double>> pts = {{1.0}, {-1.0}};
  const std::vector<int> labels = {1, -1};
  KernelParams kernel;
  kernel.gamma = 1.0;
  const auto svm = train_binary_svm(pts, labels, 1e6, kernel);
  REQUIRE(svm.support_vectors.size() == 2);
  const double expected_alpha = 1.0 / (1.0 - std::exp(-4.0));
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(std::fabs(svm.dual_coefficients[s]) == doctest::Approx(expected_alpha).epsilon(1e-3));
  }
  CHECK(svm.bias == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(svm.decision_value(pts[0]) > 0.0);
  CHECK(svm.decision_value(pts[1]) < 0.0);
}

TEST_CASE("XOR becomes separable under the RBF kernel") {
  const std::vector<std::vector<double>> pts = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const std::vector<int> labels = {1, 1, -1, -1};
  KernelParams kernel;
  kernel.gamma = 1.0;
  const auto svm = train_binary_svm(pts, labels, 1024.0, kernel);
  CHECK(svm.converged);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(labels[i] * svm.decision_value(pts[i]) > 0.0);
  }
}

TEST_CASE("random small problems match a dense QP oracle") {
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 4 + rng.below(17);  // 4..20 points
    const std::size_t dim = 1 + rng.below(4);
    auto pts = random_points(rng, n, dim);
    std::vector<int> labels(n);
    bool has_pos = false, has_neg = false;
    for (auto& l : labels) {
      l = rng.below(2) == 0 ? -1 : 1;
      (l > 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
      labels[0] = 1;
      labels[1] = -1;
    }
    const double c = std::pow(2.0, rng.uniform(-2.0, 8.0));
    const double gamma = std::pow(2.0, rng.uniform(-6.0, 1.0));

    KernelParams kernel;
    kernel.gamma = gamma;
    SmoOptions opts;
    opts.tolerance = 1e-5;  // tight stop so the dual gap is small
    opts.max_passes = 10000;
    const auto svm = train_binary_svm(pts, labels, c, kernel, opts);
    REQUIRE(svm.converged);

    oracle::QpProblem prob;
    prob.kernel = kernel_matrix(pts, gamma);
    prob.labels = labels;
    prob.c = c;
    const auto ref_alpha = oracle::qp_solve(prob);
    const double ref_obj = oracle::dual_objective(prob, ref_alpha);
    const double got_obj = dual_objective_of(svm, pts, labels, gamma);
    CHECK(std::fabs(got_obj - ref_obj) <= 1e-3 * std::max(1.0, std::fabs(ref_obj)));

    // KKT feasibility of the returned machine, measured against its own bias
    std::vector<double> alpha(n, 0.0);
    for (std::size_t s = 0; s < svm.support_vectors.size(); ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        if (svm.support_vectors[s] == pts[i] && alpha[i] == 0.0 &&
            svm.dual_coefficients[s] * labels[i] > 0.0) {
          alpha[i] = svm.dual_coefficients[s] * labels[i];
          break;
        }
      }
    }
    CHECK(oracle::kkt_violation(prob, alpha, svm.bias) <= 1e-3);
    double balance = 0.0;
    for (std::size_t i = 0; i < n; ++i) balance += alpha[i] * labels[i];
    CHECK(std::fabs(balance) <= 1e-6);
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("duplicated training points do not change the decision function") {
  Rng rng(99);
  auto pts = random_points(rng, 12, 2);
  std::vector<int> labels(12);
  for (std::size_t i = 0; i < 12; ++i) {
    labels[i] = pts[i][0] + 0.3 * pts[i][1] > 0.0 ? 1 : -1;
  }
  KernelParams kernel;
  kernel.gamma = 0.5;
  SmoOptions opts;
  opts.tolerance = 1e-8;
  opts.max_passes = 50000;
  // The invariance argument (split each alpha across the two copies) needs the
  // box inactive: with alphas pinned at C, doubling the data doubles the
  // effective budget and the optimum moves. Separable labels + generous C keep
  // every multiplier interior; the REQUIRE below guards that precondition.
  const double c = 1000.0;
  const auto base = train_binary_svm(pts, labels, c, kernel, opts);
  REQUIRE(base.converged);
  for (double a : base.dual_coefficients) REQUIRE(std::fabs(a) < 0.99 * c);

  auto doubled_pts = pts;
  doubled_pts.insert(doubled_pts.end(), pts.begin(), pts.end());
  auto doubled_labels = labels;
  doubled_labels.insert(doubled_labels.end(), labels.begin(), labels.end());
  const auto doubled = train_binary_svm(doubled_pts, doubled_labels, c, kernel, opts);

  for (int probe = 0; probe < 40; ++probe) {
    const std::vector<double> x = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    CHECK(base.decision_value(x) == doctest::Approx(doubled.decision_value(x)).epsilon(1e-6));
  }
}

TEST_CASE("larger C memorizes at least as well on the training set") {
  Rng rng(123);
  const std::size_t n = 60;
  auto pts = random_points(rng, n, 2);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool noisy = rng.below(10) == 0;
    const int clean = pts[i][0] > 0.0 ? 1 : -1;
    labels[i] = noisy ? -clean : clean;
  }
  KernelParams kernel;
  kernel.gamma = 2.0;
  SmoOptions opts;
  opts.max_passes = 50000;
  auto errors_at = [&](double c) {
    const auto svm = train_binary_svm(pts, labels, c, kernel, opts);
    int errors = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] * svm.decision_value(pts[i]) <= 0.0) ++errors;
    }
    return errors;
  };
  CHECK(errors_at(std::pow(2.0, 16)) <= errors_at(1.0));
}

TEST_CASE("multiclass one-vs-one votes with lowest-label tie-break") {
  // Three classes at triangle corners; machine count = 3 choose 2.
  FeatureSet train;
  train.feature_kind = FeatureKind::kMav;
  Rng rng(7);
  const std::array<std::array<double, 2>, 3> centers = {{{0, 0}, {4, 0}, {0, 4}}};
  const std::array<int, 3> class_labels = {1, 5, 9};
  for (int cls = 0; cls < 3; ++cls) {
    for (int i = 0; i < 12; ++i) {
      std::array<double, kNumChannels> row{};
      row[0] = centers[cls][0] + 0.2 * rng.gaussian();
      row[1] = centers[cls][1] + 0.2 * rng.gaussian();
      train.vectors.push_back(row);
      train.labels.push_back(class_labels[cls]);
      train.repetition_index.push_back(1 + i % 4);
      train.window_start_ms.push_back(static_cast<int>(train.size()) * 100);
      train.acq_ids.push_back(2);
    }
  }
  train.acquisition_id = 2;

  KernelParams kernel;
  kernel.gamma = 0.25;
  const auto model = train_multiclass(train, 16.0, kernel);
  CHECK(model.machines.size() == 3);
  CHECK(model.classes_present == std::vector<int>{1, 5, 9});
  for (const auto& m : model.machines) {
    CHECK(m.class_pair[0] < m.class_pair[1]);
  }

  // training points classify correctly
  const auto preds = predict_all(model, train);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == train.labels[i];
  CHECK(hits == train.size());
}

TEST_CASE("a cyclic 1-1-1 vote falls back to the lowest label") {
  // Hand-built machines with no support vectors: decision_value == bias, so
  // the votes are forced into a Condorcet cycle 1 > 5, 5 > 9, 9 > 1.
  SvmModel model;
  model.classes_present = {1, 5, 9};
  model.standardization.means.fill(0.0);
  model.standardization.std_devs.fill(1.0);
  auto stub = [](int pos, int neg, double bias) {
    BinarySvm m;
    m.class_pair = {pos, neg};
    m.bias = bias;
    return m;
  };
  model.machines.push_back(stub(1, 5, 1.0));   // votes 1
  model.machines.push_back(stub(5, 9, 1.0));   // votes 5
  model.machines.push_back(stub(1, 9, -1.0));  // votes 9
  const std::array<double, kNumChannels> x{};
  CHECK(model.predict(x) == 1);

  // break the cycle: 9 beats 1 and 5 beats 1, 5 beats 9 -> 5 has two votes
  model.machines[0].bias = -1.0;  // now votes 5
  CHECK(model.predict(x) == 5);
}

TEST_CASE("single-class training is rejected") {
  FeatureSet train;
  train.feature_kind = FeatureKind::kMav;
  for (int i = 0; i < 5; ++i) {
    std::array<double, kNumChannels> row{};
    row[0] = i;
    train.vectors.push_back(row);
    train.labels.push_back(3);
    train.repetition_index.push_back(1);
    train.window_start_ms.push_back(i * 100);
    train.acq_ids.push_back(2);
  }
  CHECK_THROWS_AS(train_multiclass(train, 1.0, KernelParams{}), TrainingError);
}

TEST_CASE("standard grid matches the documented lattice") {
  const auto grid = HyperparameterGrid::standard();
  REQUIRE(grid.c_values.size() == 9);
  REQUIRE(grid.gamma_values.size() == 8);
  for (std::size_t i = 0; i < grid.c_values.size(); ++i) {
    CHECK(grid.c_values[i] == doctest::Approx(std::pow(2.0, 2.0 * i)).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < grid.gamma_values.size(); ++i) {
    CHECK(grid.gamma_values[i] ==
          doctest::Approx(std::pow(2.0, -16.0 + 2.0 * i)).epsilon(1e-12));
  }
}

TEST_CASE("grid search prefers smaller C then smaller gamma on ties") {
  // A trivially separable problem: every sensible cell hits 100% validation,
  // so the tie-break must pick the smallest C, then the smallest gamma.
  FeatureSet train;
  train.feature_kind = FeatureKind::kMav;
  Rng rng(31);
  for (int cls = 0; cls < 2; ++cls) {
    for (int i = 0; i < 8; ++i) {
      std::array<double, kNumChannels> row{};
      row[0] = cls == 0 ? -3.0 + 0.1 * rng.gaussian() : 3.0 + 0.1 * rng.gaussian();
      train.vectors.push_back(row);
      train.labels.push_back(cls + 1);
      train.repetition_index.push_back(1 + i % 2);
      train.window_start_ms.push_back(static_cast<int>(train.size()) * 100);
      train.acq_ids.push_back(2);
    }
  }
  auto validation = train;

  HyperparameterGrid grid;
  grid.c_values = {1.0, 4.0, 16.0};
  grid.gamma_values = {0.125, 0.5};
  const auto result = grid_search(train, validation, grid, 1);
  CHECK(result.validation_accuracy == doctest::Approx(100.0));
  CHECK(result.c == doctest::Approx(1.0));
  CHECK(result.gamma == doctest::Approx(0.125));
  REQUIRE(result.cells.size() == 6);
  // C-major, gamma-minor enumeration order
  CHECK(result.cells[0].c == doctest::Approx(1.0));
  CHECK(result.cells[0].gamma == doctest::Approx(0.125));
  CHECK(result.cells[1].gamma == doctest::Approx(0.5));
  CHECK(result.cells[2].c == doctest::Approx(4.0));

  // identical results regardless of worker count
  const auto parallel = grid_search(train, validation, grid, 4);
  CHECK(parallel.c == result.c);
  CHECK(parallel.gamma == result.gamma);
  CHECK(parallel.validation_accuracy == result.validation_accuracy);
  REQUIRE(parallel.cells.size() == result.cells.size());
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    CHECK(parallel.cells[i].validation_accuracy ==
          doctest::Approx(result.cells[i].validation_accuracy).epsilon(1e-12));
  }
}

TEST_CASE("an exhausted iteration budget is flagged, not hidden") {
  // Three pair updates cannot finish this overlapping problem at tight
  // tolerance; the partial model must still be usable.
  Rng rng(71);
  auto pts = random_points(rng, 40, 2);
  std::vector<int> labels(40);
  for (std::size_t i = 0; i < 40; ++i) labels[i] = i % 2 == 0 ? 1 : -1;  // labels ~ noise
  KernelParams kernel;
  kernel.gamma = 0.1;
  SmoOptions opts;
  opts.max_iterations = 3;
  opts.tolerance = 1e-9;
  const auto svm = train_binary_svm(pts, labels, 1e6, kernel, opts);
  CHECK_FALSE(svm.converged);
  CHECK(std::isfinite(svm.decision_value(pts[0])));
  CHECK_FALSE(svm.support_vectors.empty());

  SmoOptions roomy = opts;
  roomy.max_iterations = 0;
  roomy.tolerance = 1e-3;
  CHECK(train_binary_svm(pts, labels, 1.0, kernel, roomy).converged);
}

}  // TEST_SUITE
