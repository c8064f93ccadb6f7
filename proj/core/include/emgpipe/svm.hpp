#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "emgpipe/features.hpp"

namespace emg {

struct KernelParams {
  double gamma = 1.0;
  void validate() const;  // gamma > 0
};

// exp(-gamma * ||x - y||^2); x and y must have equal dimension.
double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma);

struct SmoOptions {
  double tolerance = 1e-3;
  // Consecutive pair updates that fail to move any multiplier before the
  // solver gives up and returns the partial model flagged as unconverged.
  long max_passes = 100;
  std::size_t cache_bytes = 64ull << 20;
  // Hard cap on pair updates; 0 picks max(1e7, 100 * points). Exhausting it
  // also returns the partial model flagged as unconverged.
  long max_iterations = 0;
};

struct BinarySvm {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coefficients;  // alpha_i * y_i, same order as support_vectors
  double bias = 0.0;
  KernelParams kernel;
  std::array<int, 2> class_pair{-1, -1};  // {positive-vote label, negative-vote label}
  double trained_c = 0.0;
  bool converged = true;

  double decision_value(std::span<const double> x) const;
};

// Soft-margin binary SVM trained by sequential minimal optimization: working
// sets of two multipliers, second-order pair selection, stopping when the
// KKT violation gap falls under opts.tolerance. labels are +1/-1.
BinarySvm train_binary_svm(const std::vector<std::vector<double>>& points,
                           const std::vector<int>& labels, double c,
                           KernelParams kernel, const SmoOptions& opts = {});

struct HyperparameterGrid {
  std::vector<double> c_values;
  std::vector<double> gamma_values;
  // C = 2^0, 2^2, ..., 2^16 and gamma = 2^-16, 2^-14, ..., 2^-2 (72 cells).
  static HyperparameterGrid standard();
};

struct SvmModel {
  std::vector<BinarySvm> machines;  // one per unordered pair of present classes
  double chosen_c = 0.0;
  double chosen_gamma = 0.0;
  StandardizationStats standardization;
  FeatureKind feature_kind = FeatureKind::kMav;
  WindowSpec window_spec;
  std::vector<int> classes_present;  // ascending

  // Max-wins vote over all pairwise machines; ties go to the lowest label.
  // Standardization is applied internally; expects a raw feature vector.
  int predict(std::span<const double> features) const;
};

// One-vs-one multiclass training. Fits standardization on `train`, then one
// binary machine per pair of classes present in it.
SvmModel train_multiclass(const FeatureSet& train, double c, KernelParams kernel,
                          const SmoOptions& opts = {});

std::vector<int> predict_all(const SvmModel& model, const FeatureSet& features);

struct GridCell {
  double c = 0.0;
  double gamma = 0.0;
  double validation_accuracy = 0.0;  // percent
  bool failed = false;
  std::string error;
  int unconverged_machines = 0;
};

struct GridSearchResult {
  double c = 0.0;
  double gamma = 0.0;
  double validation_accuracy = 0.0;  // percent
  std::vector<GridCell> cells;       // C-major, gamma-minor order
};

// Trains one model per grid cell and scores it on `validation`. Cells run in
// parallel when jobs > 1; the merge order is fixed, so results do not depend
// on scheduling. Ties prefer smaller C, then smaller gamma. Failed cells are
// recorded and skipped; if every cell fails a SearchError is thrown.
GridSearchResult grid_search(const FeatureSet& train, const FeatureSet& validation,
                             const HyperparameterGrid& grid, int jobs = 1,
                             const SmoOptions& opts = {});

}  // namespace emg
