#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "emgpipe/features.hpp"
#include "emgpipe/svm.hpp"

namespace emg {

enum class Part { kPart1 = 1, kPart2 = 2 };

// Sessions recorded on a given day (1..4). The first one is the training
// acquisition for that day's experiments.
std::array<int, 3> day_acquisitions(int day);
int training_acquisition(int day);

struct ExperimentPlan {
  Part part = Part::kPart1;
  int day = 1;
  int training_acq = 2;
  std::vector<int> validation_acqs;  // all three sessions in part 1, training one in part 2
  std::vector<int> testing_acqs;     // the day's three sessions
  std::uint64_t seed = 0;
  double train_fraction_of_half = 0.10;
};

ExperimentPlan make_plan(Part part, int day, std::uint64_t seed,
                         double train_fraction_of_half = 0.10);

// Window-level 50/50 split; on odd counts half_a gets the extra row. Rows stay
// in temporal order inside each half. Same seed, same split; the part number
// never enters the seed derivation, so parts 1 and 2 share identical splits.
std::pair<FeatureSet, FeatureSet> split_acquisition(const FeatureSet& features,
                                                    std::uint64_t seed);

// ceil(fraction * rows) rows, allocated per class by largest remainder so each
// class lands within one row of its proportional share (and keeps at least one
// row when the budget allows).
FeatureSet subsample_training(const FeatureSet& half_a, double fraction,
                              std::uint64_t seed);

struct HoldOutResult {
  FeatureSet validation;  // repetition-1 movement windows
  FeatureSet testing;     // everything else
  std::vector<int> missing_movements;  // movements with no repetition-1 row
};

HoldOutResult hold_out_validation(const FeatureSet& half_b);

struct MaterializedPlan {
  ExperimentPlan plan;
  FeatureSet training;
  FeatureSet validation;
  std::vector<std::pair<int, FeatureSet>> testing_sets;  // acquisition id -> rows
  std::vector<std::string> warnings;
};

// Splits every acquisition of the plan's day, draws the training subsample
// from the training acquisition's first half and assembles validation/testing
// hold-outs per the plan's part. Throws PlanError when a needed acquisition
// is missing from the map.
MaterializedPlan assemble_plan(const ExperimentPlan& plan,
                               const std::map<int, FeatureSet>& features_by_acq);

struct SmoothingConfig {
  int window_k = 5;  // odd; 1 disables smoothing
  void validate() const;
};

// Centered majority vote over window_k predictions, truncated at the edges.
// Ties keep the original center prediction.
std::vector<int> smooth_predictions(const std::vector<int>& predictions,
                                    const SmoothingConfig& config);

// Percent of positions where the two sequences agree.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};  // [truth][predicted]

  std::int64_t total() const;
  std::int64_t diagonal() const;
  double overall_accuracy() const;  // percent
};

ConfusionMatrix confusion(const std::vector<int>& predicted, const std::vector<int>& truth);

// Labels ordered by per-class recall, best first; ties by label index.
// Classes that never occur rank last (in index order).
std::vector<int> rank_movements(const ConfusionMatrix& matrix);

enum class SmoothingSelection { kOff, kOn, kBoth };

struct ReportCell {
  Part part = Part::kPart1;
  int day = 0;
  int train_acq = 0;
  std::vector<int> validation_acqs;
  int test_acq = 0;
  FeatureKind feature_kind = FeatureKind::kMav;
  bool smoothing = false;
  double accuracy = 0.0;  // percent
  double chosen_c = 0.0;
  double chosen_gamma = 0.0;
  double validation_accuracy = 0.0;  // percent
  ConfusionMatrix confusion;
  std::vector<int> ranking;
  bool failed = false;
  std::string error;
};

struct ExperimentReport {
  std::uint64_t seed = 0;
  std::vector<ReportCell> cells;
};

// Grid search on the materialized plan, final model with the chosen pair,
// then one report cell per (testing acquisition, smoothing variant).
// Evaluation failures are recorded in the affected cells, not thrown.
std::vector<ReportCell> run_experiment(const MaterializedPlan& plan,
                                       FeatureKind kind,
                                       const SmoothingConfig& smoothing,
                                       SmoothingSelection selection,
                                       const HyperparameterGrid& grid,
                                       int jobs = 1,
                                       const SmoOptions& opts = {});

}  // namespace emg
