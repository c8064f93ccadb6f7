#include "emgpipe/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "emgpipe/errors.hpp"
#include "emgpipe/rng.hpp"

namespace emg {

namespace {

// seed-derivation streams; the part number never enters, so part 1 and part 2
// materialize identical splits
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kSubsampleStream = 2;

std::uint64_t acq_stream(int acquisition_id, std::uint64_t stream) {
  return (static_cast<std::uint64_t>(acquisition_id) << 8) | stream;
}

}  // namespace

std::array<int, 3> day_acquisitions(int day) {
  switch (day) {
    case 1: return {2, 3, 5};
    case 2: return {6, 7, 8};
    case 3: return {9, 10, 11};
    case 4: return {12, 13, 14};
    default: throw DomainError("day must be 1..4");
  }
}

int training_acquisition(int day) { return day_acquisitions(day)[0]; }

ExperimentPlan make_plan(Part part, int day, std::uint64_t seed,
                         double train_fraction_of_half) {
  if (!(train_fraction_of_half > 0.0) || train_fraction_of_half > 1.0) {
    throw DomainError("training fraction must lie in (0, 1]");
  }
  const auto acqs = day_acquisitions(day);
  ExperimentPlan plan;
  plan.part = part;
  plan.day = day;
  plan.training_acq = acqs[0];
  plan.testing_acqs.assign(acqs.begin(), acqs.end());
  if (part == Part::kPart1) {
    plan.validation_acqs.assign(acqs.begin(), acqs.end());
  } else {
    plan.validation_acqs = {acqs[0]};
  }
  plan.seed = seed;
  plan.train_fraction_of_half = train_fraction_of_half;
  return plan;
}

std::pair<FeatureSet, FeatureSet> split_acquisition(const FeatureSet& features,
                                                    std::uint64_t seed) {
  const std::size_t m = features.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t half_a_size = m - m / 2;  // ceil(m / 2)
  std::vector<std::size_t> a(order.begin(), order.begin() + half_a_size);
  std::vector<std::size_t> b(order.begin() + half_a_size, order.end());
  std::sort(a.begin(), a.end());  // membership is random, order stays temporal
  std::sort(b.begin(), b.end());
  return {features.row_subset(a), features.row_subset(b)};
}

FeatureSet subsample_training(const FeatureSet& half_a, double fraction,
                              std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) throw DomainError("fraction must lie in (0, 1]");
  const std::size_t m = half_a.size();
  if (m == 0) throw DomainError("cannot subsample an empty feature set");
  const std::size_t target =
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m)));

  std::array<std::vector<std::size_t>, kNumClasses> rows_by_class;
  for (std::size_t r = 0; r < m; ++r) {
    const int label = half_a.labels[r];
    if (!is_valid_label(label)) throw DomainError("label outside 0..17");
    rows_by_class[label].push_back(r);
  }

  // largest-remainder allocation: each class within one row of its
  // proportional share while the total stays exactly ceil(fraction * m)
  std::array<std::size_t, kNumClasses> take{};
  std::vector<std::pair<double, int>> remainders;  // (-remainder, class)
  std::size_t allocated = 0;
  for (int cls = 0; cls < kNumClasses; ++cls) {
    if (rows_by_class[cls].empty()) continue;
    const double quota = fraction * static_cast<double>(rows_by_class[cls].size());
    take[cls] = static_cast<std::size_t>(std::floor(quota));
    allocated += take[cls];
    remainders.push_back({-(quota - std::floor(quota)), cls});
  }
  std::sort(remainders.begin(), remainders.end());
  for (const auto& [neg_rem, cls] : remainders) {
    if (allocated >= target) break;
    if (-neg_rem <= 0.0) break;
    ++take[cls];
    ++allocated;
  }
  // keep every present class represented when the budget allows, stealing
  // from the largest allocations
  for (int cls = 0; cls < kNumClasses; ++cls) {
    if (rows_by_class[cls].empty() || take[cls] > 0) continue;
    int donor = -1;
    for (int d = 0; d < kNumClasses; ++d) {
      if (take[d] >= 2 && (donor < 0 || take[d] > take[donor])) donor = d;
    }
    if (donor < 0) break;
    --take[donor];
    ++take[cls];
  }

  Rng rng(seed);
  std::vector<std::size_t> selected;
  selected.reserve(target);
  for (int cls = 0; cls < kNumClasses; ++cls) {
    if (take[cls] == 0) continue;
    std::vector<std::size_t> rows = rows_by_class[cls];
    rng.shuffle(rows);
    selected.insert(selected.end(), rows.begin(),
                    rows.begin() + static_cast<std::ptrdiff_t>(take[cls]));
  }
  std::sort(selected.begin(), selected.end());
  return half_a.row_subset(selected);
}

HoldOutResult hold_out_validation(const FeatureSet& half_b) {
  std::vector<std::size_t> validation_rows;
  std::vector<std::size_t> testing_rows;
  std::array<bool, kNumClasses> movement_present{};
  std::array<bool, kNumClasses> has_rep1{};
  for (std::size_t r = 0; r < half_b.size(); ++r) {
    const int label = half_b.labels[r];
    const bool hold = label != kRestLabel && half_b.repetition_index[r] == 1;
    (hold ? validation_rows : testing_rows).push_back(r);
    if (label != kRestLabel) {
      movement_present[label] = true;
      if (hold) has_rep1[label] = true;
    }
  }
  HoldOutResult result;
  result.validation = half_b.row_subset(validation_rows);
  result.testing = half_b.row_subset(testing_rows);
  for (int cls = 1; cls < kNumClasses; ++cls) {
    if (movement_present[cls] && !has_rep1[cls]) result.missing_movements.push_back(cls);
  }
  return result;
}

MaterializedPlan assemble_plan(const ExperimentPlan& plan,
                               const std::map<int, FeatureSet>& features_by_acq) {
  MaterializedPlan out;
  out.plan = plan;
  for (int acq : plan.testing_acqs) {
    if (!features_by_acq.count(acq)) {
      throw PlanError("acquisition " + std::to_string(acq) + " is not available");
    }
  }

  std::vector<FeatureSet> validation_parts;
  for (int acq : plan.testing_acqs) {
    const FeatureSet& features = features_by_acq.at(acq);
    auto [half_a, half_b] =
        split_acquisition(features, mix_seed(plan.seed, acq_stream(acq, kSplitStream)));
    if (acq == plan.training_acq) {
      out.training = subsample_training(
          half_a, plan.train_fraction_of_half,
          mix_seed(plan.seed, acq_stream(acq, kSubsampleStream)));
    }
    HoldOutResult hold = hold_out_validation(half_b);
    for (int movement : hold.missing_movements) {
      out.warnings.push_back("acquisition " + std::to_string(acq) + ": movement " +
                             std::to_string(movement) +
                             " has no repetition-1 window in its hold-out half");
    }
    const bool validates =
        std::find(plan.validation_acqs.begin(), plan.validation_acqs.end(), acq) !=
        plan.validation_acqs.end();
    if (validates) validation_parts.push_back(std::move(hold.validation));
    out.testing_sets.emplace_back(acq, std::move(hold.testing));
  }
  out.validation = FeatureSet::concatenate(validation_parts);
  return out;
}

void SmoothingConfig::validate() const {
  if (window_k < 1 || window_k % 2 == 0) {
    throw DomainError("smoothing window must be a positive odd count");
  }
}

std::vector<int> smooth_predictions(const std::vector<int>& predictions,
                                    const SmoothingConfig& config) {
  config.validate();
  const std::size_t n = predictions.size();
  if (config.window_k == 1 || n == 0) return predictions;
  const std::size_t radius = static_cast<std::size_t>(config.window_k / 2);

  std::vector<int> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t >= radius ? t - radius : 0;
    const std::size_t hi = std::min(n - 1, t + radius);
    std::array<int, kNumClasses> counts{};
    for (std::size_t k = lo; k <= hi; ++k) {
      const int label = predictions[k];
      if (!is_valid_label(label)) throw DomainError("prediction outside 0..17");
      ++counts[label];
    }
    int best = predictions[t];
    bool tie = false;
    for (int cls = 0; cls < kNumClasses; ++cls) {
      if (counts[cls] > counts[best]) {
        best = cls;
        tie = false;
      } else if (cls != best && counts[cls] == counts[best] && counts[cls] > 0) {
        tie = true;
      }
    }
    out[t] = tie ? predictions[t] : best;
  }
  return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw DomainError("sequence lengths differ");
  if (predicted.empty()) throw DomainError("cannot score empty sequences");
  std::size_t matches = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == truth[i]) ++matches;
  }
  return 100.0 * static_cast<double>(matches) / static_cast<double>(predicted.size());
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t acc = 0;
  for (const auto& row : counts) {
    for (std::int64_t v : row) acc += v;
  }
  return acc;
}

std::int64_t ConfusionMatrix::diagonal() const {
  std::int64_t acc = 0;
  for (int i = 0; i < kNumClasses; ++i) acc += counts[i][i];
  return acc;
}

double ConfusionMatrix::overall_accuracy() const {
  const std::int64_t n = total();
  if (n == 0) throw DomainError("empty confusion matrix");
  return 100.0 * static_cast<double>(diagonal()) / static_cast<double>(n);
}

ConfusionMatrix confusion(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw DomainError("sequence lengths differ");
  ConfusionMatrix matrix;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!is_valid_label(predicted[i]) || !is_valid_label(truth[i])) {
      throw DomainError("label outside 0..17");
    }
    ++matrix.counts[truth[i]][predicted[i]];
  }
  return matrix;
}

std::vector<int> rank_movements(const ConfusionMatrix& matrix) {
  std::array<double, kNumClasses> recall{};
  for (int cls = 0; cls < kNumClasses; ++cls) {
    std::int64_t row_total = 0;
    for (std::int64_t v : matrix.counts[cls]) row_total += v;
    recall[cls] = row_total > 0
        ? static_cast<double>(matrix.counts[cls][cls]) / static_cast<double>(row_total)
        : -1.0;  // absent classes sink to the bottom
  }
  std::vector<int> order(kNumClasses);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (recall[a] != recall[b]) return recall[a] > recall[b];
    return a < b;
  });
  return order;
}

std::vector<ReportCell> run_experiment(const MaterializedPlan& plan, FeatureKind kind,
                                       const SmoothingConfig& smoothing,
                                       SmoothingSelection selection,
                                       const HyperparameterGrid& grid, int jobs,
                                       const SmoOptions& opts) {
  smoothing.validate();
  std::vector<bool> variants;
  if (selection != SmoothingSelection::kOn) variants.push_back(false);
  if (selection != SmoothingSelection::kOff) variants.push_back(true);

  ReportCell base;
  base.part = plan.plan.part;
  base.day = plan.plan.day;
  base.train_acq = plan.plan.training_acq;
  base.validation_acqs = plan.plan.validation_acqs;
  base.feature_kind = kind;

  std::vector<ReportCell> cells;
  const auto fail_all = [&](const std::string& message) {
    for (const auto& [acq, unused] : plan.testing_sets) {
      for (bool smooth : variants) {
        ReportCell cell = base;
        cell.test_acq = acq;
        cell.smoothing = smooth;
        cell.failed = true;
        cell.error = message;
        cells.push_back(std::move(cell));
      }
    }
    return cells;
  };

  GridSearchResult search;
  SvmModel model;
  try {
    search = grid_search(plan.training, plan.validation, grid, jobs, opts);
    model = train_multiclass(plan.training, search.c, KernelParams{search.gamma}, opts);
  } catch (const std::exception& e) {
    return fail_all(e.what());
  }
  base.chosen_c = search.c;
  base.chosen_gamma = search.gamma;
  base.validation_accuracy = search.validation_accuracy;

  for (const auto& [acq, testing] : plan.testing_sets) {
    std::vector<int> raw_predictions;
    std::string eval_error;
    try {
      raw_predictions = predict_all(model, testing);
      if (raw_predictions.empty()) throw DomainError("empty testing set");
    } catch (const std::exception& e) {
      eval_error = e.what();
    }
    for (bool smooth : variants) {
      ReportCell cell = base;
      cell.test_acq = acq;
      cell.smoothing = smooth;
      if (!eval_error.empty()) {
        cell.failed = true;
        cell.error = eval_error;
        cells.push_back(std::move(cell));
        continue;
      }
      try {
        const std::vector<int> predictions =
            smooth ? smooth_predictions(raw_predictions, smoothing) : raw_predictions;
        cell.accuracy = accuracy(predictions, testing.labels);
        cell.confusion = confusion(predictions, testing.labels);
        cell.ranking = rank_movements(cell.confusion);
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace emg
