#include "emgpipe/svm.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <list>
#include <thread>
#include <unordered_map>

#include "emgpipe/errors.hpp"

namespace emg {

void KernelParams::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw DomainError("kernel gamma must be positive and finite");
  }
}

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
  if (x.size() != y.size()) throw DomainError("kernel arguments differ in dimension");
  if (!(gamma > 0.0)) throw DomainError("kernel gamma must be positive");
  double dist2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    dist2 += d * d;
  }
  return std::exp(-gamma * dist2);
}

namespace {

constexpr double kTau = 1e-12;

// LRU cache of raw kernel columns, sized to min(full Gram, byte budget).
class KernelCache {
 public:
  KernelCache(std::size_t rows, std::size_t budget_bytes) : rows_(rows) {
    const std::size_t per_column = std::max<std::size_t>(rows * sizeof(double), 1);
    max_columns_ = std::max<std::size_t>(2, budget_bytes / per_column);
    max_columns_ = std::min(max_columns_, std::max<std::size_t>(rows, 2));
  }

  template <typename Fill>
  const std::vector<double>& get(std::size_t i, Fill fill) {
    auto it = map_.find(i);
    if (it != map_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.position);
      return it->second.column;
    }
    if (map_.size() >= max_columns_) {
      map_.erase(lru_.back());
      lru_.pop_back();
    }
    lru_.push_front(i);
    Entry entry;
    entry.position = lru_.begin();
    entry.column.resize(rows_);
    fill(i, entry.column);
    return map_.emplace(i, std::move(entry)).first->second.column;
  }

 private:
  struct Entry {
    std::vector<double> column;
    std::list<std::size_t>::iterator position;
  };
  std::size_t rows_;
  std::size_t max_columns_;
  std::list<std::size_t> lru_;
  std::unordered_map<std::size_t, Entry> map_;
};

}  // namespace

double BinarySvm::decision_value(std::span<const double> x) const {
  const std::size_t n = support_vectors.size();
  if (n == 0) return bias;
  // Squared distances first, then one vectorized exponential over the whole
  // buffer; the scalar per-vector loop is dominated by exp() otherwise.
  thread_local std::vector<double> dist2;
  dist2.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::vector<double>& sv = support_vectors[s];
    if (sv.size() != x.size()) throw DomainError("kernel arguments differ in dimension");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = sv[i] - x[i];
      d2 += d * d;
    }
    dist2[s] = d2;
  }
  Eigen::Map<Eigen::ArrayXd> mapped(dist2.data(), static_cast<Eigen::Index>(n));
  mapped = (-kernel.gamma * mapped).exp();
  double acc = bias;
  for (std::size_t s = 0; s < n; ++s) acc += dual_coefficients[s] * dist2[s];
  return acc;
}

// Sequential minimal optimization for
//   min 1/2 a^T Q a - e^T a,  0 <= a_i <= C,  y^T a = 0,  Q_ij = y_i y_j K_ij.
// Pair selection is the usual second-order heuristic: i maximizes the KKT
// violation over the upper set, j minimizes the one-step objective decrease
// over the lower set. Terminates when the violation gap drops below
// opts.tolerance; opts.max_passes consecutive zero-progress updates (or the
// hard iteration cap) end training early with converged = false.
BinarySvm train_binary_svm(const std::vector<std::vector<double>>& points,
                           const std::vector<int>& labels, double c,
                           KernelParams kernel, const SmoOptions& opts) {
  kernel.validate();
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("C must be positive and finite");
  if (points.size() != labels.size()) throw TrainingError("points/labels size mismatch");
  if (points.empty()) throw TrainingError("empty training set");
  const std::size_t l = points.size();
  const std::size_t dim = points.front().size();
  if (dim == 0) throw TrainingError("zero-dimensional training points");
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < l; ++i) {
    if (points[i].size() != dim) throw TrainingError("inconsistent point dimensions");
    if (labels[i] == 1) has_pos = true;
    else if (labels[i] == -1) has_neg = true;
    else throw TrainingError("binary labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw TrainingError("training set contains a single class");

  const double gamma = kernel.gamma;
  std::vector<double> alpha(l, 0.0);
  std::vector<double> grad(l, -1.0);
  KernelCache cache(l, opts.cache_bytes);
  const auto fill = [&](std::size_t i, std::vector<double>& column) {
    for (std::size_t t = 0; t < l; ++t) {
      column[t] = rbf_kernel(points[i], points[t], gamma);
    }
  };
  // RBF diagonal is exp(0)
  const double diag = 1.0;

  const double inf = std::numeric_limits<double>::infinity();
  const long max_iterations =
      opts.max_iterations > 0 ? opts.max_iterations
                              : std::max<long>(10'000'000, 100 * static_cast<long>(l));
  bool converged = false;
  long stalled = 0;

  for (long iter = 0; iter < max_iterations; ++iter) {
    // working set selection
    double gmax = -inf;
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < l; ++t) {
      const bool in_upper_set =
          (labels[t] == 1 && alpha[t] < c) || (labels[t] == -1 && alpha[t] > 0.0);
      if (!in_upper_set) continue;
      const double v = -labels[t] * grad[t];
      if (v >= gmax) {
        gmax = v;
        i = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (i < 0) {
      converged = true;  // nothing can move
      break;
    }
    const std::vector<double>& col_i = cache.get(static_cast<std::size_t>(i), fill);

    double gmax2 = -inf;
    std::ptrdiff_t j = -1;
    double best_obj = inf;
    for (std::size_t t = 0; t < l; ++t) {
      const bool in_lower_set =
          (labels[t] == 1 && alpha[t] > 0.0) || (labels[t] == -1 && alpha[t] < c);
      if (!in_lower_set) continue;
      const double yg = labels[t] * grad[t];
      if (yg > gmax2) gmax2 = yg;
      const double grad_diff = gmax + yg;
      if (grad_diff > 0.0) {
        double quad = diag + diag - 2.0 * col_i[t];
        if (quad <= 0.0) quad = kTau;
        const double obj = -(grad_diff * grad_diff) / quad;
        if (obj < best_obj) {
          best_obj = obj;
          j = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    if (gmax + gmax2 < opts.tolerance || j < 0) {
      converged = true;
      break;
    }
    const std::size_t ui = static_cast<std::size_t>(i);
    const std::size_t uj = static_cast<std::size_t>(j);
    const std::vector<double>& col_j = cache.get(uj, fill);

    const double old_ai = alpha[ui];
    const double old_aj = alpha[uj];
    double quad = 2.0 * diag - 2.0 * col_i[uj];
    if (quad <= 0.0) quad = kTau;

    if (labels[ui] != labels[uj]) {
      const double delta = (-grad[ui] - grad[uj]) / quad;
      const double diff = alpha[ui] - alpha[uj];
      alpha[ui] += delta;
      alpha[uj] += delta;
      if (diff > 0.0) {
        if (alpha[uj] < 0.0) {
          alpha[uj] = 0.0;
          alpha[ui] = diff;
        }
      } else {
        if (alpha[ui] < 0.0) {
          alpha[ui] = 0.0;
          alpha[uj] = -diff;
        }
      }
      if (diff > 0.0) {
        if (alpha[ui] > c) {
          alpha[ui] = c;
          alpha[uj] = c - diff;
        }
      } else {
        if (alpha[uj] > c) {
          alpha[uj] = c;
          alpha[ui] = c + diff;
        }
      }
    } else {
      const double delta = (grad[ui] - grad[uj]) / quad;
      const double sum = alpha[ui] + alpha[uj];
      alpha[ui] -= delta;
      alpha[uj] += delta;
      if (sum > c) {
        if (alpha[ui] > c) {
          alpha[ui] = c;
          alpha[uj] = sum - c;
        }
      } else {
        if (alpha[uj] < 0.0) {
          alpha[uj] = 0.0;
          alpha[ui] = sum;
        }
      }
      if (sum > c) {
        if (alpha[uj] > c) {
          alpha[uj] = c;
          alpha[ui] = sum - c;
        }
      } else {
        if (alpha[ui] < 0.0) {
          alpha[ui] = 0.0;
          alpha[uj] = sum;
        }
      }
    }

    const double delta_i = alpha[ui] - old_ai;
    const double delta_j = alpha[uj] - old_aj;
    if (delta_i == 0.0 && delta_j == 0.0) {
      if (++stalled > opts.max_passes) break;  // converged stays false
      continue;
    }
    stalled = 0;
    const double wi = labels[ui] * delta_i;
    const double wj = labels[uj] * delta_j;
    for (std::size_t t = 0; t < l; ++t) {
      grad[t] += labels[t] * (wi * col_i[t] + wj * col_j[t]);
    }
  }

  // bias from the free support vectors, midpoint of the KKT bounds otherwise
  double upper = inf, lower = -inf, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < l; ++t) {
    const double yg = labels[t] * grad[t];
    if (alpha[t] >= c) {
      if (labels[t] == -1) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (alpha[t] <= 0.0) {
      if (labels[t] == 1) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free)
                                : 0.5 * (upper + lower);

  BinarySvm model;
  model.kernel = kernel;
  model.trained_c = c;
  model.converged = converged;
  model.bias = -rho;
  for (std::size_t t = 0; t < l; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.push_back(points[t]);
      model.dual_coefficients.push_back(alpha[t] * labels[t]);
    }
  }
  return model;
}

HyperparameterGrid HyperparameterGrid::standard() {
  HyperparameterGrid grid;
  for (int e = 0; e <= 16; e += 2) grid.c_values.push_back(std::ldexp(1.0, e));
  for (int e = -16; e <= -2; e += 2) grid.gamma_values.push_back(std::ldexp(1.0, e));
  return grid;
}

SvmModel train_multiclass(const FeatureSet& train, double c, KernelParams kernel,
                          const SmoOptions& opts) {
  if (train.size() == 0) throw TrainingError("empty training feature set");
  SvmModel model;
  model.chosen_c = c;
  model.chosen_gamma = kernel.gamma;
  model.feature_kind = train.feature_kind;
  model.window_spec = train.window_spec;
  model.standardization = fit_standardization(train);
  const FeatureSet standardized = apply_standardization(train, model.standardization);

  for (int label : standardized.labels) {
    if (!is_valid_label(label)) throw DomainError("label outside 0..17 in training set");
  }
  std::array<std::vector<std::size_t>, kNumClasses> rows_by_class;
  for (std::size_t r = 0; r < standardized.size(); ++r) {
    rows_by_class[standardized.labels[r]].push_back(r);
  }
  for (int cls = 0; cls < kNumClasses; ++cls) {
    if (!rows_by_class[cls].empty()) model.classes_present.push_back(cls);
  }
  if (model.classes_present.size() < 2) {
    throw TrainingError("training set contains fewer than two classes");
  }

  for (std::size_t a = 0; a < model.classes_present.size(); ++a) {
    for (std::size_t b = a + 1; b < model.classes_present.size(); ++b) {
      const int pos = model.classes_present[a];
      const int neg = model.classes_present[b];
      std::vector<std::vector<double>> points;
      std::vector<int> labels;
      for (std::size_t r : rows_by_class[pos]) {
        points.emplace_back(standardized.vectors[r].begin(), standardized.vectors[r].end());
        labels.push_back(1);
      }
      for (std::size_t r : rows_by_class[neg]) {
        points.emplace_back(standardized.vectors[r].begin(), standardized.vectors[r].end());
        labels.push_back(-1);
      }
      BinarySvm machine = train_binary_svm(points, labels, c, kernel, opts);
      machine.class_pair = {pos, neg};
      model.machines.push_back(std::move(machine));
    }
  }
  return model;
}

int SvmModel::predict(std::span<const double> features) const {
  if (features.size() != static_cast<std::size_t>(kNumChannels)) {
    throw DomainError("feature vector has wrong dimension");
  }
  std::array<double, kNumChannels> x;
  for (int c = 0; c < kNumChannels; ++c) {
    x[c] = (features[c] - standardization.means[c]) / standardization.std_devs[c];
  }
  std::array<int, kNumClasses> votes{};
  for (const BinarySvm& machine : machines) {
    const double d = machine.decision_value(x);
    votes[d >= 0.0 ? machine.class_pair[0] : machine.class_pair[1]]++;
  }
  int best = classes_present.empty() ? 0 : classes_present.front();
  for (int cls : classes_present) {
    if (votes[cls] > votes[best]) best = cls;  // ties keep the lowest label
  }
  return best;
}

std::vector<int> predict_all(const SvmModel& model, const FeatureSet& features) {
  std::vector<int> out;
  out.reserve(features.size());
  for (const auto& row : features.vectors) out.push_back(model.predict(row));
  return out;
}

GridSearchResult grid_search(const FeatureSet& train, const FeatureSet& validation,
                             const HyperparameterGrid& grid, int jobs,
                             const SmoOptions& opts) {
  if (grid.c_values.empty() || grid.gamma_values.empty()) {
    throw SearchError("empty hyperparameter grid");
  }
  if (train.feature_kind != validation.feature_kind ||
      !(train.window_spec == validation.window_spec)) {
    throw DomainError("train and validation feature sets are incompatible");
  }
  if (validation.size() == 0) throw SearchError("empty validation set");

  GridSearchResult result;
  result.cells.resize(grid.c_values.size() * grid.gamma_values.size());
  for (std::size_t ci = 0; ci < grid.c_values.size(); ++ci) {
    for (std::size_t gi = 0; gi < grid.gamma_values.size(); ++gi) {
      auto& cell = result.cells[ci * grid.gamma_values.size() + gi];
      cell.c = grid.c_values[ci];
      cell.gamma = grid.gamma_values[gi];
    }
  }

  const auto run_cell = [&](GridCell& cell) {
    try {
      const SvmModel model = train_multiclass(train, cell.c, KernelParams{cell.gamma}, opts);
      for (const BinarySvm& m : model.machines) {
        if (!m.converged) ++cell.unconverged_machines;
      }
      const std::vector<int> predictions = predict_all(model, validation);
      std::size_t matches = 0;
      for (std::size_t r = 0; r < predictions.size(); ++r) {
        if (predictions[r] == validation.labels[r]) ++matches;
      }
      cell.validation_accuracy =
          100.0 * static_cast<double>(matches) / static_cast<double>(predictions.size());
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
  };

  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(result.cells.size())));
  if (workers == 1) {
    for (auto& cell : result.cells) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t k = next.fetch_add(1);
          if (k >= result.cells.size()) return;
          run_cell(result.cells[k]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  // fixed scan order (C-major, gamma-minor) with a strict comparison makes
  // ties resolve toward smaller C, then smaller gamma
  bool any = false;
  for (const GridCell& cell : result.cells) {
    if (cell.failed) continue;
    if (!any || cell.validation_accuracy > result.validation_accuracy) {
      any = true;
      result.c = cell.c;
      result.gamma = cell.gamma;
      result.validation_accuracy = cell.validation_accuracy;
    }
  }
  if (!any) throw SearchError("every hyperparameter cell failed");
  return result;
}

}  // namespace emg
