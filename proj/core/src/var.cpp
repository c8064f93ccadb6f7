#include "emgpipe/var.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "emgpipe/errors.hpp"

namespace emg {

void VarModel::validate() const {
  if (order <= 0) throw DomainError("VAR order must be positive");
  if (coefficient_matrices.size() != static_cast<std::size_t>(order)) {
    throw DomainError("VAR model has " + std::to_string(coefficient_matrices.size()) +
                      " coefficient matrices for order " + std::to_string(order));
  }
  for (const auto& m : coefficient_matrices) {
    for (const auto& row : m) {
      for (double v : row) {
        if (!std::isfinite(v)) throw DomainError("non-finite VAR coefficient");
      }
    }
  }
  for (double v : intercept) {
    if (!std::isfinite(v)) throw DomainError("non-finite VAR intercept");
  }
}

VarModel fit_var(const LabeledSignal& signal, int order) {
  if (order <= 0) throw DomainError("VAR order must be positive");
  const std::size_t t_total = signal.length();
  const std::size_t p = static_cast<std::size_t>(order);
  // need more rows than the 10*p slope columns plus the intercept
  if (t_total <= 11 * p) {
    throw InsufficientDataError("VAR(" + std::to_string(order) + ") needs more than " +
                                std::to_string(11 * p) + " samples, got " +
                                std::to_string(t_total));
  }

  const std::size_t n_rows = t_total - p;          // regression rows
  const std::size_t n_cols = p * kNumChannels;     // slope columns (intercept via centering)

  // Column means of regressors and responses over the regression rows.
  Eigen::VectorXd reg_mean = Eigen::VectorXd::Zero(n_cols);
  Eigen::VectorXd resp_mean = Eigen::VectorXd::Zero(kNumChannels);
  for (std::size_t t = p; t < t_total; ++t) {
    for (std::size_t j = 0; j < p; ++j) {
      for (int c = 0; c < kNumChannels; ++c) {
        reg_mean[static_cast<Eigen::Index>(j * kNumChannels + c)] +=
            signal.channels[c][t - 1 - j];
      }
    }
    for (int c = 0; c < kNumChannels; ++c) resp_mean[c] += signal.channels[c][t];
  }
  reg_mean /= static_cast<double>(n_rows);
  resp_mean /= static_cast<double>(n_rows);

  // Accumulate the centered normal equations block-wise.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n_cols, n_cols);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(n_cols, kNumChannels);
  constexpr std::size_t kBlock = 512;
  Eigen::MatrixXd z(kBlock, n_cols);
  Eigen::MatrixXd y(kBlock, kNumChannels);
  std::size_t filled = 0;
  auto flush = [&]() {
    if (filled == 0) return;
    const auto zb = z.topRows(static_cast<Eigen::Index>(filled));
    const auto yb = y.topRows(static_cast<Eigen::Index>(filled));
    gram.selfadjointView<Eigen::Lower>().rankUpdate(zb.transpose());
    cross.noalias() += zb.transpose() * yb;
    filled = 0;
  };
  for (std::size_t t = p; t < t_total; ++t) {
    for (std::size_t j = 0; j < p; ++j) {
      for (int c = 0; c < kNumChannels; ++c) {
        z(static_cast<Eigen::Index>(filled), static_cast<Eigen::Index>(j * kNumChannels + c)) =
            signal.channels[c][t - 1 - j] -
            reg_mean[static_cast<Eigen::Index>(j * kNumChannels + c)];
      }
    }
    for (int c = 0; c < kNumChannels; ++c) {
      y(static_cast<Eigen::Index>(filled), c) = signal.channels[c][t] - resp_mean[c];
    }
    if (++filled == kBlock) flush();
  }
  flush();
  gram = gram.selfadjointView<Eigen::Lower>();

  // Columns whose centered variance is rounding residue relative to their raw
  // magnitude are numerically constant; their contribution belongs to the
  // intercept, and keeping them would let the solver amplify noise-level
  // entries into arbitrary slopes. 1e-20 covers mean-accumulation error for
  // any realistic acquisition length.
  std::vector<Eigen::Index> active;
  active.reserve(n_cols);
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n_cols); ++j) {
    const double centered_ms = gram(j, j) / static_cast<double>(n_rows);
    const double raw_ms = centered_ms + reg_mean[j] * reg_mean[j];
    if (centered_ms > 1e-20 * raw_ms) active.push_back(j);
  }

  auto solve = [](const Eigen::MatrixXd& g,
                  const Eigen::MatrixXd& x) -> std::pair<bool, Eigen::MatrixXd> {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    if (ldlt.info() != Eigen::Success) return {false, {}};
    const Eigen::VectorXd d = ldlt.vectorD();
    const double d_max = d.cwiseAbs().maxCoeff();
    const double d_min = d.cwiseAbs().minCoeff();
    if (!(d_max > 0.0) || d_min <= d_max * 1e-12) return {false, {}};
    Eigen::MatrixXd b = ldlt.solve(x);
    if (!b.allFinite()) return {false, {}};
    return {true, std::move(b)};
  };

  Eigen::MatrixXd beta =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_cols), kNumChannels);
  if (!active.empty()) {
    const Eigen::MatrixXd gram_a = gram(active, active);
    const Eigen::MatrixXd cross_a = cross(active, Eigen::all);
    auto [ok, beta_a] = solve(gram_a, cross_a);
    if (!ok) {
      // ridge fallback keeps the slope system well posed; the intercept comes
      // from the means and stays unpenalized
      const double trace = gram_a.trace();
      const double lambda =
          trace > 0.0 ? 1e-8 * trace / static_cast<double>(active.size()) : 1e-8;
      Eigen::MatrixXd ridge = gram_a;
      ridge.diagonal().array() += lambda;
      auto [ok2, beta2] = solve(ridge, cross_a);
      if (!ok2) throw FitError("VAR regression is rank deficient beyond ridge repair");
      beta_a = std::move(beta2);
    }
    beta(active, Eigen::all) = beta_a;
  }

  VarModel model;
  model.order = order;
  model.coefficient_matrices.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    for (int target = 0; target < kNumChannels; ++target) {
      for (int source = 0; source < kNumChannels; ++source) {
        model.coefficient_matrices[j][target][source] =
            beta(static_cast<Eigen::Index>(j * kNumChannels + source), target);
      }
    }
  }
  Eigen::VectorXd intercept = resp_mean - beta.transpose() * reg_mean;
  for (int c = 0; c < kNumChannels; ++c) model.intercept[c] = intercept[c];
  return model;
}

LabeledSignal whiten(const LabeledSignal& signal, const VarModel& model) {
  model.validate();
  const std::size_t p = static_cast<std::size_t>(model.order);
  const std::size_t t_total = signal.length();
  if (t_total <= p) {
    throw InsufficientDataError("whitening needs more than " + std::to_string(p) +
                                " samples, got " + std::to_string(t_total));
  }

  LabeledSignal out;
  out.sample_rate_hz = signal.sample_rate_hz;
  out.start_time = signal.start_time + static_cast<double>(p) / signal.sample_rate_hz;
  out.acquisition_id = signal.acquisition_id;
  const std::size_t n = t_total - p;
  for (auto& ch : out.channels) ch.resize(n);
  out.labels.assign(signal.labels.begin() + static_cast<std::ptrdiff_t>(p),
                    signal.labels.end());
  out.repetition_index.assign(
      signal.repetition_index.begin() + static_cast<std::ptrdiff_t>(p),
      signal.repetition_index.end());

  for (std::size_t t = p; t < t_total; ++t) {
    std::array<double, kNumChannels> predicted = model.intercept;
    for (std::size_t j = 0; j < p; ++j) {
      const ChannelMatrix& a = model.coefficient_matrices[j];
      for (int target = 0; target < kNumChannels; ++target) {
        double acc = 0.0;
        for (int source = 0; source < kNumChannels; ++source) {
          acc += a[target][source] * signal.channels[source][t - 1 - j];
        }
        predicted[target] += acc;
      }
    }
    for (int c = 0; c < kNumChannels; ++c) {
      out.channels[c][t - p] = signal.channels[c][t] - predicted[c];
    }
  }
  return out;
}

}  // namespace emg
