#pragma once

#include <array>
#include <vector>

#include "emgpipe/types.hpp"

namespace emg {

using ChannelMatrix = std::array<std::array<double, kNumChannels>, kNumChannels>;

// Vector autoregression x_t = intercept + sum_j A_j x_{t-j} + e_t.
// coefficient_matrices[j-1][target][source] is the weight of channel `source`
// at lag j when predicting channel `target`.
struct VarModel {
  int order = 0;
  std::vector<ChannelMatrix> coefficient_matrices;
  std::array<double, kNumChannels> intercept{};
  void validate() const;
};

// Least-squares fit with intercept over samples order..T-1. Solved on centered
// variables, so adding a constant to any channel only moves the intercept.
// If the regressor Gram matrix is numerically singular the slope part is
// refit with a ridge term of 1e-8 x (trace-scaled identity).
// Requires T > 11 x order.
VarModel fit_var(const LabeledSignal& signal, int order);

// One-step-ahead prediction residuals. Output has T - order samples; labels
// and repetition indices are truncated in lockstep (first `order` dropped).
LabeledSignal whiten(const LabeledSignal& signal, const VarModel& model);

}  // namespace emg
