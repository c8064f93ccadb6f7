#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "emgpipe/types.hpp"

namespace emg {

enum class FeatureKind { kMav, kWl };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);

struct WindowSpec {
  int length_ms = 100;
  int stride_ms = 100;  // stride == length means non-overlapping

  int samples_per_window(double sample_rate_hz) const;
  int stride_samples(double sample_rate_hz) const;
  // positive durations that map to whole sample counts
  void validate(double sample_rate_hz) const;

  bool operator==(const WindowSpec&) const = default;
};

struct Window {
  std::size_t start = 0;  // first sample index
  int label = 0;
  int repetition = 0;
};

// Fixed-length windows at offsets 0, stride, 2*stride, ... Windows whose
// samples do not share a single label are dropped.
std::vector<Window> segment(const LabeledSignal& signal, const WindowSpec& spec);

// Mean absolute value over one window (N >= 1).
double mav(std::span<const double> window);

// Waveform length: sum of absolute first differences inside the window (N >= 2).
double waveform_length(std::span<const double> window);

struct FeatureSet {
  FeatureKind feature_kind = FeatureKind::kMav;
  std::vector<std::array<double, kNumChannels>> vectors;  // one row per window
  std::vector<int> labels;
  std::vector<int> repetition_index;
  std::vector<int> window_start_ms;
  std::vector<int> acq_ids;    // per-row source acquisition
  int acquisition_id = 0;      // -1 when rows mix acquisitions
  WindowSpec window_spec;

  std::size_t size() const { return labels.size(); }
  FeatureSet row_subset(std::span<const std::size_t> rows) const;
  static FeatureSet concatenate(std::span<const FeatureSet> parts);
};

FeatureSet extract_features(const LabeledSignal& signal, std::span<const Window> windows,
                            FeatureKind kind, const WindowSpec& spec);

struct StandardizationStats {
  std::array<double, kNumChannels> means{};
  std::array<double, kNumChannels> std_devs{};  // floored at 1e-12
};

// Per-column mean and population standard deviation of the given set.
StandardizationStats fit_standardization(const FeatureSet& features);
FeatureSet apply_standardization(const FeatureSet& features,
                                 const StandardizationStats& stats);

}  // namespace emg
