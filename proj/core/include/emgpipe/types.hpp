#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace emg {

inline constexpr int kNumChannels = 10;
inline constexpr int kNumClasses = 18;  // label 0 is rest, 1..17 are hand postures
inline constexpr int kRestLabel = 0;
inline constexpr double kDefaultSampleRateHz = 100.0;

// Acquisition ids: four days, three recording sessions each; id 4 is unused.
inline constexpr std::array<int, 12> kAcquisitionIds = {2, 3, 5,  6,  7,  8,
                                                        9, 10, 11, 12, 13, 14};

struct SignalRow {
  double timestamp = 0.0;  // seconds
  std::array<double, kNumChannels> emg{};
};

struct LabelRow {
  double timestamp = 0.0;  // seconds
  int label = 0;           // 0..17
};

// Acquisition as parsed from disk, before clock alignment.
struct RawAcquisition {
  int acquisition_id = 0;
  std::vector<SignalRow> signal_rows;
  std::vector<LabelRow> label_rows;
};

// Uniformly sampled multichannel signal with one label per sample.
struct LabeledSignal {
  double sample_rate_hz = kDefaultSampleRateHz;
  double start_time = 0.0;  // timestamp of sample 0, seconds
  std::array<std::vector<double>, kNumChannels> channels;
  std::vector<int> labels;
  std::vector<int> repetition_index;  // 0 on rest, 1-based per movement otherwise
  int acquisition_id = 0;

  std::size_t length() const { return labels.size(); }
};

bool is_valid_label(int label);

// The i-th contiguous run of a movement label gets repetition index i (1-based);
// rest samples get 0.
std::vector<int> compute_repetition_index(const std::vector<int>& labels);

}  // namespace emg
