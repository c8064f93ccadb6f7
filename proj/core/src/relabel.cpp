#include "emgpipe/relabel.hpp"

#include <algorithm>
#include <cmath>

#include "emgpipe/errors.hpp"

namespace emg {

void RelabelConfig::validate() const {
  if (envelope_window_s <= 0.0) throw DomainError("envelope window must be positive");
  if (onset_factor <= 0.0) throw DomainError("onset factor must be positive");
  if (max_shift_s <= 0.0 || max_shift_s >= 2.5) {
    throw DomainError("max shift must lie in (0, 2.5) seconds");
  }
}

std::vector<double> activity_envelope(const LabeledSignal& signal, double window_s) {
  if (window_s <= 0.0) throw DomainError("envelope window must be positive");
  const std::size_t n = signal.length();
  const std::size_t w = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(window_s * signal.sample_rate_hz)));

  std::vector<double> rectified(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int c = 0; c < kNumChannels; ++c) sum += std::abs(signal.channels[c][i]);
    rectified[i] = sum;
  }

  // trailing moving average, truncated at the start
  std::vector<double> envelope(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += rectified[i];
    if (i >= w) acc -= rectified[i - w];
    envelope[i] = acc / static_cast<double>(std::min(i + 1, w));
  }
  return envelope;
}

namespace {

struct Run {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  int label = 0;
};

std::vector<Run> label_runs(const std::vector<int>& labels) {
  std::vector<Run> runs;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= labels.size(); ++i) {
    if (i == labels.size() || labels[i] != labels[start]) {
      runs.push_back({start, i, labels[start]});
      start = i;
    }
  }
  return runs;
}

double median_of(std::vector<double> values) {
  const std::size_t n = values.size();
  std::nth_element(values.begin(), values.begin() + n / 2, values.end());
  double hi = values[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(values.begin(), values.begin() + n / 2 - 1, values.end());
  return 0.5 * (values[n / 2 - 1] + hi);
}

}  // namespace

LabeledSignal relabel(const LabeledSignal& signal, const RelabelConfig& config) {
  config.validate();
  const std::size_t n = signal.length();
  LabeledSignal out = signal;
  if (n < 2) return out;

  const std::vector<double> envelope =
      activity_envelope(signal, config.envelope_window_s);

  std::vector<double> rest_values;
  for (std::size_t i = 0; i < n; ++i) {
    if (signal.labels[i] == kRestLabel) rest_values.push_back(envelope[i]);
  }
  if (rest_values.empty()) return out;  // nothing to calibrate against
  const double threshold = config.onset_factor * median_of(std::move(rest_values));

  const std::vector<Run> runs = label_runs(signal.labels);
  const std::size_t radius = static_cast<std::size_t>(
      std::llround(config.max_shift_s * signal.sample_rate_hz));

  // Each boundary may move within +-radius but never past its neighbouring
  // runs (every run keeps >= 1 sample) nor past the previous boundary's final
  // position, so runs keep their order and labels keep their multiset.
  std::size_t previous_boundary = 0;
  for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
    const Run& left = runs[r];
    const Run& right = runs[r + 1];
    const bool onset = left.label == kRestLabel && right.label != kRestLabel;
    const bool offset = left.label != kRestLabel && right.label == kRestLabel;
    if (!onset && !offset) continue;

    const std::size_t nominal = right.begin;
    std::size_t lo = std::max(left.begin + 1, previous_boundary + 1);
    if (nominal > radius) lo = std::max(lo, nominal - radius);
    std::size_t hi = std::min(right.end - 1, nominal + radius);  // inclusive
    std::size_t boundary = nominal;

    for (std::size_t t = std::max<std::size_t>(lo, 1); t <= hi; ++t) {
      const bool crossing = onset
          ? (envelope[t - 1] < threshold && envelope[t] >= threshold)
          : (envelope[t - 1] >= threshold && envelope[t] < threshold);
      if (crossing) {
        boundary = t;
        break;
      }
    }

    if (boundary < nominal) {
      std::fill(out.labels.begin() + boundary, out.labels.begin() + nominal,
                right.label);
    } else if (boundary > nominal) {
      std::fill(out.labels.begin() + nominal, out.labels.begin() + boundary,
                left.label);
    }
    previous_boundary = boundary;
  }

  out.repetition_index = compute_repetition_index(out.labels);
  return out;
}

}  // namespace emg
