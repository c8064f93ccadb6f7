#include "emgpipe/features.hpp"

#include <cmath>
#include <string>

#include "emgpipe/errors.hpp"

namespace emg {

std::string to_string(FeatureKind kind) {
  return kind == FeatureKind::kMav ? "mav" : "wl";
}

FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "mav") return FeatureKind::kMav;
  if (name == "wl") return FeatureKind::kWl;
  throw DomainError("unknown feature kind '" + name + "' (expected mav or wl)");
}

int WindowSpec::samples_per_window(double sample_rate_hz) const {
  validate(sample_rate_hz);
  return static_cast<int>(std::llround(length_ms * sample_rate_hz / 1000.0));
}

int WindowSpec::stride_samples(double sample_rate_hz) const {
  validate(sample_rate_hz);
  return static_cast<int>(std::llround(stride_ms * sample_rate_hz / 1000.0));
}

void WindowSpec::validate(double sample_rate_hz) const {
  if (sample_rate_hz <= 0.0) throw DomainError("sample rate must be positive");
  if (length_ms <= 0 || stride_ms <= 0) {
    throw DomainError("window length and stride must be positive");
  }
  const double len = length_ms * sample_rate_hz / 1000.0;
  const double stride = stride_ms * sample_rate_hz / 1000.0;
  if (std::abs(len - std::llround(len)) > 1e-9 || std::llround(len) < 1) {
    throw DomainError("window length does not map to a whole sample count");
  }
  if (std::abs(stride - std::llround(stride)) > 1e-9 || std::llround(stride) < 1) {
    throw DomainError("window stride does not map to a whole sample count");
  }
}

std::vector<Window> segment(const LabeledSignal& signal, const WindowSpec& spec) {
  const std::size_t n = static_cast<std::size_t>(spec.samples_per_window(signal.sample_rate_hz));
  const std::size_t stride = static_cast<std::size_t>(spec.stride_samples(signal.sample_rate_hz));
  std::vector<Window> windows;
  for (std::size_t start = 0; start + n <= signal.length(); start += stride) {
    const int label = signal.labels[start];
    bool unanimous = true;
    for (std::size_t i = start + 1; i < start + n; ++i) {
      if (signal.labels[i] != label) {
        unanimous = false;
        break;
      }
    }
    if (unanimous) {
      windows.push_back({start, label, signal.repetition_index[start]});
    }
  }
  return windows;
}

double mav(std::span<const double> window) {
  if (window.empty()) throw DomainError("MAV needs at least one sample");
  double acc = 0.0;
  for (double v : window) acc += std::abs(v);
  return acc / static_cast<double>(window.size());
}

double waveform_length(std::span<const double> window) {
  if (window.size() < 2) throw DomainError("waveform length needs at least two samples");
  double acc = 0.0;
  for (std::size_t i = 1; i < window.size(); ++i) {
    acc += std::abs(window[i] - window[i - 1]);
  }
  return acc;
}

FeatureSet extract_features(const LabeledSignal& signal, std::span<const Window> windows,
                            FeatureKind kind, const WindowSpec& spec) {
  const std::size_t n = static_cast<std::size_t>(spec.samples_per_window(signal.sample_rate_hz));
  FeatureSet out;
  out.feature_kind = kind;
  out.window_spec = spec;
  out.acquisition_id = signal.acquisition_id;
  out.vectors.reserve(windows.size());
  out.labels.reserve(windows.size());
  for (const Window& w : windows) {
    std::array<double, kNumChannels> row{};
    for (int c = 0; c < kNumChannels; ++c) {
      const std::span<const double> samples(signal.channels[c].data() + w.start, n);
      row[c] = kind == FeatureKind::kMav ? mav(samples) : waveform_length(samples);
    }
    out.vectors.push_back(row);
    out.labels.push_back(w.label);
    out.repetition_index.push_back(w.repetition);
    out.window_start_ms.push_back(static_cast<int>(
        std::llround(static_cast<double>(w.start) * 1000.0 / signal.sample_rate_hz)));
    out.acq_ids.push_back(signal.acquisition_id);
  }
  return out;
}

FeatureSet FeatureSet::row_subset(std::span<const std::size_t> rows) const {
  FeatureSet out;
  out.feature_kind = feature_kind;
  out.window_spec = window_spec;
  out.acquisition_id = acquisition_id;
  out.vectors.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= size()) throw DomainError("row index out of range");
    out.vectors.push_back(vectors[r]);
    out.labels.push_back(labels[r]);
    out.repetition_index.push_back(repetition_index[r]);
    out.window_start_ms.push_back(window_start_ms[r]);
    out.acq_ids.push_back(acq_ids[r]);
  }
  return out;
}

FeatureSet FeatureSet::concatenate(std::span<const FeatureSet> parts) {
  if (parts.empty()) throw DomainError("cannot concatenate zero feature sets");
  FeatureSet out;
  out.feature_kind = parts.front().feature_kind;
  out.window_spec = parts.front().window_spec;
  out.acquisition_id = parts.front().acquisition_id;
  for (const FeatureSet& p : parts) {
    if (p.feature_kind != out.feature_kind || !(p.window_spec == out.window_spec)) {
      throw DomainError("cannot concatenate feature sets with different kinds or windows");
    }
    if (p.acquisition_id != out.acquisition_id) out.acquisition_id = -1;
    out.vectors.insert(out.vectors.end(), p.vectors.begin(), p.vectors.end());
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    out.repetition_index.insert(out.repetition_index.end(), p.repetition_index.begin(),
                                p.repetition_index.end());
    out.window_start_ms.insert(out.window_start_ms.end(), p.window_start_ms.begin(),
                               p.window_start_ms.end());
    out.acq_ids.insert(out.acq_ids.end(), p.acq_ids.begin(), p.acq_ids.end());
  }
  return out;
}

StandardizationStats fit_standardization(const FeatureSet& features) {
  if (features.size() == 0) throw DomainError("cannot standardize an empty feature set");
  StandardizationStats stats;
  const double n = static_cast<double>(features.size());
  for (const auto& row : features.vectors) {
    for (int c = 0; c < kNumChannels; ++c) stats.means[c] += row[c];
  }
  for (int c = 0; c < kNumChannels; ++c) stats.means[c] /= n;
  std::array<double, kNumChannels> var{};
  for (const auto& row : features.vectors) {
    for (int c = 0; c < kNumChannels; ++c) {
      const double d = row[c] - stats.means[c];
      var[c] += d * d;
    }
  }
  for (int c = 0; c < kNumChannels; ++c) {
    stats.std_devs[c] = std::max(std::sqrt(var[c] / n), 1e-12);
  }
  return stats;
}

FeatureSet apply_standardization(const FeatureSet& features,
                                 const StandardizationStats& stats) {
  FeatureSet out = features;
  for (auto& row : out.vectors) {
    for (int c = 0; c < kNumChannels; ++c) {
      row[c] = (row[c] - stats.means[c]) / stats.std_devs[c];
    }
  }
  return out;
}

}  // namespace emg
