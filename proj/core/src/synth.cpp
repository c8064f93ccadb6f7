#include "emgpipe/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <nlohmann/json.hpp>

#include "emgpipe/butterworth.hpp"
#include "emgpipe/errors.hpp"
#include "emgpipe/ingest.hpp"
#include "emgpipe/rng.hpp"
#include "emgpipe/serialization.hpp"
#include "emgpipe/text.hpp"

namespace emg {

namespace {

// substream tags for the master seed
constexpr std::uint64_t kPatternStream = 100;
constexpr std::uint64_t kDriftStreamBase = 200;
constexpr std::uint64_t kFloorStreamBase = 300;
constexpr std::uint64_t kAcquisitionStreamBase = 400;

int acquisition_index(int acquisition_id) {
  for (std::size_t i = 0; i < kAcquisitionIds.size(); ++i) {
    if (kAcquisitionIds[i] == acquisition_id) return static_cast<int>(i);
  }
  throw DomainError("unknown acquisition id " + std::to_string(acquisition_id));
}

struct Segment {
  double begin_s = 0.0;
  double end_s = 0.0;
  int label = 0;
};

// Movement activation patterns are drawn once per dataset seed so every
// acquisition shares them. Each movement recruits a sparse channel subset
// (like distinct muscle groups): recruited channels burst near full scale,
// the rest stay near baseline. Masks are redrawn until every pair differs in
// at least three channels, which keeps the classes separable even through the
// heavy averaging of the downstream pipeline.
std::vector<std::array<double, kNumChannels>> movement_patterns(const SynthConfig& config,
                                                                std::uint64_t seed) {
  Rng rng(mix_seed(seed, kPatternStream));
  std::vector<std::uint32_t> masks;
  while (static_cast<int>(masks.size()) < config.num_movements) {
    std::uint32_t mask = 0;
    int active = 0;
    for (int c = 0; c < kNumChannels; ++c) {
      if (rng.uniform() < 0.5) {
        mask |= 1u << c;
        ++active;
      }
    }
    if (active < 2 || active > kNumChannels - 2) continue;
    bool distinct = true;
    for (std::uint32_t seen : masks) {
      if (std::popcount(seen ^ mask) < 3) {
        distinct = false;
        break;
      }
    }
    if (distinct) masks.push_back(mask);
  }
  std::vector<std::array<double, kNumChannels>> patterns(config.num_movements);
  for (int m = 0; m < config.num_movements; ++m) {
    for (int c = 0; c < kNumChannels; ++c) {
      patterns[m][c] = masks[m] & (1u << c) ? rng.uniform(0.65, 1.0)
                                            : rng.uniform(0.02, 0.08);
    }
  }
  return patterns;
}

}  // namespace

void SynthConfig::validate() const {
  if (num_movements < 1 || num_movements >= kNumClasses) {
    throw DomainError("movement count must lie in 1..17");
  }
  if (repetitions < 1) throw DomainError("repetitions must be positive");
  if (movement_s <= 0.0 || rest_s <= 0.0) throw DomainError("durations must be positive");
  if (sample_rate_hz <= 0.0 || label_rate_hz <= 0.0) throw DomainError("rates must be positive");
  if (baseline_noise <= 0.0 || burst_amplitude <= 0.0) {
    throw DomainError("noise scales must be positive");
  }
  if (noise_bandwidth_hz <= 0.0 || noise_bandwidth_hz >= sample_rate_hz / 2.0) {
    throw DomainError("noise bandwidth must lie below the Nyquist frequency");
  }
  if (drift_gain < 0.0 || drift_gain >= 1.0) throw DomainError("drift gain must lie in [0, 1)");
  if (drift_offset < 0.0) throw DomainError("drift offset must be non-negative");
  if (onset_lag_max_s < 0.0 || onset_lag_max_s >= rest_s) {
    throw DomainError("onset lag must stay under the rest duration");
  }
  if (timestamp_jitter_s < 0.0 || timestamp_jitter_s >= 0.5 / sample_rate_hz) {
    throw DomainError("timestamp jitter must stay under half a sample period");
  }
}

int acquisition_day(int acquisition_id) { return acquisition_index(acquisition_id) / 3 + 1; }

int acquisition_session(int acquisition_id) { return acquisition_index(acquisition_id) % 3 + 1; }

RawAcquisition synth_acquisition(const SynthConfig& config, std::uint64_t seed,
                                 int acquisition_id) {
  config.validate();
  const int session = acquisition_session(acquisition_id);

  // nominal protocol timeline: leading rest, then (movement, rest) x reps per movement
  std::vector<Segment> movements;
  double t = config.rest_s;
  for (int m = 1; m <= config.num_movements; ++m) {
    for (int rep = 0; rep < config.repetitions; ++rep) {
      movements.push_back({t, t + config.movement_s, m});
      t += config.movement_s + config.rest_s;
    }
  }
  const double total_s = t;

  const auto patterns = movement_patterns(config, seed);

  // Per-channel drift; the first session of each day is clean. Gain scales
  // the whole channel; the offset is the amplitude of an extra noise floor
  // (degraded electrode contact), drawn per channel. A constant level shift
  // would be absorbed by the whitening intercept downstream, so the floor is
  // what actually emulates a displaced electrode here.
  std::array<double, kNumChannels> gain;
  std::array<double, kNumChannels> offset;
  gain.fill(1.0);
  offset.fill(0.0);
  if (session > 1) {
    Rng drift_rng(mix_seed(seed, kDriftStreamBase + static_cast<std::uint64_t>(acquisition_id)));
    for (int c = 0; c < kNumChannels; ++c) {
      gain[c] = drift_rng.uniform(1.0 - config.drift_gain, 1.0 + config.drift_gain);
      offset[c] = drift_rng.uniform(0.0, config.drift_offset);
    }
  }

  Rng rng(mix_seed(seed, kAcquisitionStreamBase + static_cast<std::uint64_t>(acquisition_id)));

  // phase 1: burst intervals lag the nominal labels by a random amount
  std::vector<Segment> bursts(movements.size());
  for (std::size_t s = 0; s < movements.size(); ++s) {
    bursts[s] = movements[s];
    bursts[s].begin_s += rng.uniform(0.0, config.onset_lag_max_s);
    bursts[s].end_s += rng.uniform(0.0, config.onset_lag_max_s);
  }

  const std::size_t n = static_cast<std::size_t>(std::floor(total_s * config.sample_rate_hz));

  // phase 2: per-channel band-limited noise, baseline plus movement burst
  RawAcquisition raw;
  raw.acquisition_id = acquisition_id;
  raw.signal_rows.resize(n);

  std::vector<int> burst_label(n, 0);
  {
    std::size_t s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ti = static_cast<double>(i) / config.sample_rate_hz;
      while (s < bursts.size() && ti >= bursts[s].end_s) ++s;
      if (s < bursts.size() && ti >= bursts[s].begin_s) burst_label[i] = bursts[s].label;
    }
  }

  const FilterCoefficients shaping =
      design_butterworth_lowpass(config.noise_bandwidth_hz, config.sample_rate_hz);
  Rng floor_rng(mix_seed(seed, kFloorStreamBase + static_cast<std::uint64_t>(acquisition_id)));
  std::vector<double> white(n);
  for (int c = 0; c < kNumChannels; ++c) {
    for (std::size_t i = 0; i < n; ++i) white[i] = rng.gaussian();
    const std::vector<double> baseline = filter_channel(shaping, white);
    for (std::size_t i = 0; i < n; ++i) white[i] = rng.gaussian();
    const std::vector<double> burst = filter_channel(shaping, white);
    std::vector<double> floor;
    if (session > 1) {
      for (std::size_t i = 0; i < n; ++i) white[i] = floor_rng.gaussian();
      floor = filter_channel(shaping, white);
    }
    for (std::size_t i = 0; i < n; ++i) {
      double v = config.baseline_noise * baseline[i];
      if (burst_label[i] != 0) {
        v += patterns[burst_label[i] - 1][c] * config.burst_amplitude * burst[i];
      }
      raw.signal_rows[i].emg[c] = gain[c] * v + (floor.empty() ? 0.0 : offset[c] * floor[i]);
    }
  }

  // phase 3: timestamps with bounded jitter (strict monotonicity preserved)
  for (std::size_t i = 0; i < n; ++i) {
    double ti = static_cast<double>(i) / config.sample_rate_hz;
    if (config.timestamp_jitter_s > 0.0) {
      ti += rng.uniform(-config.timestamp_jitter_s, config.timestamp_jitter_s);
    }
    raw.signal_rows[i].timestamp = ti;
  }

  // label rows at their own rate, covering slightly beyond the signal range
  const double label_dt = 1.0 / config.label_rate_hz;
  const long k_last = static_cast<long>(std::ceil((total_s + label_dt) * config.label_rate_hz));
  std::size_t s = 0;
  for (long k = -1; k <= k_last; ++k) {
    const double tk = static_cast<double>(k) * label_dt;
    while (s < movements.size() && tk >= movements[s].end_s) ++s;
    const int label =
        (s < movements.size() && tk >= movements[s].begin_s) ? movements[s].label : 0;
    raw.label_rows.push_back({tk, label});
  }
  return raw;
}

std::string synth_signal_filename(int acquisition_id) {
  const std::string n = std::to_string(acquisition_id);
  return "acq" + std::string(n.size() < 2 ? "0" : "") + n + "_signal.txt";
}

std::string synth_label_filename(int acquisition_id) {
  const std::string n = std::to_string(acquisition_id);
  return "acq" + std::string(n.size() < 2 ? "0" : "") + n + "_labels.txt";
}

std::vector<SynthFileEntry> synth_generate(const SynthConfig& config, std::uint64_t seed,
                                           const std::filesystem::path& out_dir) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  std::vector<SynthFileEntry> entries;
  nlohmann::json manifest_files = nlohmann::json::array();
  for (int acq : kAcquisitionIds) {
    const RawAcquisition raw = synth_acquisition(config, seed, acq);

    std::string signal_text;
    signal_text.reserve(raw.signal_rows.size() * 110);
    for (const SignalRow& row : raw.signal_rows) {
      signal_text += format_double(row.timestamp);
      for (int c = 0; c < kNumChannels; ++c) {
        signal_text += ' ';
        signal_text += format_double(row.emg[c]);
      }
      // placeholder inclinometer + glove columns, ignored by the parser
      signal_text += " 0 0 0 0 0 0\n";
    }

    SynthFileEntry entry;
    entry.acquisition_id = acq;
    entry.day = acquisition_day(acq);
    entry.session = acquisition_session(acq);
    entry.signal_file = synth_signal_filename(acq);
    entry.label_file = synth_label_filename(acq);
    write_text_file(out_dir / entry.signal_file, signal_text);
    write_text_file(out_dir / entry.label_file, serialize_label_rows(raw.label_rows));
    manifest_files.push_back({{"acquisition", acq},
                              {"day", entry.day},
                              {"session", entry.session},
                              {"signal", entry.signal_file},
                              {"labels", entry.label_file}});
    entries.push_back(std::move(entry));
  }

  nlohmann::json manifest = {
      {"format", "emgpipe-synth-manifest"},
      {"version", 1},
      {"seed", seed},
      {"config",
       {{"num_movements", config.num_movements},
        {"repetitions", config.repetitions},
        {"movement_s", config.movement_s},
        {"rest_s", config.rest_s},
        {"sample_rate_hz", config.sample_rate_hz},
        {"label_rate_hz", config.label_rate_hz},
        {"baseline_noise", config.baseline_noise},
        {"burst_amplitude", config.burst_amplitude},
        {"noise_bandwidth_hz", config.noise_bandwidth_hz},
        {"drift_gain", config.drift_gain},
        {"drift_offset", config.drift_offset},
        {"onset_lag_max_s", config.onset_lag_max_s},
        {"timestamp_jitter_s", config.timestamp_jitter_s}}},
      {"files", manifest_files}};
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return entries;
}

}  // namespace emg
