#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emgpipe/types.hpp"

namespace emg {

// Synthetic stand-in for a recorded acquisition set: 17 movements plus rest,
// 10 channels at 100 Hz. Each movement has a fixed random per-channel
// activation pattern (shared across all acquisitions of a dataset) that
// modulates band-limited noise during movement intervals; rest intervals are
// baseline noise. Sessions after the first of each day get per-channel
// multiplicative gain drift plus an additive noise-floor offset.
struct SynthConfig {
  int num_movements = 17;
  int repetitions = 10;
  double movement_s = 5.0;
  double rest_s = 3.0;
  double sample_rate_hz = 100.0;
  double label_rate_hz = 25.0;

  double baseline_noise = 0.05;   // rest noise scale
  double burst_amplitude = 0.5;   // movement noise scale before the pattern weight
  double noise_bandwidth_hz = 25.0;

  double drift_gain = 0.3;   // sessions 2,3: gain ~ U[1-d, 1+d] per channel
  // sessions 2,3: amplitude of an added per-channel noise floor, ~ U[0, o].
  // A constant level shift would vanish in the whitening step, so electrode
  // degradation is modeled as extra in-band noise instead.
  double drift_offset = 0.15;

  double onset_lag_max_s = 0.3;   // actual burst start lags the nominal label
  double timestamp_jitter_s = 0.001;

  void validate() const;
};

struct SynthFileEntry {
  int acquisition_id = 0;
  int day = 0;
  int session = 0;  // 1..3 within the day
  std::string signal_file;
  std::string label_file;
};

int acquisition_day(int acquisition_id);
int acquisition_session(int acquisition_id);  // position within its day, 1..3

// One acquisition, fully determined by (config, seed, acquisition_id).
RawAcquisition synth_acquisition(const SynthConfig& config, std::uint64_t seed,
                                 int acquisition_id);

// Writes all 12 acquisitions (ids 2..14 skipping 4) as acqNN_signal.txt /
// acqNN_labels.txt plus manifest.json into out_dir. Same seed and config
// always produce byte-identical files.
std::vector<SynthFileEntry> synth_generate(const SynthConfig& config,
                                           std::uint64_t seed,
                                           const std::filesystem::path& out_dir);

std::string synth_signal_filename(int acquisition_id);
std::string synth_label_filename(int acquisition_id);

}  // namespace emg
