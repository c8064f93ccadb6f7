#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "emgpipe/errors.hpp"
#include "emgpipe/ingest.hpp"
#include "emgpipe/synth.hpp"
#include "emgpipe/types.hpp"

using namespace emg;
namespace fs = std::filesystem;

namespace {

SynthConfig tiny_config() {
  SynthConfig cfg;
  cfg.num_movements = 4;
  cfg.repetitions = 2;
  cfg.movement_s = 1.0;
  cfg.rest_s = 0.5;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("emgpipe_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("acquisition calendar") {
  CHECK(acquisition_day(2) == 1);
  CHECK(acquisition_day(5) == 1);
  CHECK(acquisition_day(6) == 2);
  CHECK(acquisition_day(14) == 4);
  CHECK(acquisition_session(2) == 1);
  CHECK(acquisition_session(3) == 2);
  CHECK(acquisition_session(5) == 3);
  CHECK(acquisition_session(12) == 1);
  CHECK_THROWS_AS(acquisition_day(4), DomainError);
  CHECK_THROWS_AS(acquisition_session(15), DomainError);
}

TEST_CASE("same seed reproduces an acquisition exactly") {
  const auto cfg = tiny_config();
  const auto a = synth_acquisition(cfg, 42, 6);
  const auto b = synth_acquisition(cfg, 42, 6);
  REQUIRE(a.signal_rows.size() == b.signal_rows.size());
  REQUIRE(a.label_rows.size() == b.label_rows.size());
  for (std::size_t i = 0; i < a.signal_rows.size(); ++i) {
    CHECK(a.signal_rows[i].timestamp == b.signal_rows[i].timestamp);
    CHECK(a.signal_rows[i].emg == b.signal_rows[i].emg);
  }
  const auto c = synth_acquisition(cfg, 43, 6);
  bool any_diff = false;
  for (std::size_t i = 0; i < std::min(a.signal_rows.size(), c.signal_rows.size()); ++i) {
    any_diff = any_diff || a.signal_rows[i].emg != c.signal_rows[i].emg;
  }
  CHECK(any_diff);
}

TEST_CASE("acquisitions differ from each other but share the label script") {
  const auto cfg = tiny_config();
  const auto a = synth_acquisition(cfg, 42, 2);
  const auto b = synth_acquisition(cfg, 42, 3);
  bool emg_differs = false;
  for (std::size_t i = 0; i < std::min(a.signal_rows.size(), b.signal_rows.size()); ++i) {
    emg_differs = emg_differs || a.signal_rows[i].emg != b.signal_rows[i].emg;
  }
  CHECK(emg_differs);
  REQUIRE(a.label_rows.size() == b.label_rows.size());
  for (std::size_t i = 0; i < a.label_rows.size(); ++i) {
    CHECK(a.label_rows[i].label == b.label_rows[i].label);
  }
}

TEST_CASE("label script covers every movement the configured number of times") {
  const auto cfg = tiny_config();
  const auto acq = synth_acquisition(cfg, 1, 2);
  // count label runs per movement
  std::map<int, int> runs;
  int prev = 0;
  for (const auto& row : acq.label_rows) {
    if (row.label != prev && row.label != 0) ++runs[row.label];
    prev = row.label;
  }
  REQUIRE(static_cast<int>(runs.size()) == cfg.num_movements);
  for (const auto& [label, count] : runs) {
    CHECK(label >= 1);
    CHECK(label <= cfg.num_movements);
    CHECK(count == cfg.repetitions);
  }
  // starts and ends at rest
  CHECK(acq.label_rows.front().label == 0);
  CHECK(acq.label_rows.back().label == 0);
}

TEST_CASE("signal rows are plausibly timed and sized") {
  const auto cfg = tiny_config();
  const auto acq = synth_acquisition(cfg, 9, 5);
  REQUIRE(!acq.signal_rows.empty());
  // timestamps strictly increasing despite jitter
  for (std::size_t i = 1; i < acq.signal_rows.size(); ++i) {
    CHECK(acq.signal_rows[i].timestamp > acq.signal_rows[i - 1].timestamp);
  }
  // jitter stays within the configured bound around the nominal grid
  for (std::size_t i = 0; i < acq.signal_rows.size(); ++i) {
    const double nominal = static_cast<double>(i) / cfg.sample_rate_hz;
    CHECK(std::fabs(acq.signal_rows[i].timestamp - nominal) <=
          cfg.timestamp_jitter_s + 1e-12);
  }
  // duration covers the whole script
  const double script_s = cfg.num_movements * cfg.repetitions *
                          (cfg.movement_s + cfg.rest_s) + cfg.rest_s;
  CHECK(acq.signal_rows.back().timestamp >= script_s - 1.0);
}

TEST_CASE("movement intervals carry more energy than rest") {
  auto cfg = tiny_config();
  // At this interval scale the default onset lag bleeds burst tails into the
  // labelled rest; the contrast property is about amplitudes, so switch it off.
  cfg.onset_lag_max_s = 0.0;
  const auto acq = synth_acquisition(cfg, 33, 2);
  const auto signal = synchronize(acq);
  double movement_energy = 0.0, rest_energy = 0.0;
  std::size_t movement_n = 0, rest_n = 0;
  for (std::size_t i = 0; i < signal.length(); ++i) {
    double row = 0.0;
    for (int c = 0; c < kNumChannels; ++c) row += signal.channels[c][i] * signal.channels[c][i];
    if (signal.labels[i] != 0) {
      movement_energy += row;
      ++movement_n;
    } else {
      rest_energy += row;
      ++rest_n;
    }
  }
  REQUIRE(movement_n > 0);
  REQUIRE(rest_n > 0);
  CHECK(movement_energy / movement_n > 5.0 * (rest_energy / rest_n));
}

TEST_CASE("session-1 acquisitions get no drift treatment") {
  // With drift disabled entirely, session 2 only differs by its noise stream.
  auto cfg = tiny_config();
  cfg.drift_gain = 0.0;
  cfg.drift_offset = 0.0;
  const auto base = synth_acquisition(cfg, 5, 6);

  auto drifty = tiny_config();
  drifty.drift_gain = 0.3;
  drifty.drift_offset = 0.15;
  // session 1 of day 2 must be identical with and without drift configured
  const auto a = synth_acquisition(cfg, 5, 6);
  const auto b = synth_acquisition(drifty, 5, 6);
  REQUIRE(a.signal_rows.size() == b.signal_rows.size());
  for (std::size_t i = 0; i < a.signal_rows.size(); ++i) {
    CHECK(a.signal_rows[i].emg == b.signal_rows[i].emg);
  }
  // session 2 of the same day must differ once drift is on
  const auto c = synth_acquisition(cfg, 5, 7);
  const auto d = synth_acquisition(drifty, 5, 7);
  bool differs = false;
  for (std::size_t i = 0; i < std::min(c.signal_rows.size(), d.signal_rows.size()); ++i) {
    differs = differs || c.signal_rows[i].emg != d.signal_rows[i].emg;
  }
  CHECK(differs);
  (void)base;
}

TEST_CASE("generate writes 12 file pairs, a manifest, and is byte-stable") {
  const auto cfg = tiny_config();
  TempDir dir_a("synth_a");
  TempDir dir_b("synth_b");
  const auto entries_a = synth_generate(cfg, 7, dir_a.path);
  const auto entries_b = synth_generate(cfg, 7, dir_b.path);
  REQUIRE(entries_a.size() == kAcquisitionIds.size());

  std::set<int> ids;
  for (const auto& e : entries_a) {
    ids.insert(e.acquisition_id);
    CHECK(e.day == acquisition_day(e.acquisition_id));
    CHECK(e.session == acquisition_session(e.acquisition_id));
    CHECK(fs::exists(dir_a.path / e.signal_file));
    CHECK(fs::exists(dir_a.path / e.label_file));
  }
  CHECK(ids == std::set<int>(kAcquisitionIds.begin(), kAcquisitionIds.end()));
  CHECK(fs::exists(dir_a.path / "manifest.json"));

  for (const auto& e : entries_a) {
    CHECK(slurp(dir_a.path / e.signal_file) == slurp(dir_b.path / e.signal_file));
    CHECK(slurp(dir_a.path / e.label_file) == slurp(dir_b.path / e.label_file));
  }
  CHECK(slurp(dir_a.path / "manifest.json") == slurp(dir_b.path / "manifest.json"));

  // the files parse and synchronize cleanly end to end
  const auto raw = load_acquisition(entries_a[0].acquisition_id,
                                    dir_a.path / entries_a[0].signal_file,
                                    dir_a.path / entries_a[0].label_file);
  const auto signal = synchronize(raw);
  CHECK(signal.length() > 0);
  CHECK(signal.acquisition_id == entries_a[0].acquisition_id);
}

TEST_CASE("filenames follow the acqNN convention") {
  CHECK(synth_signal_filename(2) == "acq02_signal.txt");
  CHECK(synth_label_filename(2) == "acq02_labels.txt");
  CHECK(synth_signal_filename(14) == "acq14_signal.txt");
}

TEST_CASE("config validation") {
  SynthConfig bad = tiny_config();
  bad.num_movements = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = tiny_config();
  bad.num_movements = 18;  // label space only has 17 movements
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = tiny_config();
  bad.repetitions = -1;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = tiny_config();
  bad.drift_gain = 1.5;  // gain would go negative
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = tiny_config();
  bad.sample_rate_hz = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  CHECK_THROWS_AS(synth_acquisition(tiny_config(), 1, 4), DomainError);
}

}  // TEST_SUITE
