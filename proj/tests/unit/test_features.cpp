#include <doctest.h>

#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "emgpipe/errors.hpp"
#include "emgpipe/features.hpp"
#include "emgpipe/rng.hpp"
#include "emgpipe/types.hpp"
#include "oracles.hpp"

using namespace emg;

namespace {

LabeledSignal flat_signal(std::size_t n, double fs = 100.0) {
  LabeledSignal s;
  s.sample_rate_hz = fs;
  s.start_time = 0.0;
  s.acquisition_id = 2;
  for (auto& channel : s.channels) channel.assign(n, 0.0);
  s.labels.assign(n, 0);
  s.repetition_index.assign(n, 0);
  return s;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("hand-worked values") {
  const std::vector<double> a = {1.0, -2.0, 3.0, -4.0};
  CHECK(mav(a) == doctest::Approx(2.5).epsilon(1e-15));
  const std::vector<double> b = {0.0, 1.0, 0.0, 1.0};
  CHECK(waveform_length(b) == doctest::Approx(3.0).epsilon(1e-15));
  const std::vector<double> constant = {5.0, 5.0, 5.0};
  CHECK(mav(constant) == doctest::Approx(5.0));
  CHECK(waveform_length(constant) == doctest::Approx(0.0));
}

TEST_CASE("degenerate window lengths are rejected") {
  const std::vector<double> empty;
  CHECK_THROWS_AS(mav(empty), DomainError);
  const std::vector<double> one = {2.0};
  CHECK_THROWS_AS(waveform_length(one), DomainError);
  CHECK_NOTHROW(mav(one));
}

TEST_CASE("1000 random windows agree with long-double accumulation") {
  Rng rng(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(64);
    std::vector<double> w(n);
    for (auto& v : w) {
      // mix magnitudes so naive summation order differences would show up
      const double scale = std::pow(10.0, rng.uniform(-6.0, 6.0));
      v = scale * rng.uniform(-1.0, 1.0);
    }
    const double m = mav(w);
    const double l = waveform_length(w);
    const double m_ref = oracle::mav_longdouble(w);
    const double l_ref = oracle::wl_longdouble(w);
    CHECK(std::fabs(m - m_ref) <= 1e-12 * std::max(1.0, std::fabs(m_ref)));
    CHECK(std::fabs(l - l_ref) <= 1e-12 * std::max(1.0, std::fabs(l_ref)));
  }
}

TEST_CASE("segment produces label-pure windows on the expected grid") {
  auto s = flat_signal(1000);
  // label layout: rest, movement 3, rest, movement 7 (crossing a window edge)
  for (std::size_t i = 200; i < 400; ++i) s.labels[i] = 3;
  for (std::size_t i = 655; i < 800; ++i) s.labels[i] = 7;
  s.repetition_index = compute_repetition_index(s.labels);

  WindowSpec spec;  // 100 ms / 100 ms -> 10-sample windows at 100 Hz
  const auto windows = segment(s, spec);
  const auto expected = oracle::segment_bruteforce(s.labels, 10, 10);
  REQUIRE(windows.size() == expected.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    CHECK(windows[i].start == expected[i].first);
    CHECK(windows[i].label == expected[i].second);
  }
  // the window straddling 650..659 mixes labels 0 and 7 and must be gone
  for (const auto& w : windows) CHECK(w.start != 650);
}

TEST_CASE("segment with overlap follows the stride") {
  auto s = flat_signal(100);
  for (std::size_t i = 0; i < 60; ++i) s.labels[i] = 2;
  s.repetition_index = compute_repetition_index(s.labels);
  WindowSpec spec;
  spec.length_ms = 200;  // 20 samples
  spec.stride_ms = 50;   // 5 samples
  const auto windows = segment(s, spec);
  const auto expected = oracle::segment_bruteforce(s.labels, 20, 5);
  REQUIRE(windows.size() == expected.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    CHECK(windows[i].start == expected[i].first);
    CHECK(windows[i].label == expected[i].second);
  }
}

TEST_CASE("random label streams match the brute-force segmenter") {
  Rng rng(321);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 50 + rng.below(400);
    auto s = flat_signal(n);
    // random run-length labeling
    std::size_t i = 0;
    while (i < n) {
      const int label = rng.below_int(4) == 0 ? 0 : rng.below_int(18);
      std::size_t run = 1 + rng.below(40);
      for (; run > 0 && i < n; --run, ++i) s.labels[i] = label;
    }
    s.repetition_index = compute_repetition_index(s.labels);
    const auto windows = segment(s, WindowSpec{});
    const auto expected = oracle::segment_bruteforce(s.labels, 10, 10);
    REQUIRE(windows.size() == expected.size());
    for (std::size_t k = 0; k < windows.size(); ++k) {
      CHECK(windows[k].start == expected[k].first);
      CHECK(windows[k].label == expected[k].second);
    }
  }
}

TEST_CASE("window repetition comes from its first sample") {
  auto s = flat_signal(60);
  for (std::size_t i = 0; i < 20; ++i) s.labels[i] = 5;
  for (std::size_t i = 30; i < 50; ++i) s.labels[i] = 5;
  s.repetition_index = compute_repetition_index(s.labels);
  const auto windows = segment(s, WindowSpec{});
  REQUIRE(windows.size() >= 4);
  CHECK(windows[0].repetition == 1);
  CHECK(windows[1].repetition == 1);
  // the second run of movement 5 is repetition 2
  bool saw_second = false;
  for (const auto& w : windows) {
    if (w.start == 30 || w.start == 40) {
      CHECK(w.repetition == 2);
      saw_second = true;
    }
  }
  CHECK(saw_second);
}

TEST_CASE("extract_features fills metadata and per-channel values") {
  auto s = flat_signal(40);
  Rng rng(55);
  for (auto& channel : s.channels) {
    for (auto& v : channel) v = rng.uniform(-1.0, 1.0);
  }
  for (std::size_t i = 10; i < 30; ++i) s.labels[i] = 4;
  s.repetition_index = compute_repetition_index(s.labels);

  const WindowSpec spec;
  const auto windows = segment(s, spec);
  const auto feats = extract_features(s, windows, FeatureKind::kWl, spec);
  REQUIRE(feats.size() == windows.size());
  CHECK(feats.feature_kind == FeatureKind::kWl);
  CHECK(feats.acquisition_id == s.acquisition_id);
  CHECK(feats.window_spec == spec);
  for (std::size_t i = 0; i < feats.size(); ++i) {
    CHECK(feats.labels[i] == windows[i].label);
    CHECK(feats.window_start_ms[i] == static_cast<int>(windows[i].start * 10));
    CHECK(feats.acq_ids[i] == s.acquisition_id);
    for (int c = 0; c < kNumChannels; ++c) {
      std::span<const double> piece(s.channels[c].data() + windows[i].start, 10);
      CHECK(feats.vectors[i][c] == doctest::Approx(waveform_length(piece)).epsilon(1e-15));
    }
  }
}

TEST_CASE("standardization gives zero mean and unit variance per column") {
  Rng rng(77);
  FeatureSet f;
  f.feature_kind = FeatureKind::kMav;
  const std::size_t n = 200;
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, kNumChannels> row{};
    for (int c = 0; c < kNumChannels; ++c) row[c] = 5.0 * c + rng.gaussian() * (c + 1);
    f.vectors.push_back(row);
    f.labels.push_back(1);
    f.repetition_index.push_back(1);
    f.window_start_ms.push_back(static_cast<int>(i) * 100);
    f.acq_ids.push_back(2);
  }
  f.acquisition_id = 2;

  const auto stats = fit_standardization(f);
  const auto z = apply_standardization(f, stats);
  for (int c = 0; c < kNumChannels; ++c) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = z.vectors[i][c];
    CHECK(std::fabs(oracle::mean(col)) < 1e-10);
    CHECK(oracle::population_std(col) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("constant feature columns are floored, not divided to infinity") {
  FeatureSet f;
  f.feature_kind = FeatureKind::kMav;
  for (int i = 0; i < 10; ++i) {
    std::array<double, kNumChannels> row{};
    row.fill(3.0);
    f.vectors.push_back(row);
    f.labels.push_back(1);
    f.repetition_index.push_back(1);
    f.window_start_ms.push_back(i * 100);
    f.acq_ids.push_back(2);
  }
  const auto stats = fit_standardization(f);
  for (int c = 0; c < kNumChannels; ++c) CHECK(stats.std_devs[c] >= 1e-12);
  const auto z = apply_standardization(f, stats);
  for (const auto& row : z.vectors) {
    for (double v : row) CHECK(std::isfinite(v));
  }
}

TEST_CASE("row_subset and concatenate keep rows aligned") {
  Rng rng(88);
  FeatureSet f;
  f.feature_kind = FeatureKind::kWl;
  for (int i = 0; i < 30; ++i) {
    std::array<double, kNumChannels> row{};
    for (int c = 0; c < kNumChannels; ++c) row[c] = rng.uniform(0.0, 1.0);
    f.vectors.push_back(row);
    f.labels.push_back(i % 5);
    f.repetition_index.push_back(1 + i % 3);
    f.window_start_ms.push_back(i * 100);
    f.acq_ids.push_back(2);
  }
  f.acquisition_id = 2;

  const std::vector<std::size_t> keep = {3, 7, 7, 21};
  const auto sub = f.row_subset(keep);
  REQUIRE(sub.size() == keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    CHECK(sub.vectors[i] == f.vectors[keep[i]]);
    CHECK(sub.labels[i] == f.labels[keep[i]]);
    CHECK(sub.repetition_index[i] == f.repetition_index[keep[i]]);
    CHECK(sub.window_start_ms[i] == f.window_start_ms[keep[i]]);
  }
  CHECK(sub.feature_kind == f.feature_kind);
  CHECK(sub.window_spec == f.window_spec);

  auto g = f;
  g.acquisition_id = 5;
  for (auto& id : g.acq_ids) id = 5;
  const std::array<FeatureSet, 2> parts = {f, g};
  const auto joined = FeatureSet::concatenate(parts);
  REQUIRE(joined.size() == f.size() + g.size());
  CHECK(joined.acquisition_id == -1);  // mixed sources
  CHECK(joined.acq_ids.front() == 2);
  CHECK(joined.acq_ids.back() == 5);
  CHECK(joined.vectors[f.size()] == g.vectors[0]);
}

TEST_CASE("mismatched feature kinds refuse to concatenate") {
  FeatureSet a;
  a.feature_kind = FeatureKind::kMav;
  FeatureSet b;
  b.feature_kind = FeatureKind::kWl;
  const std::array<FeatureSet, 2> parts = {a, b};
  CHECK_THROWS_AS(FeatureSet::concatenate(parts), DomainError);
}

TEST_CASE("window spec validation") {
  WindowSpec ok;
  CHECK_NOTHROW(ok.validate(100.0));
  CHECK(ok.samples_per_window(100.0) == 10);
  CHECK(ok.stride_samples(100.0) == 10);

  WindowSpec zero;
  zero.length_ms = 0;
  CHECK_THROWS_AS(zero.validate(100.0), DomainError);

  WindowSpec fractional;
  fractional.length_ms = 105;  // 10.5 samples at 100 Hz
  CHECK_THROWS_AS(fractional.validate(100.0), DomainError);

  WindowSpec bad_stride;
  bad_stride.stride_ms = -100;
  CHECK_THROWS_AS(bad_stride.validate(100.0), DomainError);
}

TEST_CASE("feature kind names round-trip") {
  CHECK(to_string(FeatureKind::kMav) == "mav");
  CHECK(to_string(FeatureKind::kWl) == "wl");
  CHECK(feature_kind_from_string("mav") == FeatureKind::kMav);
  CHECK(feature_kind_from_string("wl") == FeatureKind::kWl);
  CHECK_THROWS_AS(feature_kind_from_string("rms"), DomainError);
}

}  // TEST_SUITE
