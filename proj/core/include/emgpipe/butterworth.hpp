#pragma once

#include <array>
#include <span>
#include <vector>

#include "emgpipe/types.hpp"

namespace emg {

// Second-order IIR section y[n] = sum_k b[k] x[n-k] - sum_k a[k] y[n-k], a0 = 1.
struct FilterCoefficients {
  std::array<double, 3> numerator{};    // b0 b1 b2
  std::array<double, 3> denominator{};  // 1 a1 a2
  double cutoff_hz = 0.0;
  double sample_rate_hz = 0.0;
  // monic denominator, poles strictly inside the unit circle, unit DC gain
  void validate() const;
};

// Second-order Butterworth low-pass via the bilinear transform with frequency
// pre-warping, so the -3 dB point lands exactly on cutoff_hz.
// Requires 0 < cutoff_hz < sample_rate_hz / 2.
FilterCoefficients design_butterworth_lowpass(double cutoff_hz, double sample_rate_hz);

// Causal application (direct form II transposed), zero initial conditions.
std::vector<double> filter_channel(const FilterCoefficients& coeffs,
                                   std::span<const double> x);

// Filters every channel independently; labels and timing are untouched.
LabeledSignal apply_filter(const FilterCoefficients& coeffs, const LabeledSignal& signal);

// Magnitude response |H(e^{j 2 pi f / fs})| for 0 <= f <= fs/2.
double frequency_response(const FilterCoefficients& coeffs, double frequency_hz);

}  // namespace emg
