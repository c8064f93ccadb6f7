#pragma once

#include <vector>

#include "emgpipe/types.hpp"

namespace emg {

struct RelabelConfig {
  double envelope_window_s = 0.2;  // trailing moving-average width
  double onset_factor = 3.0;       // threshold as multiple of median rest envelope
  double max_shift_s = 1.0;        // search radius around each nominal boundary
  void validate() const;           // positive values, max_shift under half the rest gap
};

// Rectified-and-summed activity trace: trailing moving average of
// sum_c |x_c[t]| over the configured window.
std::vector<double> activity_envelope(const LabeledSignal& signal, double window_s);

// Snaps each rest/movement boundary to the first envelope crossing of
// onset_factor x (median rest envelope) within +-max_shift_s of the nominal
// boundary. Movement-to-rest boundaries use the symmetric downward crossing.
// Boundaries with no crossing in range stay put; every run keeps at least one
// sample, so the movement structure (and label multiset per run) is preserved.
// Repetition indices are recomputed from the adjusted labels.
LabeledSignal relabel(const LabeledSignal& signal, const RelabelConfig& config = {});

}  // namespace emg
