#pragma once

#include "emgpipe/butterworth.hpp"
#include "emgpipe/features.hpp"
#include "emgpipe/relabel.hpp"
#include "emgpipe/types.hpp"
#include "emgpipe/var.hpp"

namespace emg {

struct PreprocessConfig {
  RelabelConfig relabel;
  int var_order = 20;
  double filter_cutoff_hz = 5.0;
  WindowSpec window;
  void validate(double sample_rate_hz) const;
};

struct PreprocessedAcquisition {
  LabeledSignal processed;  // synchronized, relabeled, whitened, low-passed
  VarModel var_model;
  FilterCoefficients filter;
};

// synchronize -> relabel -> VAR whitening -> low-pass, in that order.
PreprocessedAcquisition preprocess(const RawAcquisition& raw, const PreprocessConfig& config);

FeatureSet featurize(const LabeledSignal& processed, FeatureKind kind,
                     const WindowSpec& spec);

}  // namespace emg
