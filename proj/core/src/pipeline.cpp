#include "emgpipe/pipeline.hpp"

#include "emgpipe/errors.hpp"
#include "emgpipe/ingest.hpp"

namespace emg {

void PreprocessConfig::validate(double sample_rate_hz) const {
  relabel.validate();
  if (var_order <= 0) throw DomainError("VAR order must be positive");
  if (filter_cutoff_hz <= 0.0 || filter_cutoff_hz >= sample_rate_hz / 2.0) {
    throw DomainError("filter cutoff must lie strictly between 0 and the Nyquist frequency");
  }
  window.validate(sample_rate_hz);
}

PreprocessedAcquisition preprocess(const RawAcquisition& raw, const PreprocessConfig& config) {
  const LabeledSignal synchronized = synchronize(raw);
  config.validate(synchronized.sample_rate_hz);
  const LabeledSignal relabeled = relabel(synchronized, config.relabel);

  PreprocessedAcquisition out;
  out.var_model = fit_var(relabeled, config.var_order);
  const LabeledSignal whitened = whiten(relabeled, out.var_model);
  out.filter = design_butterworth_lowpass(config.filter_cutoff_hz, whitened.sample_rate_hz);
  out.processed = apply_filter(out.filter, whitened);
  return out;
}

FeatureSet featurize(const LabeledSignal& processed, FeatureKind kind,
                     const WindowSpec& spec) {
  const std::vector<Window> windows = segment(processed, spec);
  return extract_features(processed, windows, kind, spec);
}

}  // namespace emg
