#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "emgpipe/butterworth.hpp"
#include "emgpipe/experiment.hpp"
#include "emgpipe/features.hpp"
#include "emgpipe/svm.hpp"
#include "emgpipe/var.hpp"

namespace emg {

// All JSON documents are versioned ("format" + "version" fields) and store
// doubles in shortest round-trip form, so load(save(x)) reproduces every
// coefficient exactly.

std::string var_model_to_json(const VarModel& model);
VarModel var_model_from_json(const std::string& text);

std::string filter_to_json(const FilterCoefficients& coeffs);
FilterCoefficients filter_from_json(const std::string& text);

std::string svm_model_to_json(const SvmModel& model);
SvmModel svm_model_from_json(const std::string& text);

// Feature matrices travel as CSV (header: acq,window_start_ms,label,
// repetition,ch1..ch10) plus a JSON sidecar holding the window spec and
// feature kind.
std::string feature_set_to_csv(const FeatureSet& features);
std::string feature_set_sidecar_json(const FeatureSet& features);
FeatureSet feature_set_from_csv(const std::string& csv, const std::string& sidecar_json);

// Processed signal dump: t,label,repetition,ch1..ch10.
std::string labeled_signal_to_csv(const LabeledSignal& signal);

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

// One row per (part, testing acquisition, feature, smoothing) cell.
std::string report_to_csv(const ExperimentReport& report);
// Full report: cells with confusion matrices and rankings, plus a config echo.
std::string report_to_json(const ExperimentReport& report, const ConfigEcho& config);

// Plot-data extracts.
std::string figure_accuracy_csv(const ExperimentReport& report);   // grouped accuracies
std::string figure_confusion_csv(const ExperimentReport& report);  // long-form matrices
std::string figure_ranking_csv(const ExperimentReport& report);    // recall rankings

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace emg
