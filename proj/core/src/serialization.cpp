#include "emgpipe/serialization.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "emgpipe/errors.hpp"
#include "emgpipe/text.hpp"

namespace emg {

using nlohmann::json;

namespace {

void expect_format(const json& doc, const char* format) {
  if (!doc.is_object() || doc.value("format", "") != format) {
    throw ParseError(std::string("document is not a ") + format);
  }
  if (doc.value("version", 0) != 1) {
    throw ParseError(std::string(format) + ": unsupported version");
  }
}

json parse_json(const std::string& text, const char* what) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ParseError(std::string("malformed JSON for ") + what);
  return doc;
}

std::string join_acqs(const std::vector<int>& acqs) {
  std::string out;
  for (std::size_t i = 0; i < acqs.size(); ++i) {
    if (i) out += '+';  // comma-free so the report CSV stays simple
    out += std::to_string(acqs[i]);
  }
  return out;
}

const char* smoothing_name(bool smoothing) { return smoothing ? "on" : "off"; }

}  // namespace

std::string var_model_to_json(const VarModel& model) {
  json matrices = json::array();
  for (const ChannelMatrix& m : model.coefficient_matrices) {
    json rows = json::array();
    for (const auto& row : m) rows.push_back(row);
    matrices.push_back(std::move(rows));
  }
  const json doc = {{"format", "emgpipe-var-model"},
                    {"version", 1},
                    {"order", model.order},
                    {"intercept", model.intercept},
                    {"coefficient_matrices", std::move(matrices)}};
  return doc.dump(2) + "\n";
}

VarModel var_model_from_json(const std::string& text) {
  const json doc = parse_json(text, "VAR model");
  expect_format(doc, "emgpipe-var-model");
  VarModel model;
  model.order = doc.at("order").get<int>();
  doc.at("intercept").get_to(model.intercept);
  for (const json& m : doc.at("coefficient_matrices")) {
    ChannelMatrix cm;
    if (m.size() != kNumChannels) throw ParseError("coefficient matrix is not 10x10");
    for (int r = 0; r < kNumChannels; ++r) m.at(r).get_to(cm[r]);
    model.coefficient_matrices.push_back(cm);
  }
  model.validate();
  return model;
}

std::string filter_to_json(const FilterCoefficients& coeffs) {
  const json doc = {{"format", "emgpipe-filter"},
                    {"version", 1},
                    {"numerator", coeffs.numerator},
                    {"denominator", coeffs.denominator},
                    {"cutoff_hz", coeffs.cutoff_hz},
                    {"sample_rate_hz", coeffs.sample_rate_hz}};
  return doc.dump(2) + "\n";
}

FilterCoefficients filter_from_json(const std::string& text) {
  const json doc = parse_json(text, "filter");
  expect_format(doc, "emgpipe-filter");
  FilterCoefficients coeffs;
  doc.at("numerator").get_to(coeffs.numerator);
  doc.at("denominator").get_to(coeffs.denominator);
  coeffs.cutoff_hz = doc.at("cutoff_hz").get<double>();
  coeffs.sample_rate_hz = doc.at("sample_rate_hz").get<double>();
  coeffs.validate();
  return coeffs;
}

namespace {

json window_spec_to_json(const WindowSpec& spec) {
  return {{"length_ms", spec.length_ms}, {"stride_ms", spec.stride_ms}};
}

WindowSpec window_spec_from_json(const json& doc) {
  WindowSpec spec;
  spec.length_ms = doc.at("length_ms").get<int>();
  spec.stride_ms = doc.at("stride_ms").get<int>();
  return spec;
}

}  // namespace

std::string svm_model_to_json(const SvmModel& model) {
  json machines = json::array();
  for (const BinarySvm& m : model.machines) {
    machines.push_back({{"class_pair", m.class_pair},
                        {"gamma", m.kernel.gamma},
                        {"trained_c", m.trained_c},
                        {"bias", m.bias},
                        {"converged", m.converged},
                        {"support_vectors", m.support_vectors},
                        {"dual_coefficients", m.dual_coefficients}});
  }
  const json doc = {{"format", "emgpipe-svm-model"},
                    {"version", 1},
                    {"feature_kind", to_string(model.feature_kind)},
                    {"window", window_spec_to_json(model.window_spec)},
                    {"chosen_c", model.chosen_c},
                    {"chosen_gamma", model.chosen_gamma},
                    {"classes_present", model.classes_present},
                    {"standardization",
                     {{"means", model.standardization.means},
                      {"std_devs", model.standardization.std_devs}}},
                    {"machines", std::move(machines)}};
  return doc.dump(2) + "\n";
}

SvmModel svm_model_from_json(const std::string& text) {
  const json doc = parse_json(text, "SVM model");
  expect_format(doc, "emgpipe-svm-model");
  SvmModel model;
  model.feature_kind = feature_kind_from_string(doc.at("feature_kind").get<std::string>());
  model.window_spec = window_spec_from_json(doc.at("window"));
  model.chosen_c = doc.at("chosen_c").get<double>();
  model.chosen_gamma = doc.at("chosen_gamma").get<double>();
  doc.at("classes_present").get_to(model.classes_present);
  doc.at("standardization").at("means").get_to(model.standardization.means);
  doc.at("standardization").at("std_devs").get_to(model.standardization.std_devs);
  for (const json& m : doc.at("machines")) {
    BinarySvm machine;
    m.at("class_pair").get_to(machine.class_pair);
    machine.kernel.gamma = m.at("gamma").get<double>();
    machine.trained_c = m.at("trained_c").get<double>();
    machine.bias = m.at("bias").get<double>();
    machine.converged = m.at("converged").get<bool>();
    m.at("support_vectors").get_to(machine.support_vectors);
    m.at("dual_coefficients").get_to(machine.dual_coefficients);
    if (machine.support_vectors.size() != machine.dual_coefficients.size()) {
      throw ParseError("support vector and coefficient counts differ");
    }
    model.machines.push_back(std::move(machine));
  }
  return model;
}

std::string feature_set_to_csv(const FeatureSet& features) {
  std::string out = "acq,window_start_ms,label,repetition";
  for (int c = 1; c <= kNumChannels; ++c) out += ",ch" + std::to_string(c);
  out += '\n';
  for (std::size_t r = 0; r < features.size(); ++r) {
    out += std::to_string(features.acq_ids[r]);
    out += ',';
    out += std::to_string(features.window_start_ms[r]);
    out += ',';
    out += std::to_string(features.labels[r]);
    out += ',';
    out += std::to_string(features.repetition_index[r]);
    for (int c = 0; c < kNumChannels; ++c) {
      out += ',';
      out += format_double(features.vectors[r][c]);
    }
    out += '\n';
  }
  return out;
}

std::string feature_set_sidecar_json(const FeatureSet& features) {
  const json doc = {{"format", "emgpipe-features"},
                    {"version", 1},
                    {"feature_kind", to_string(features.feature_kind)},
                    {"window", window_spec_to_json(features.window_spec)},
                    {"acquisition_id", features.acquisition_id}};
  return doc.dump(2) + "\n";
}

FeatureSet feature_set_from_csv(const std::string& csv, const std::string& sidecar_json) {
  const json doc = parse_json(sidecar_json, "feature sidecar");
  expect_format(doc, "emgpipe-features");
  FeatureSet features;
  features.feature_kind = feature_kind_from_string(doc.at("feature_kind").get<std::string>());
  features.window_spec = window_spec_from_json(doc.at("window"));
  features.acquisition_id = doc.at("acquisition_id").get<int>();

  std::istringstream in(csv);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line.rfind("acq,", 0) != 0) throw SchemaError("feature CSV header missing");
      continue;
    }
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (fields.size() != 4 + kNumChannels) {
      throw SchemaError("feature CSV row " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields");
    }
    int acq = 0, start = 0, label = 0, rep = 0;
    if (!parse_int(fields[0], acq) || !parse_int(fields[1], start) ||
        !parse_int(fields[2], label) || !parse_int(fields[3], rep)) {
      throw ParseError("feature CSV row " + std::to_string(line_no) + " is malformed");
    }
    std::array<double, kNumChannels> row{};
    for (int c = 0; c < kNumChannels; ++c) {
      if (!parse_double(fields[4 + c], row[c])) {
        throw ParseError("feature CSV row " + std::to_string(line_no) + " is malformed");
      }
    }
    features.acq_ids.push_back(acq);
    features.window_start_ms.push_back(start);
    features.labels.push_back(label);
    features.repetition_index.push_back(rep);
    features.vectors.push_back(row);
  }
  return features;
}

std::string labeled_signal_to_csv(const LabeledSignal& signal) {
  std::string out = "t,label,repetition";
  for (int c = 1; c <= kNumChannels; ++c) out += ",ch" + std::to_string(c);
  out += '\n';
  for (std::size_t i = 0; i < signal.length(); ++i) {
    out += format_double(signal.start_time + static_cast<double>(i) / signal.sample_rate_hz);
    out += ',';
    out += std::to_string(signal.labels[i]);
    out += ',';
    out += std::to_string(signal.repetition_index[i]);
    for (int c = 0; c < kNumChannels; ++c) {
      out += ',';
      out += format_double(signal.channels[c][i]);
    }
    out += '\n';
  }
  return out;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::string out = "part,train_acq,validation_acqs,test_acq,feature,smoothing,accuracy,C,gamma\n";
  for (const ReportCell& cell : report.cells) {
    out += std::to_string(static_cast<int>(cell.part));
    out += ',';
    out += std::to_string(cell.train_acq);
    out += ',';
    out += join_acqs(cell.validation_acqs);
    out += ',';
    out += std::to_string(cell.test_acq);
    out += ',';
    out += to_string(cell.feature_kind);
    out += ',';
    out += smoothing_name(cell.smoothing);
    out += ',';
    if (cell.failed) {
      out += "error,,";
    } else {
      out += format_double(cell.accuracy);
      out += ',';
      out += format_double(cell.chosen_c);
      out += ',';
      out += format_double(cell.chosen_gamma);
    }
    out += '\n';
  }
  return out;
}

namespace {

json cell_to_json(const ReportCell& cell) {
  json doc = {{"part", static_cast<int>(cell.part)},
              {"day", cell.day},
              {"train_acq", cell.train_acq},
              {"validation_acqs", cell.validation_acqs},
              {"test_acq", cell.test_acq},
              {"feature", to_string(cell.feature_kind)},
              {"smoothing", cell.smoothing}};
  if (cell.failed) {
    doc["failed"] = true;
    doc["error"] = cell.error;
    return doc;
  }
  doc["accuracy"] = cell.accuracy;
  doc["C"] = cell.chosen_c;
  doc["gamma"] = cell.chosen_gamma;
  doc["validation_accuracy"] = cell.validation_accuracy;
  json matrix = json::array();
  for (const auto& row : cell.confusion.counts) matrix.push_back(row);
  doc["confusion"] = std::move(matrix);
  doc["ranking"] = cell.ranking;
  return doc;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report, const ConfigEcho& config) {
  json config_doc = json::object();
  for (const auto& [key, value] : config) config_doc[key] = value;
  json cells = json::array();
  for (const ReportCell& cell : report.cells) cells.push_back(cell_to_json(cell));
  const json doc = {{"format", "emgpipe-report"},
                    {"version", 1},
                    {"seed", report.seed},
                    {"config", std::move(config_doc)},
                    {"cells", std::move(cells)}};
  return doc.dump(2) + "\n";
}

std::string figure_accuracy_csv(const ExperimentReport& report) {
  std::string out = "part,day,train_acq,test_acq,feature,smoothing,accuracy\n";
  for (const ReportCell& cell : report.cells) {
    if (cell.failed) continue;
    out += std::to_string(static_cast<int>(cell.part));
    out += ',';
    out += std::to_string(cell.day);
    out += ',';
    out += std::to_string(cell.train_acq);
    out += ',';
    out += std::to_string(cell.test_acq);
    out += ',';
    out += to_string(cell.feature_kind);
    out += ',';
    out += smoothing_name(cell.smoothing);
    out += ',';
    out += format_double(cell.accuracy);
    out += '\n';
  }
  return out;
}

std::string figure_confusion_csv(const ExperimentReport& report) {
  std::string out = "part,day,test_acq,feature,smoothing,truth,predicted,count\n";
  for (const ReportCell& cell : report.cells) {
    if (cell.failed) continue;
    for (int truth = 0; truth < kNumClasses; ++truth) {
      for (int predicted = 0; predicted < kNumClasses; ++predicted) {
        const std::int64_t count = cell.confusion.counts[truth][predicted];
        if (count == 0) continue;
        out += std::to_string(static_cast<int>(cell.part));
        out += ',';
        out += std::to_string(cell.day);
        out += ',';
        out += std::to_string(cell.test_acq);
        out += ',';
        out += to_string(cell.feature_kind);
        out += ',';
        out += smoothing_name(cell.smoothing);
        out += ',';
        out += std::to_string(truth);
        out += ',';
        out += std::to_string(predicted);
        out += ',';
        out += std::to_string(count);
        out += '\n';
      }
    }
  }
  return out;
}

std::string figure_ranking_csv(const ExperimentReport& report) {
  std::string out = "part,day,test_acq,feature,smoothing,rank,label,recall,support\n";
  for (const ReportCell& cell : report.cells) {
    if (cell.failed) continue;
    for (std::size_t rank = 0; rank < cell.ranking.size(); ++rank) {
      const int label = cell.ranking[rank];
      std::int64_t support = 0;
      for (std::int64_t v : cell.confusion.counts[label]) support += v;
      out += std::to_string(static_cast<int>(cell.part));
      out += ',';
      out += std::to_string(cell.day);
      out += ',';
      out += std::to_string(cell.test_acq);
      out += ',';
      out += to_string(cell.feature_kind);
      out += ',';
      out += smoothing_name(cell.smoothing);
      out += ',';
      out += std::to_string(rank + 1);
      out += ',';
      out += std::to_string(label);
      out += ',';
      out += support > 0
                 ? format_double(static_cast<double>(cell.confusion.counts[label][label]) /
                                 static_cast<double>(support))
                 : std::string();
      out += ',';
      out += std::to_string(support);
      out += '\n';
    }
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace emg
