// emgpipe: command-line surface for the EMG movement-classification pipeline.
//
// Subcommands: validate, preprocess, features, train, evaluate, repro, synth.
// Exit codes: 0 success, 2 invalid input data, 3 partial experiment failure,
// 4 missing input, 5 I/O failure, 1 anything else.

#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "emgpipe/errors.hpp"
#include "emgpipe/experiment.hpp"
#include "emgpipe/ingest.hpp"
#include "emgpipe/pipeline.hpp"
#include "emgpipe/serialization.hpp"
#include "emgpipe/svm.hpp"
#include "emgpipe/synth.hpp"
#include "emgpipe/text.hpp"
#include "emgpipe/types.hpp"

namespace fs = std::filesystem;

namespace {

// Master seed used when none is given; every derived RNG stream mixes it with
// a purpose tag, so one number pins the whole run.
constexpr std::uint64_t kDefaultSeed = 1729;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitInvalidData = 2;
constexpr int kExitPartialExperiment = 3;
constexpr int kExitMissingInput = 4;
constexpr int kExitIo = 5;

void log_line(const std::string& stage, const std::string& cell, const std::string& message) {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  std::cerr << stamp << " stage=" << stage;
  if (!cell.empty()) std::cerr << " cell=" << cell;
  std::cerr << " msg=\"" << message << "\"\n";
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const emg::IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const emg::PlanError*>(&e)) return kExitMissingInput;
  if (dynamic_cast<const emg::ParseError*>(&e) || dynamic_cast<const emg::SchemaError*>(&e) ||
      dynamic_cast<const emg::OrderingError*>(&e) ||
      dynamic_cast<const emg::DomainError*>(&e) || dynamic_cast<const emg::SyncError*>(&e)) {
    return kExitInvalidData;
  }
  return kExitOther;
}

// Shared pipeline knobs. Defaults reproduce the reference protocol.
struct PipelineOptions {
  int var_order = 20;
  double cutoff_hz = 5.0;
  int window_ms = 100;
  int stride_ms = 100;
  double relabel_window_s = 0.2;
  double relabel_factor = 3.0;
  double relabel_shift_s = 1.0;

  emg::PreprocessConfig to_config() const {
    emg::PreprocessConfig config;
    config.relabel.envelope_window_s = relabel_window_s;
    config.relabel.onset_factor = relabel_factor;
    config.relabel.max_shift_s = relabel_shift_s;
    config.var_order = var_order;
    config.filter_cutoff_hz = cutoff_hz;
    config.window.length_ms = window_ms;
    config.window.stride_ms = stride_ms;
    return config;
  }

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--var-order", var_order, "Autoregressive whitening order")
        ->capture_default_str();
    cmd->add_option("--cutoff-hz", cutoff_hz, "Low-pass cutoff frequency")
        ->capture_default_str();
    cmd->add_option("--window-ms", window_ms, "Feature window length")
        ->capture_default_str();
    cmd->add_option("--stride-ms", stride_ms, "Feature window stride")
        ->capture_default_str();
    cmd->add_option("--relabel-window-s", relabel_window_s,
                    "Activity envelope width for label alignment")
        ->capture_default_str();
    cmd->add_option("--relabel-factor", relabel_factor,
                    "Onset threshold as a multiple of the median rest envelope")
        ->capture_default_str();
    cmd->add_option("--relabel-shift-s", relabel_shift_s,
                    "Maximum label boundary shift")
        ->capture_default_str();
  }
};

struct SolverOptions {
  double tolerance = 1e-3;
  long max_passes = 100;
  std::size_t cache_mb = 64;
  long max_iterations = 0;

  emg::SmoOptions to_options() const {
    emg::SmoOptions opts;
    opts.tolerance = tolerance;
    opts.max_passes = max_passes;
    opts.cache_bytes = cache_mb << 20;
    opts.max_iterations = max_iterations;
    return opts;
  }

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--tolerance", tolerance, "Solver stopping tolerance")
        ->capture_default_str();
    cmd->add_option("--max-passes", max_passes,
                    "Zero-progress updates before the solver gives up")
        ->capture_default_str();
    cmd->add_option("--max-iterations", max_iterations,
                    "Pair-update budget per machine (0 = automatic)")
        ->capture_default_str();
    cmd->add_option("--cache-mb", cache_mb, "Kernel cache budget per machine (MiB)")
        ->capture_default_str();
  }
};

std::string sidecar_path(const fs::path& csv_path) { return csv_path.string() + ".json"; }

emg::FeatureSet load_feature_csv(const fs::path& path) {
  if (!fs::exists(path)) throw emg::PlanError("missing feature file " + path.string());
  const fs::path sidecar = sidecar_path(path);
  if (!fs::exists(sidecar)) {
    throw emg::PlanError("missing feature sidecar " + sidecar.string());
  }
  return emg::feature_set_from_csv(emg::read_text_file(path),
                                   emg::read_text_file(sidecar));
}

int default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
  std::vector<std::string> signal_files;
  std::vector<std::string> label_files;
  std::string data_dir;
};

int describe_signal_file(const fs::path& path, bool& any_invalid) {
  if (!fs::exists(path)) {
    std::cout << path.string() << ": missing\n";
    return kExitMissingInput;
  }
  try {
    const auto rows = emg::parse_signal_file(path);
    std::cout << path.string() << ": ok signal rows=" << rows.size()
              << " channels=" << emg::kNumChannels;
    if (!rows.empty()) {
      std::cout << " time=[" << emg::format_double(rows.front().timestamp) << ","
                << emg::format_double(rows.back().timestamp) << "]";
    }
    std::cout << " monotonic=yes\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cout << path.string() << ": INVALID " << e.what() << "\n";
    any_invalid = true;
    return kExitInvalidData;
  }
}

int describe_label_file(const fs::path& path, bool& any_invalid) {
  if (!fs::exists(path)) {
    std::cout << path.string() << ": missing\n";
    return kExitMissingInput;
  }
  try {
    const auto rows = emg::parse_label_file(path);
    int lo = emg::kNumClasses, hi = -1;
    for (const auto& row : rows) {
      lo = std::min(lo, row.label);
      hi = std::max(hi, row.label);
    }
    std::cout << path.string() << ": ok labels rows=" << rows.size();
    if (!rows.empty()) {
      std::cout << " time=[" << emg::format_double(rows.front().timestamp) << ","
                << emg::format_double(rows.back().timestamp) << "] labels=[" << lo << ","
                << hi << "]";
    }
    std::cout << " monotonic=yes\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cout << path.string() << ": INVALID " << e.what() << "\n";
    any_invalid = true;
    return kExitInvalidData;
  }
}

int cmd_validate(const ValidateArgs& args) {
  bool any_invalid = false;
  bool any_missing = false;
  auto note = [&](int code) {
    if (code == kExitMissingInput) any_missing = true;
  };
  for (const auto& file : args.signal_files) note(describe_signal_file(file, any_invalid));
  for (const auto& file : args.label_files) note(describe_label_file(file, any_invalid));
  if (!args.data_dir.empty()) {
    const fs::path dir(args.data_dir);
    for (int acq : emg::kAcquisitionIds) {
      note(describe_signal_file(dir / emg::synth_signal_filename(acq), any_invalid));
      note(describe_label_file(dir / emg::synth_label_filename(acq), any_invalid));
    }
  }
  if (any_invalid) return kExitInvalidData;
  if (any_missing) return kExitMissingInput;
  std::cout << "all files valid\n";
  return kExitOk;
}

// -------------------------------------------------------------- preprocess

struct PreprocessArgs {
  std::string signal_file;
  std::string label_file;
  int acq = 0;
  std::string out_dir;
  PipelineOptions pipeline;
};

emg::RawAcquisition load_checked(int acq, const fs::path& signal, const fs::path& labels) {
  if (!fs::exists(signal)) throw emg::PlanError("missing signal file " + signal.string());
  if (!fs::exists(labels)) throw emg::PlanError("missing label file " + labels.string());
  return emg::load_acquisition(acq, signal, labels);
}

int cmd_preprocess(const PreprocessArgs& args) {
  const auto raw = load_checked(args.acq, args.signal_file, args.label_file);
  const auto config = args.pipeline.to_config();
  config.validate(emg::kDefaultSampleRateHz);
  log_line("preprocess", "", "loaded " + std::to_string(raw.signal_rows.size()) +
                                 " signal rows, " + std::to_string(raw.label_rows.size()) +
                                 " label rows");
  const auto result = emg::preprocess(raw, config);
  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  emg::write_text_file(out / "processed.csv", emg::labeled_signal_to_csv(result.processed));
  emg::write_text_file(out / "var_model.json", emg::var_model_to_json(result.var_model));
  emg::write_text_file(out / "filter.json", emg::filter_to_json(result.filter));
  std::cout << "processed " << result.processed.length() << " samples -> " << args.out_dir
            << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- features

struct FeaturesArgs {
  std::string signal_file;
  std::string label_file;
  int acq = 0;
  std::string feature = "mav";
  std::string out_file;
  PipelineOptions pipeline;
};

int cmd_features(const FeaturesArgs& args) {
  const auto raw = load_checked(args.acq, args.signal_file, args.label_file);
  const auto config = args.pipeline.to_config();
  config.validate(emg::kDefaultSampleRateHz);
  const auto processed = emg::preprocess(raw, config);
  const auto kind = emg::feature_kind_from_string(args.feature);
  const auto features = emg::featurize(processed.processed, kind, config.window);
  const fs::path out(args.out_file);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  emg::write_text_file(out, emg::feature_set_to_csv(features));
  emg::write_text_file(sidecar_path(out), emg::feature_set_sidecar_json(features));
  std::cout << features.size() << " " << emg::to_string(kind) << " windows -> "
            << args.out_file << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string train_file;
  std::string validation_file;
  std::string out_file;
  int jobs = default_jobs();
  bool verbose = false;
  std::vector<double> grid_c;
  std::vector<double> grid_gamma;
  SolverOptions solver;
};

emg::HyperparameterGrid resolve_grid(const std::vector<double>& c_values,
                                     const std::vector<double>& gamma_values) {
  emg::HyperparameterGrid grid = emg::HyperparameterGrid::standard();
  if (!c_values.empty()) grid.c_values = c_values;
  if (!gamma_values.empty()) grid.gamma_values = gamma_values;
  return grid;
}

int cmd_train(const TrainArgs& args) {
  const auto train = load_feature_csv(args.train_file);
  const auto validation = load_feature_csv(args.validation_file);
  const auto grid = resolve_grid(args.grid_c, args.grid_gamma);
  const auto opts = args.solver.to_options();
  log_line("train", "", "grid search over " +
                            std::to_string(grid.c_values.size() * grid.gamma_values.size()) +
                            " cells, jobs=" + std::to_string(args.jobs));
  const auto search = emg::grid_search(train, validation, grid, args.jobs, opts);
  if (args.verbose) {
    for (const auto& cell : search.cells) {
      log_line("train", "C=" + emg::format_double(cell.c) +
                            ",gamma=" + emg::format_double(cell.gamma),
               cell.failed ? "failed: " + cell.error
                           : "accuracy=" + emg::format_double(cell.validation_accuracy));
    }
  }
  const auto model =
      emg::train_multiclass(train, search.c, emg::KernelParams{search.gamma}, opts);
  const fs::path out(args.out_file);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  emg::write_text_file(out, emg::svm_model_to_json(model));
  std::cout << "chosen C=" << emg::format_double(search.c)
            << " gamma=" << emg::format_double(search.gamma)
            << " validation_accuracy=" << emg::format_double(search.validation_accuracy)
            << " machines=" << model.machines.size() << " -> " << args.out_file << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string model_file;
  std::string test_file;
  std::string smoothing = "off";
  int smoothing_k = 5;
  std::string out_file;  // optional JSON
};

int cmd_evaluate(const EvaluateArgs& args) {
  if (!fs::exists(args.model_file)) {
    throw emg::PlanError("missing model file " + args.model_file);
  }
  const auto model = emg::svm_model_from_json(emg::read_text_file(args.model_file));
  const auto test = load_feature_csv(args.test_file);
  if (test.feature_kind != model.feature_kind) {
    throw emg::SchemaError("model expects " + emg::to_string(model.feature_kind) +
                           " features, file holds " + emg::to_string(test.feature_kind));
  }
  if (!(test.window_spec == model.window_spec)) {
    throw emg::SchemaError("model and feature file disagree on the window spec");
  }
  auto predictions = emg::predict_all(model, test);
  if (args.smoothing == "on") {
    emg::SmoothingConfig config;
    config.window_k = args.smoothing_k;
    config.validate();
    predictions = emg::smooth_predictions(predictions, config);
  }
  const auto matrix = emg::confusion(predictions, test.labels);
  const double acc = matrix.overall_accuracy();
  std::cout << "accuracy=" << emg::format_double(acc) << " windows=" << test.size()
            << " smoothing=" << args.smoothing << "\n";
  if (!args.out_file.empty()) {
    emg::ExperimentReport report;
    emg::ReportCell cell;
    cell.test_acq = test.acquisition_id;
    cell.feature_kind = test.feature_kind;
    cell.smoothing = args.smoothing == "on";
    cell.accuracy = acc;
    cell.chosen_c = model.chosen_c;
    cell.chosen_gamma = model.chosen_gamma;
    cell.confusion = matrix;
    cell.ranking = emg::rank_movements(matrix);
    report.cells.push_back(std::move(cell));
    const emg::ConfigEcho echo = {{"command", "evaluate"},
                                  {"smoothing", args.smoothing},
                                  {"smoothing_k", std::to_string(args.smoothing_k)}};
    const fs::path out(args.out_file);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    emg::write_text_file(out, emg::report_to_json(report, echo));
  }
  return kExitOk;
}

// ------------------------------------------------------------------- repro

struct ReproArgs {
  std::string data_dir;
  std::string out_dir;
  std::uint64_t seed = kDefaultSeed;
  std::string part = "both";
  std::string feature = "both";
  std::string smoothing = "both";
  int smoothing_k = 5;
  double train_fraction = 0.10;
  int jobs = default_jobs();
  bool verbose = false;
  std::vector<int> figures;
  std::vector<double> grid_c;
  std::vector<double> grid_gamma;
  PipelineOptions pipeline;
  SolverOptions solver;
};

std::vector<emg::Part> selected_parts(const std::string& part) {
  if (part == "1") return {emg::Part::kPart1};
  if (part == "2") return {emg::Part::kPart2};
  return {emg::Part::kPart1, emg::Part::kPart2};
}

std::vector<emg::FeatureKind> selected_features(const std::string& feature) {
  if (feature == "mav") return {emg::FeatureKind::kMav};
  if (feature == "wl") return {emg::FeatureKind::kWl};
  return {emg::FeatureKind::kMav, emg::FeatureKind::kWl};
}

emg::SmoothingSelection selected_smoothing(const std::string& smoothing) {
  if (smoothing == "on") return emg::SmoothingSelection::kOn;
  if (smoothing == "off") return emg::SmoothingSelection::kOff;
  return emg::SmoothingSelection::kBoth;
}

emg::ConfigEcho repro_config_echo(const ReproArgs& args,
                                  const emg::HyperparameterGrid& grid) {
  auto join_doubles = [](const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out += ' ';
      out += emg::format_double(values[i]);
    }
    return out;
  };
  return {
      {"seed", std::to_string(args.seed)},
      {"part", args.part},
      {"feature", args.feature},
      {"smoothing", args.smoothing},
      {"smoothing_k", std::to_string(args.smoothing_k)},
      {"train_fraction", emg::format_double(args.train_fraction)},
      {"var_order", std::to_string(args.pipeline.var_order)},
      {"cutoff_hz", emg::format_double(args.pipeline.cutoff_hz)},
      {"window_ms", std::to_string(args.pipeline.window_ms)},
      {"stride_ms", std::to_string(args.pipeline.stride_ms)},
      {"relabel_window_s", emg::format_double(args.pipeline.relabel_window_s)},
      {"relabel_factor", emg::format_double(args.pipeline.relabel_factor)},
      {"relabel_shift_s", emg::format_double(args.pipeline.relabel_shift_s)},
      {"grid_c", join_doubles(grid.c_values)},
      {"grid_gamma", join_doubles(grid.gamma_values)},
      {"tolerance", emg::format_double(args.solver.tolerance)},
      {"max_passes", std::to_string(args.solver.max_passes)},
      {"cache_mb", std::to_string(args.solver.cache_mb)},
  };
}

int cmd_repro(const ReproArgs& args) {
  const fs::path data_dir(args.data_dir);
  for (int acq : emg::kAcquisitionIds) {
    const fs::path signal = data_dir / emg::synth_signal_filename(acq);
    const fs::path labels = data_dir / emg::synth_label_filename(acq);
    if (!fs::exists(signal) || !fs::exists(labels)) {
      std::cerr << "acquisition " << acq << " is missing ("
                << (fs::exists(signal) ? labels.string() : signal.string()) << ")\n";
      return kExitMissingInput;
    }
  }

  const auto config = args.pipeline.to_config();
  config.validate(emg::kDefaultSampleRateHz);
  const auto opts = args.solver.to_options();
  const auto grid = resolve_grid(args.grid_c, args.grid_gamma);
  const auto parts = selected_parts(args.part);
  const auto kinds = selected_features(args.feature);
  const auto selection = selected_smoothing(args.smoothing);
  emg::SmoothingConfig smoothing_config;
  smoothing_config.window_k = args.smoothing_k;
  smoothing_config.validate();

  // Preprocess every acquisition once, then featurize per requested kind.
  std::map<emg::FeatureKind, std::map<int, emg::FeatureSet>> features;
  for (int acq : emg::kAcquisitionIds) {
    const auto raw = load_checked(acq, data_dir / emg::synth_signal_filename(acq),
                                  data_dir / emg::synth_label_filename(acq));
    const auto processed = emg::preprocess(raw, config);
    for (emg::FeatureKind kind : kinds) {
      features[kind][acq] = emg::featurize(processed.processed, kind, config.window);
    }
    log_line("preprocess", "acq" + std::to_string(acq),
             std::to_string(processed.processed.length()) + " samples, " +
                 std::to_string(features[kinds.front()][acq].size()) + " windows");
  }

  emg::ExperimentReport report;
  report.seed = args.seed;
  for (emg::Part part : parts) {
    for (int day = 1; day <= 4; ++day) {
      for (emg::FeatureKind kind : kinds) {
        const std::string cell_id = "p" + std::to_string(static_cast<int>(part)) + "-day" +
                                    std::to_string(day) + "-" + emg::to_string(kind);
        const auto plan = emg::make_plan(part, day, args.seed, args.train_fraction);
        const auto materialized = emg::assemble_plan(plan, features[kind]);
        for (const auto& warning : materialized.warnings) {
          log_line("plan", cell_id, warning);
        }
        const auto cells = emg::run_experiment(materialized, kind, smoothing_config,
                                               selection, grid, args.jobs, opts);
        for (const auto& cell : cells) {
          if (args.verbose || cell.failed) {
            log_line("experiment",
                     cell_id + "-acq" + std::to_string(cell.test_acq) +
                         (cell.smoothing ? "-on" : "-off"),
                     cell.failed ? "failed: " + cell.error
                                 : "accuracy=" + emg::format_double(cell.accuracy));
          }
          report.cells.push_back(cell);
        }
        log_line("experiment", cell_id, "done (" + std::to_string(cells.size()) + " cells)");
      }
    }
  }

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  emg::write_text_file(out / "report.csv", emg::report_to_csv(report));
  emg::write_text_file(out / "report.json",
                       emg::report_to_json(report, repro_config_echo(args, grid)));
  for (int figure : args.figures) {
    if (figure == 12) {
      emg::write_text_file(out / "figure12_accuracies.csv", emg::figure_accuracy_csv(report));
    } else if (figure == 13) {
      emg::write_text_file(out / "figure13_confusion.csv", emg::figure_confusion_csv(report));
    } else if (figure == 14) {
      emg::write_text_file(out / "figure14_rankings.csv", emg::figure_ranking_csv(report));
    }
  }

  int failed = 0;
  for (const auto& cell : report.cells) failed += cell.failed ? 1 : 0;
  std::cout << report.cells.size() << " result rows (" << failed << " failed) -> "
            << args.out_dir << "\n";
  return failed == 0 ? kExitOk : kExitPartialExperiment;
}

// ------------------------------------------------------------------- synth

struct SynthArgs {
  std::string out_dir;
  std::uint64_t seed = kDefaultSeed;
  emg::SynthConfig config;
};

int cmd_synth(const SynthArgs& args) {
  args.config.validate();
  const auto entries = emg::synth_generate(args.config, args.seed, args.out_dir);
  std::cout << entries.size() << " acquisitions -> " << args.out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EMG movement-classification pipeline"};
  app.set_config("--config", "",
                 "Read options from a key=value file ('#' comments; sections per subcommand)");
  app.require_subcommand(1);
  app.set_version_flag("--version", "emgpipe 0.1.0");

  ValidateArgs validate_args;
  auto* validate = app.add_subcommand(
      "validate", "Check signal/label files against the ingest schema");
  validate->add_option("--signal", validate_args.signal_files, "Signal file(s) to check");
  validate->add_option("--labels", validate_args.label_files, "Label file(s) to check");
  validate->add_option("--data-dir", validate_args.data_dir,
                       "Directory holding acqNN_signal.txt / acqNN_labels.txt pairs");

  PreprocessArgs preprocess_args;
  auto* preprocess =
      app.add_subcommand("preprocess", "Synchronize, relabel, whiten and low-pass one acquisition");
  preprocess->add_option("--signal", preprocess_args.signal_file, "Signal file")->required();
  preprocess->add_option("--labels", preprocess_args.label_file, "Label file")->required();
  preprocess->add_option("--acq", preprocess_args.acq, "Acquisition id tag")
      ->capture_default_str();
  preprocess->add_option("--out", preprocess_args.out_dir, "Output directory")->required();
  preprocess_args.pipeline.add_flags(preprocess);

  FeaturesArgs features_args;
  auto* features =
      app.add_subcommand("features", "Run the full pipeline and extract windowed features");
  features->add_option("--signal", features_args.signal_file, "Signal file")->required();
  features->add_option("--labels", features_args.label_file, "Label file")->required();
  features->add_option("--acq", features_args.acq, "Acquisition id tag")
      ->capture_default_str();
  features->add_option("--feature", features_args.feature, "Feature kind")
      ->check(CLI::IsMember({"mav", "wl"}))
      ->capture_default_str();
  features->add_option("--out", features_args.out_file,
                       "Output CSV (a .json sidecar is written next to it)")
      ->required();
  features_args.pipeline.add_flags(features);

  TrainArgs train_args;
  auto* train = app.add_subcommand(
      "train", "Grid-search hyperparameters and train a multiclass classifier");
  train->add_option("--train", train_args.train_file, "Training feature CSV")->required();
  train->add_option("--validation", train_args.validation_file, "Validation feature CSV")
      ->required();
  train->add_option("--out", train_args.out_file, "Model JSON path")->required();
  train->add_option("--jobs", train_args.jobs, "Parallel grid workers")
      ->capture_default_str();
  train->add_flag("--verbose", train_args.verbose, "Log every grid cell");
  train->add_option("--grid-c", train_args.grid_c, "Override C grid values")
      ->delimiter(',');
  train->add_option("--grid-gamma", train_args.grid_gamma, "Override gamma grid values")
      ->delimiter(',');
  train_args.solver.add_flags(train);

  EvaluateArgs evaluate_args;
  auto* evaluate =
      app.add_subcommand("evaluate", "Score a trained model on a feature CSV");
  evaluate->add_option("--model", evaluate_args.model_file, "Model JSON")->required();
  evaluate->add_option("--test", evaluate_args.test_file, "Feature CSV to score")->required();
  evaluate->add_option("--smoothing", evaluate_args.smoothing, "Majority-vote smoothing")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  evaluate->add_option("--smoothing-k", evaluate_args.smoothing_k,
                       "Smoothing window length (odd)")
      ->capture_default_str();
  evaluate->add_option("--out", evaluate_args.out_file, "Optional JSON report path");

  ReproArgs repro_args;
  auto* repro = app.add_subcommand(
      "repro", "Run the full repeatability protocol over all 12 acquisitions");
  repro->add_option("--data-dir", repro_args.data_dir,
                    "Directory holding acqNN_signal.txt / acqNN_labels.txt pairs")
      ->required();
  repro->add_option("--out", repro_args.out_dir, "Output directory")->required();
  repro->add_option("--seed", repro_args.seed, "Master seed for split/subsample draws")
      ->capture_default_str();
  repro->add_option("--part", repro_args.part, "Experiment part selection")
      ->check(CLI::IsMember({"1", "2", "both"}))
      ->capture_default_str();
  repro->add_option("--feature", repro_args.feature, "Feature kind selection")
      ->check(CLI::IsMember({"mav", "wl", "both"}))
      ->capture_default_str();
  repro->add_option("--smoothing", repro_args.smoothing, "Smoothing variant selection")
      ->check(CLI::IsMember({"on", "off", "both"}))
      ->capture_default_str();
  repro->add_option("--smoothing-k", repro_args.smoothing_k, "Smoothing window length (odd)")
      ->capture_default_str();
  repro->add_option("--train-fraction", repro_args.train_fraction,
                    "Training subsample fraction of the first half")
      ->capture_default_str();
  repro->add_option("--jobs", repro_args.jobs, "Parallel grid workers")
      ->capture_default_str();
  repro->add_flag("--verbose", repro_args.verbose, "Log every result cell");
  repro->add_option("--emit-figure-data", repro_args.figures,
                    "Plot-data CSVs to write (12 accuracies, 13 confusion, 14 rankings)")
      ->check(CLI::IsMember({12, 13, 14}))
      ->delimiter(',');
  repro->add_option("--grid-c", repro_args.grid_c, "Override C grid values")->delimiter(',');
  repro->add_option("--grid-gamma", repro_args.grid_gamma, "Override gamma grid values")
      ->delimiter(',');
  repro_args.pipeline.add_flags(repro);
  repro_args.solver.add_flags(repro);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic 12-acquisition dataset in ingest format");
  synth->add_option("--out", synth_args.out_dir, "Output directory")->required();
  synth->add_option("--seed", synth_args.seed, "Generator seed")->capture_default_str();
  synth->add_option("--movements", synth_args.config.num_movements, "Movement count")
      ->capture_default_str();
  synth->add_option("--repetitions", synth_args.config.repetitions,
                    "Repetitions per movement")
      ->capture_default_str();
  synth->add_option("--movement-s", synth_args.config.movement_s, "Movement duration")
      ->capture_default_str();
  synth->add_option("--rest-s", synth_args.config.rest_s, "Rest duration")
      ->capture_default_str();
  synth->add_option("--baseline-noise", synth_args.config.baseline_noise,
                    "Rest noise scale")
      ->capture_default_str();
  synth->add_option("--burst-amplitude", synth_args.config.burst_amplitude,
                    "Movement noise scale")
      ->capture_default_str();
  synth->add_option("--drift-gain", synth_args.config.drift_gain,
                    "Per-channel gain drift for later sessions")
      ->capture_default_str();
  synth->add_option("--drift-offset", synth_args.config.drift_offset,
                    "Per-channel offset drift for later sessions")
      ->capture_default_str();
  synth->add_option("--onset-lag-max-s", synth_args.config.onset_lag_max_s,
                    "Maximum burst onset lag behind the nominal label")
      ->capture_default_str();
  synth->add_option("--timestamp-jitter-s", synth_args.config.timestamp_jitter_s,
                    "Signal timestamp jitter amplitude")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(validate_args);
    if (*preprocess) return cmd_preprocess(preprocess_args);
    if (*features) return cmd_features(features_args);
    if (*train) return cmd_train(train_args);
    if (*evaluate) return cmd_evaluate(evaluate_args);
    if (*repro) return cmd_repro(repro_args);
    if (*synth) return cmd_synth(synth_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOther;
}
