#include "emgpipe/ingest.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>

#include "emgpipe/errors.hpp"
#include "emgpipe/text.hpp"

namespace emg {

namespace {

// Grid points and label timestamps that land within this distance of a sample
// timestamp are treated as coincident. Keeps resampling of already uniform
// input an exact identity despite accumulated float error in the grid times.
constexpr double kTimeSnap = 1e-9;  // seconds

// Splits on spaces, tabs and commas; empty tokens collapse.
void tokenize(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (i < n) {
    while (i < n && (line[i] == ' ' || line[i] == '\t' || line[i] == ',')) ++i;
    std::size_t start = i;
    while (i < n && line[i] != ' ' && line[i] != '\t' && line[i] != ',') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
}

double parse_finite(std::string_view token, std::size_t line_no, const char* what) {
  double value = 0.0;
  if (!parse_double(token, value) || !std::isfinite(value)) {
    throw ParseError("row " + std::to_string(line_no) + ": malformed " + what +
                     " '" + std::string(token) + "'");
  }
  return value;
}

template <typename Row, typename ParseRow>
std::vector<Row> parse_rows(std::istream& in, ParseRow parse_row) {
  std::vector<Row> rows;
  std::vector<std::string_view> tokens;
  std::string line;
  std::size_t line_no = 0;
  double previous_time = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokenize(line, tokens);
    if (tokens.empty()) continue;  // blank line
    Row row = parse_row(tokens, line_no);
    if (!rows.empty() && row.timestamp <= previous_time) {
      throw OrderingError("row " + std::to_string(line_no) +
                          ": timestamp " + format_double(row.timestamp) +
                          " does not increase past " + format_double(previous_time));
    }
    previous_time = row.timestamp;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::vector<SignalRow> parse_signal_file(std::istream& in) {
  return parse_rows<SignalRow>(in, [](const std::vector<std::string_view>& tokens,
                                      std::size_t line_no) {
    if (tokens.size() < 1 + kNumChannels) {
      throw SchemaError("row " + std::to_string(line_no) +
                        ": expected 10 EMG columns after the timestamp (>= 11 fields), found " +
                        std::to_string(tokens.size()));
    }
    SignalRow row;
    row.timestamp = parse_finite(tokens[0], line_no, "timestamp");
    for (int c = 0; c < kNumChannels; ++c) {
      row.emg[c] = parse_finite(tokens[1 + c], line_no, "EMG value");
    }
    // any further columns (inclinometer, glove, ...) are dropped
    return row;
  });
}

std::vector<LabelRow> parse_label_file(std::istream& in) {
  return parse_rows<LabelRow>(in, [](const std::vector<std::string_view>& tokens,
                                     std::size_t line_no) {
    if (tokens.size() < 2) {
      throw SchemaError("row " + std::to_string(line_no) +
                        ": expected timestamp and label, found " +
                        std::to_string(tokens.size()) + " field(s)");
    }
    LabelRow row;
    row.timestamp = parse_finite(tokens[0], line_no, "timestamp");
    if (!parse_int(tokens[1], row.label)) {
      throw ParseError("row " + std::to_string(line_no) + ": malformed label '" +
                       std::string(tokens[1]) + "'");
    }
    if (!is_valid_label(row.label)) {
      throw DomainError("row " + std::to_string(line_no) + ": label " +
                        std::to_string(row.label) + " outside 0..17");
    }
    return row;
  });
}

namespace {

template <typename T>
std::vector<T> parse_path(const std::filesystem::path& path,
                          std::vector<T> (*parser)(std::istream&)) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parser(in);
}

}  // namespace

std::vector<SignalRow> parse_signal_file(const std::filesystem::path& path) {
  return parse_path<SignalRow>(path, &parse_signal_file);
}

std::vector<LabelRow> parse_label_file(const std::filesystem::path& path) {
  return parse_path<LabelRow>(path, &parse_label_file);
}

RawAcquisition load_acquisition(int acquisition_id,
                                const std::filesystem::path& signal_path,
                                const std::filesystem::path& label_path) {
  RawAcquisition raw;
  raw.acquisition_id = acquisition_id;
  raw.signal_rows = parse_signal_file(signal_path);
  raw.label_rows = parse_label_file(label_path);
  return raw;
}

std::string serialize_signal_rows(std::span<const SignalRow> rows) {
  std::string out;
  out.reserve(rows.size() * 96);
  for (const SignalRow& row : rows) {
    out += format_double(row.timestamp);
    for (int c = 0; c < kNumChannels; ++c) {
      out += ' ';
      out += format_double(row.emg[c]);
    }
    out += '\n';
  }
  return out;
}

std::string serialize_label_rows(std::span<const LabelRow> rows) {
  std::string out;
  out.reserve(rows.size() * 16);
  for (const LabelRow& row : rows) {
    out += format_double(row.timestamp);
    out += ' ';
    out += std::to_string(row.label);
    out += '\n';
  }
  return out;
}

LabeledSignal synchronize(const RawAcquisition& raw, double sample_rate_hz) {
  if (sample_rate_hz <= 0.0) throw DomainError("sample rate must be positive");
  if (raw.signal_rows.empty()) throw SyncError("empty signal stream");
  if (raw.label_rows.empty()) throw SyncError("empty label stream");

  const auto& sig = raw.signal_rows;
  const auto& lab = raw.label_rows;
  const double t0 = std::max(sig.front().timestamp, lab.front().timestamp);
  const double t1 = std::min(sig.back().timestamp, lab.back().timestamp);
  if (t0 > t1 + kTimeSnap) {
    throw SyncError("signal and label time ranges do not overlap (" +
                    format_double(sig.front().timestamp) + ".." +
                    format_double(sig.back().timestamp) + " vs " +
                    format_double(lab.front().timestamp) + ".." +
                    format_double(lab.back().timestamp) + ")");
  }

  const std::size_t n =
      static_cast<std::size_t>(std::floor((t1 - t0) * sample_rate_hz +
                                          kTimeSnap * sample_rate_hz)) + 1;

  LabeledSignal out;
  out.sample_rate_hz = sample_rate_hz;
  out.start_time = t0;
  out.acquisition_id = raw.acquisition_id;
  for (auto& ch : out.channels) ch.resize(n);
  out.labels.resize(n);

  std::size_t seg = 0;        // sig[seg].timestamp <= t < sig[seg+1].timestamp
  std::size_t label_idx = 0;  // last label row with timestamp <= t
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) / sample_rate_hz;

    while (seg + 2 < sig.size() && sig[seg + 1].timestamp <= t) ++seg;
    const SignalRow& a = sig[seg];
    const SignalRow& b = sig[seg + 1 < sig.size() ? seg + 1 : seg];
    if (std::abs(t - a.timestamp) <= kTimeSnap) {
      for (int c = 0; c < kNumChannels; ++c) out.channels[c][i] = a.emg[c];
    } else if (std::abs(t - b.timestamp) <= kTimeSnap) {
      for (int c = 0; c < kNumChannels; ++c) out.channels[c][i] = b.emg[c];
    } else {
      const double frac = (t - a.timestamp) / (b.timestamp - a.timestamp);
      for (int c = 0; c < kNumChannels; ++c) {
        out.channels[c][i] = a.emg[c] + frac * (b.emg[c] - a.emg[c]);
      }
    }

    while (label_idx + 1 < lab.size() && lab[label_idx + 1].timestamp <= t + kTimeSnap) {
      ++label_idx;
    }
    out.labels[i] = lab[label_idx].label;
  }

  out.repetition_index = compute_repetition_index(out.labels);
  return out;
}

}  // namespace emg
