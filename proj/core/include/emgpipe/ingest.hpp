#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "emgpipe/types.hpp"

namespace emg {

// Signal files are ASCII, whitespace- or comma-delimited, one sample per row:
// timestamp followed by at least 10 EMG values; any further columns (e.g.
// inclinometer or glove channels) are discarded. Label files carry a timestamp
// and an integral label in 0..17 per row; extra columns are ignored.
// Timestamps must be strictly increasing. UTF-8, LF or CRLF.
std::vector<SignalRow> parse_signal_file(std::istream& in);
std::vector<SignalRow> parse_signal_file(const std::filesystem::path& path);
std::vector<LabelRow> parse_label_file(std::istream& in);
std::vector<LabelRow> parse_label_file(const std::filesystem::path& path);

RawAcquisition load_acquisition(int acquisition_id,
                                const std::filesystem::path& signal_path,
                                const std::filesystem::path& label_path);

// Canonical text form: space-separated fields, shortest round-trip decimals,
// LF line endings. parse(serialize(rows)) reproduces every value exactly.
std::string serialize_signal_rows(std::span<const SignalRow> rows);
std::string serialize_label_rows(std::span<const LabelRow> rows);

// Resamples the EMG channels onto a uniform grid spanning the overlap of the
// two streams (linear interpolation) and assigns each grid point the label of
// the nearest preceding label row (zero-order hold). Grid points that coincide
// with a sample timestamp within 1e-9 s take that sample's value verbatim, so
// re-synchronizing an already uniform acquisition is an exact no-op.
LabeledSignal synchronize(const RawAcquisition& raw,
                          double sample_rate_hz = kDefaultSampleRateHz);

}  // namespace emg
