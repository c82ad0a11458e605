#include "cdtkit/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <string_view>
#include <system_error>

#include "cdtkit/error.hpp"

namespace cdtkit {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

double parse_value(std::string_view cell, const std::filesystem::path& path, std::size_t line,
                   std::size_t column) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size()) {
    throw Error(Errc::kParseError, where(path, line) + ": column " + std::to_string(column + 1) +
                                       " is not a number: '" + std::string(cell) + "'");
  }
  if (!std::isfinite(v)) {
    throw Error(Errc::kParseError,
                where(path, line) + ": column " + std::to_string(column + 1) + " is not finite");
  }
  return v;
}

int parse_label(std::string_view cell, const std::filesystem::path& path, std::size_t line) {
  if (cell.empty()) throw Error(Errc::kLabelMissing, where(path, line) + ": row has no label");
  int label = 0;
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
  if (ec != std::errc() || end != cell.data() + cell.size()) {
    throw Error(Errc::kParseError,
                where(path, line) + ": label is not an integer: '" + std::string(cell) + "'");
  }
  return label;
}

// Calls `row(line_number, label, values)` for every data row of the file.
template <class Fn>
void read_rows(const std::filesystem::path& path, Fn&& row) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kParseError, "cannot open " + path.string());
  std::string text;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, text)) {
    ++line_no;
    const std::string_view line = trim(text);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split(line);
    const bool header = first && cells.front() == "label";
    first = false;
    if (header) continue;
    const int label = parse_label(cells.front(), path, line_no);
    std::vector<double> values;
    values.reserve(cells.size() - 1);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      values.push_back(parse_value(cells[c], path, line_no, c));
    }
    row(line_no, label, std::move(values));
  }
}

void append_row(std::string& out, int label, std::span<const double> values) {
  out += std::to_string(label);
  for (double v : values) {
    out += ',';
    out += format_double(v);
  }
  out += '\n';
}

}  // namespace

void RawSignalSet::validate() const {
  if (labels.size() != signals.size()) {
    throw Error(Errc::kDimensionMismatch, std::to_string(signals.size()) + " signals but " +
                                              std::to_string(labels.size()) + " labels");
  }
  if (axes != 1 && axes != 3) throw Error(Errc::kInvalidArgument, "signals have 1 or 3 axes");
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (signals[i].size() % static_cast<std::size_t>(axes) != 0) {
      throw Error(Errc::kDimensionMismatch,
                  "signal " + std::to_string(i) + " does not hold whole triples");
    }
    for (double v : signals[i]) {
      if (!std::isfinite(v)) {
        throw Error(Errc::kNonFinite, "signal " + std::to_string(i) + " has a non-finite value");
      }
    }
  }
}

std::vector<double> energy(std::span<const std::array<double, 3>> signal) {
  if (signal.empty()) throw Error(Errc::kEmptyInput, "energy of an empty signal");
  std::vector<double> out(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const auto& s = signal[i];
    out[i] = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
  }
  return out;
}

RawSignalSet energy(const RawSignalSet& triaxial) {
  triaxial.validate();
  if (triaxial.axes != 3) throw Error(Errc::kInvalidArgument, "energy needs tri-axis signals");
  RawSignalSet out;
  out.labels = triaxial.labels;
  for (const auto& s : triaxial.signals) {
    std::vector<std::array<double, 3>> triples(s.size() / 3);
    for (std::size_t i = 0; i < triples.size(); ++i) triples[i] = {s[3 * i], s[3 * i + 1], s[3 * i + 2]};
    out.signals.push_back(energy(triples));
  }
  return out;
}

RawSignalSet zero_pad(const RawSignalSet& set) {
  if (set.signals.empty()) throw Error(Errc::kEmptyInput, "nothing to pad");
  std::size_t longest = 0;
  for (const auto& s : set.signals) longest = std::max(longest, s.size());
  RawSignalSet out = set;
  for (auto& s : out.signals) s.resize(longest, 0.0);
  return out;
}

HistogramRange HistogramRange::spanning(const RawSignalSet& set) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : set.signals) {
    for (double v : s) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo <= hi)) throw Error(Errc::kEmptyInput, "no values to span");
  if (lo == hi) {
    const double pad = std::max(0.5, std::abs(lo) * 1e-6);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi};
}

DiscreteDensity histogram(std::span<const double> values, std::size_t bins, HistogramRange range,
                          double epsilon_floor) {
  if (values.empty()) throw Error(Errc::kEmptyInput, "histogram of no values");
  if (bins < 2) throw Error(Errc::kInvalidArgument, "histogram needs at least 2 bins");
  if (!(range.upper > range.lower) || !std::isfinite(range.lower) || !std::isfinite(range.upper)) {
    throw Error(Errc::kInvalidArgument, "histogram range must be a finite nonempty interval");
  }
  const double width = (range.upper - range.lower) / static_cast<double>(bins);
  std::vector<double> counts(bins, 0.0);
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(Errc::kNonFinite, "histogram input is not finite");
    const double pos = std::floor((v - range.lower) / width);
    const auto k = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    counts[k] += 1.0;
  }
  const double norm = 1.0 / (static_cast<double>(values.size()) * width);
  for (double& c : counts) c *= norm;
  return DiscreteDensity::from_samples(counts, range.lower + 0.5 * width, width, epsilon_floor);
}

LabeledDataset histograms(const RawSignalSet& set, std::size_t bins, HistogramRange range,
                          double epsilon_floor) {
  set.validate();
  LabeledDataset out;
  out.features.resize(static_cast<Eigen::Index>(set.size()), static_cast<Eigen::Index>(bins));
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto h = histogram(set.signals[i], bins, range, epsilon_floor);
    for (std::size_t k = 0; k < bins; ++k) {
      out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = h.values()[k];
    }
  }
  out.labels = set.labels;
  return out;
}

RawSignalSet load_raw_csv(const std::filesystem::path& path, int axes) {
  RawSignalSet out;
  out.axes = axes;
  if (axes != 1 && axes != 3) throw Error(Errc::kInvalidArgument, "signals have 1 or 3 axes");
  read_rows(path, [&](std::size_t line, int label, std::vector<double> values) {
    if (values.empty()) throw Error(Errc::kParseError, where(path, line) + ": row has no values");
    if (values.size() % static_cast<std::size_t>(axes) != 0) {
      throw Error(Errc::kParseError,
                  where(path, line) + ": tri-axis row has " + std::to_string(values.size()) +
                      " values, not a multiple of 3");
    }
    out.labels.push_back(label);
    out.signals.push_back(std::move(values));
  });
  if (out.signals.empty()) throw Error(Errc::kEmptyInput, path.string() + " has no rows");
  return out;
}

LabeledDataset load_dataset_csv(const std::filesystem::path& path) {
  std::vector<std::vector<double>> rows;
  LabeledDataset out;
  read_rows(path, [&](std::size_t line, int label, std::vector<double> values) {
    if (values.empty()) throw Error(Errc::kParseError, where(path, line) + ": row has no values");
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw Error(Errc::kParseError, where(path, line) + ": row has " +
                                         std::to_string(values.size()) + " values, expected " +
                                         std::to_string(rows.front().size()));
    }
    out.labels.push_back(label);
    rows.push_back(std::move(values));
  });
  if (rows.empty()) throw Error(Errc::kEmptyInput, path.string() + " has no rows");
  out.features.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(rows[i].data(), out.features.cols());
  }
  return out;
}

std::string to_csv(const RawSignalSet& set) {
  set.validate();
  std::string out;
  for (std::size_t i = 0; i < set.size(); ++i) append_row(out, set.labels[i], set.signals[i]);
  return out;
}

std::string to_csv(const LabeledDataset& data) {
  if (static_cast<std::size_t>(data.features.rows()) != data.labels.size()) {
    throw Error(Errc::kDimensionMismatch, "rows and labels differ in count");
  }
  std::string out;
  std::vector<double> row(static_cast<std::size_t>(data.features.cols()));
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) row[static_cast<std::size_t>(j)] = data.features(i, j);
    append_row(out, data.labels[static_cast<std::size_t>(i)], row);
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::random_device rd;
  const auto tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kInvalidArgument, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(Errc::kInvalidArgument, "failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(Errc::kInvalidArgument, "cannot move output into place at " + path.string());
  }
}

std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error(Errc::kInvalidArgument, "cannot format number");
  return std::string(buf, end);
}

}  // namespace cdtkit
