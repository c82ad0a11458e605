#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cdtkit/dataset.hpp"
#include "cdtkit/density.hpp"

namespace cdtkit {

/// Variable-length signals with one label each. Tri-axis signals store their
/// samples interleaved as x1, y1, z1, x2, ...
struct RawSignalSet {
  std::vector<std::vector<double>> signals;
  std::vector<int> labels;
  int axes = 1;  // 1 or 3

  std::size_t size() const { return signals.size(); }
  /// Throws unless labels match signals, values are finite and tri-axis rows
  /// hold whole triples.
  void validate() const;
};

/// x^2 + y^2 + z^2 per sample.
std::vector<double> energy(std::span<const std::array<double, 3>> signal);
/// Energy of every signal of a tri-axis set; the result has one axis.
RawSignalSet energy(const RawSignalSet& triaxial);

/// Right-pads every signal with zeros to the longest length.
RawSignalSet zero_pad(const RawSignalSet& set);

/// Binning interval shared by training and test data.
struct HistogramRange {
  double lower = 0.0;
  double upper = 1.0;

  /// [min, max] over all values of the set.
  static HistogramRange spanning(const RawSignalSet& set);
};

/// Equal-width counts over `range` with out-of-range values clipped to the
/// end bins, floored and normalized. bins >= 2.
DiscreteDensity histogram(std::span<const double> values, std::size_t bins, HistogramRange range,
                          double epsilon_floor = kDefaultEpsilonFloor);

/// One histogram row per signal.
LabeledDataset histograms(const RawSignalSet& set, std::size_t bins, HistogramRange range,
                          double epsilon_floor = kDefaultEpsilonFloor);

/// Rows `label, v1, v2, ...` of any length. Blank lines and lines starting
/// with '#' are skipped, as is a first line whose first cell is "label".
RawSignalSet load_raw_csv(const std::filesystem::path& path, int axes = 1);
/// Same format; every row must have the same number of values.
LabeledDataset load_dataset_csv(const std::filesystem::path& path);

std::string to_csv(const RawSignalSet& set);
std::string to_csv(const LabeledDataset& data);

/// Writes through a temporary file in the same directory and renames it
/// over `path`, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

}  // namespace cdtkit
