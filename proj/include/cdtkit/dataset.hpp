#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace cdtkit {

/// Feature matrix (one row per sample) with one integer class label per row.
struct LabeledDataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dimension() const { return features.cols(); }

  /// Sorted distinct labels.
  std::vector<int> classes() const;

  /// Throws unless rows match labels, every entry is finite and there are at
  /// least two classes.
  void validate() const;

  LabeledDataset subset(std::span<const std::size_t> rows) const;
};

}  // namespace cdtkit
