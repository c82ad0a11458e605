#include "cdtkit/dataset.hpp"

#include <algorithm>
#include <string>

#include "cdtkit/error.hpp"

namespace cdtkit {

std::vector<int> LabeledDataset::classes() const {
  std::vector<int> out(labels);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void LabeledDataset::validate() const {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw Error(Errc::kDimensionMismatch, std::to_string(features.rows()) + " rows but " +
                                              std::to_string(labels.size()) + " labels");
  }
  if (!features.allFinite()) throw Error(Errc::kNonFinite, "feature matrix has non-finite entries");
  if (classes().size() < 2) {
    throw Error(Errc::kInvalidArgument, "dataset needs at least two distinct labels");
  }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= labels.size()) throw Error(Errc::kOutOfRange, "row index out of range");
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
    out.labels[i] = labels[rows[i]];
  }
  return out;
}

}  // namespace cdtkit
