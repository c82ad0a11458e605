#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cdtkit::cli {

struct ScatterStyle {
  std::string title;
  std::string x_label = "component 1";
  std::string y_label = "component 2";
  int width = 640;
  int height = 480;
};

/// Scatter plot of the rows of `xy` (n x 2), one colour per label. Rows with
/// `hollow[i]` set are drawn as outlines.
std::string scatter_svg(const Eigen::MatrixXd& xy, const std::vector<int>& labels,
                        const std::vector<bool>& hollow, const ScatterStyle& style);

}  // namespace cdtkit::cli
