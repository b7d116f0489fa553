#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace emloc::svg {

struct Series {
  std::string label;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// Line chart of one or more series with axes and a legend.
std::string line_plot(const std::string &title, const std::vector<Series> &series,
                      const std::string &x_label, const std::string &y_label);

/// Heatmap of a rows × cols grid (row 0 at the bottom), blue-white-red scale
/// symmetric about zero when the data changes sign.
std::string heatmap(const std::string &title, const Eigen::MatrixXd &grid,
                    const std::string &x_label, const std::string &y_label);

void write(const std::string &path, const std::string &svg);

} // namespace emloc::svg
