#include "nnls.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "cdtkit/error.hpp"

namespace cdtkit::detail {

NnlsResult solve_nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (b.size() != m) throw Error(Errc::kDimensionMismatch, "rhs size differs from row count");

  const double gradient_tol =
      1e-13 * std::max(1.0, a.cwiseAbs().maxCoeff()) * std::max(1.0, b.cwiseAbs().maxCoeff()) *
      static_cast<double>(std::max(m, n));
  std::vector<char> passive(static_cast<std::size_t>(n), 0);
  std::vector<char> rejected(static_cast<std::size_t>(n), 0);
  NnlsResult out;
  out.x = Eigen::VectorXd::Zero(n);
  out.residual = b;

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
    }
    Eigen::MatrixXd sub(m, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(cols[k]);
    const Eigen::VectorXd s = sub.colPivHouseholderQr().solve(b);
    z = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = s(static_cast<Eigen::Index>(k));
  };

  const int max_iterations = static_cast<int>(3 * n + 100);
  while (true) {
    const Eigen::VectorXd gradient = a.transpose() * out.residual;
    Eigen::Index enter = -1;
    double best = gradient_tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto k = static_cast<std::size_t>(j);
      if (!passive[k] && !rejected[k] && gradient(j) > best) {
        best = gradient(j);
        enter = j;
      }
    }
    if (enter < 0) break;
    if (++out.iterations > max_iterations) {
      throw Error(Errc::kNotConverged, "nonnegative least squares exceeded its iteration budget");
    }
    passive[static_cast<std::size_t>(enter)] = 1;

    Eigen::VectorXd z;
    solve_passive(z);
    // Roundoff can leave the entering coefficient nonpositive; skip that
    // column until the iterate moves.
    if (z(enter) <= 0.0) {
      passive[static_cast<std::size_t>(enter)] = 0;
      rejected[static_cast<std::size_t>(enter)] = 1;
      continue;
    }
    std::fill(rejected.begin(), rejected.end(), 0);
    for (int inner = 0; inner <= n; ++inner) {
      double step = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          step = std::min(step, out.x(j) / (out.x(j) - z(j)));
        }
      }
      if (step == std::numeric_limits<double>::infinity()) break;
      out.x += step * (z - out.x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && out.x(j) <= 0.0) {
          passive[static_cast<std::size_t>(j)] = 0;
          out.x(j) = 0.0;
        }
      }
      solve_passive(z);
    }
    out.x = z.cwiseMax(0.0);
    out.residual = b - a * out.x;
  }
  return out;
}

}  // namespace cdtkit::detail
