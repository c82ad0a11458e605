#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "cdtkit/classify.hpp"
#include "cdtkit/error.hpp"
#include "nnls.hpp"

namespace cdtkit {

SeparabilityResult check_linear_separability(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() == 0 || b.rows() == 0) throw Error(Errc::kEmptyInput, "point sets must be nonempty");
  if (a.cols() != b.cols()) {
    throw Error(Errc::kDimensionMismatch, "point sets have different dimensions");
  }
  if (!a.allFinite() || !b.allFinite()) throw Error(Errc::kNonFinite, "points must be finite");

  const Eigen::Index d = a.cols();
  const Eigen::Index na = a.rows();
  const Eigen::Index nb = b.rows();

  // Work in centred, unit-scale coordinates on the affine span of the
  // points; separability is unchanged by this isometry.
  Eigen::MatrixXd all(na + nb, d);
  all << a, b;
  const Eigen::RowVectorXd centre = all.colwise().mean();
  const Eigen::MatrixXd centred = all.rowwise() - centre;
  double scale = centred.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) scale = 1.0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centred / scale, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-6 * std::max(sv(0), 1.0)) ++rank;
  const Eigen::MatrixXd basis = svd.matrixV().leftCols(std::max<Eigen::Index>(rank, 1));  // d x r
  const Eigen::Index r = basis.cols();
  const Eigen::MatrixXd pa = (centred.topRows(na) / scale) * basis;
  const Eigen::MatrixXd pb = (centred.bottomRows(nb) / scale) * basis;

  // Columns [p_i; 1; 0] and [-q_j; 0; 1]; rhs (0; 1; 1). A nonnegative
  // solution exists iff the hulls intersect.
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(r + 2, na + nb);
  system.topLeftCorner(r, na) = pa.transpose();
  system.topRightCorner(r, nb) = -pb.transpose();
  system.row(r).head(na).setOnes();
  system.row(r + 1).tail(nb).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(r + 2);
  rhs(r) = 1.0;
  rhs(r + 1) = 1.0;

  const auto ls = detail::solve_nnls(system, rhs);

  SeparabilityResult out;
  if (ls.residual.norm() <= 1e-10) {
    out.alpha = ls.x.head(na);
    out.beta = ls.x.tail(nb);
    out.alpha /= out.alpha.sum();
    out.beta /= out.beta.sum();
    out.certificate_residual = (a.transpose() * out.alpha - b.transpose() * out.beta).norm();
    return out;
  }

  // Farkas multipliers (w, u, v) from the residual: w.p_i <= -u < v <= w.q_j.
  const Eigen::VectorXd w_reduced = ls.residual.head(r);
  const double u = ls.residual(r);
  const double v = ls.residual(r + 1);
  LinearClassifier witness;
  witness.weights = basis * w_reduced / scale;
  witness.bias = 0.5 * (v - u) + witness.weights.dot(centre.transpose());
  witness.negative_label = 0;
  witness.positive_label = 1;

  const double max_a = (a * witness.weights).maxCoeff();
  const double min_b = (b * witness.weights).minCoeff();
  // Roundoff can put the plane on a point; recentre it in the gap.
  if (max_a < min_b && !(max_a < witness.bias && witness.bias < min_b)) {
    witness.bias = 0.5 * (max_a + min_b);
  }
  out.separable = true;
  if (max_a < witness.bias && witness.bias < min_b) out.witness = witness;

  // Prefer the maximum-margin plane when the hard-margin SVM converges.
  try {
    LabeledDataset scaled;
    scaled.features.resize(na + nb, r);
    scaled.features << pa, pb;
    scaled.labels.assign(static_cast<std::size_t>(na), 0);
    scaled.labels.resize(static_cast<std::size_t>(na + nb), 1);
    SvmOptions options;
    options.max_iterations = 1'000'000;
    const LinearClassifier svm = fit_linear_svm(scaled, 1e8, options);
    LinearClassifier margin;
    margin.weights = basis * svm.weights / scale;
    margin.bias = svm.bias + margin.weights.dot(centre.transpose());
    if ((a * margin.weights).maxCoeff() < margin.bias &&
        (b * margin.weights).minCoeff() > margin.bias) {
      out.witness = margin;
    }
  } catch (const Error&) {
  }
  if (out.witness) return out;

  // The hulls are closer than any plane can be verified to separate them in
  // double precision; report the nearest convex combinations instead.
  out.separable = false;
  out.alpha = ls.x.head(na);
  out.beta = ls.x.tail(nb);
  out.alpha /= out.alpha.sum();
  out.beta /= out.beta.sum();
  out.certificate_residual = (a.transpose() * out.alpha - b.transpose() * out.beta).norm();
  return out;
}

}  // namespace cdtkit
