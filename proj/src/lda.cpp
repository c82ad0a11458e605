#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

#include "cdtkit/classify.hpp"
#include "cdtkit/error.hpp"

namespace cdtkit {

namespace {

// Scatter matrices in an orthonormal basis of the span of the centred data.
// S_W, S_B and S_T all vanish on the orthogonal complement, so any
// regularized problem of the form S + c*I decouples there.
struct Scatter {
  Eigen::MatrixXd basis;  // D x r
  Eigen::VectorXd mean;   // D
  Eigen::MatrixXd within, between, total;
  Eigen::MatrixXd class_means;  // classes x r, relative to `mean`
  std::vector<int> classes;
  Eigen::Index dimension = 0;
};

Scatter compute_scatter(const LabeledDataset& data, bool reduce) {
  data.validate();
  Scatter s;
  s.classes = data.classes();
  s.dimension = data.dimension();
  s.mean = data.features.colwise().mean().transpose();
  const Eigen::MatrixXd centred = data.features.rowwise() - s.mean.transpose();

  if (reduce && data.size() <= data.dimension()) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = sv.size() ? sv(0) * 1e-12 * static_cast<double>(centred.cols()) : 0.0;
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) ++rank;
    if (rank == 0) throw Error(Errc::kSingularScatter, "all samples coincide");
    s.basis = svd.matrixV().leftCols(rank);
  } else {
    s.basis = Eigen::MatrixXd::Identity(data.dimension(), data.dimension());
  }
  const Eigen::MatrixXd z = centred * s.basis;
  const Eigen::Index r = z.cols();

  s.class_means = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.classes.size()), r);
  std::vector<double> counts(s.classes.size(), 0.0);
  auto class_index = [&](int label) {
    return static_cast<std::size_t>(std::lower_bound(s.classes.begin(), s.classes.end(), label) -
                                    s.classes.begin());
  };
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const auto c = class_index(data.labels[static_cast<std::size_t>(i)]);
    s.class_means.row(static_cast<Eigen::Index>(c)) += z.row(i);
    counts[c] += 1.0;
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    s.class_means.row(static_cast<Eigen::Index>(c)) /= counts[c];
  }

  Eigen::MatrixXd within_centred = z;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const auto c = class_index(data.labels[static_cast<std::size_t>(i)]);
    within_centred.row(i) -= s.class_means.row(static_cast<Eigen::Index>(c));
  }
  s.total = z.transpose() * z;
  s.within = within_centred.transpose() * within_centred;
  s.between = Eigen::MatrixXd::Zero(r, r);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const Eigen::VectorXd m = s.class_means.row(static_cast<Eigen::Index>(c)).transpose();
    s.between += counts[c] * m * m.transpose();
  }
  return s;
}

void require_binary(const LabeledDataset& data) {
  if (data.classes().size() != 2) {
    throw Error(Errc::kInvalidArgument, "method needs exactly two classes, got " +
                                            std::to_string(data.classes().size()));
  }
}

void canonical_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0) v = -v;
}

}  // namespace

LinearClassifier fit_fisher_lda(const LabeledDataset& data, double shrinkage) {
  if (!(shrinkage >= 0.0)) throw Error(Errc::kInvalidArgument, "shrinkage must be nonnegative");
  require_binary(data);
  const Scatter s = compute_scatter(data, shrinkage > 0.0);
  const auto d = static_cast<double>(s.dimension);

  const Eigen::VectorXd diff = (s.class_means.row(1) - s.class_means.row(0)).transpose();
  if (diff.norm() <= 1e-14 * std::max(1.0, s.mean.norm())) {
    throw Error(Errc::kInvalidArgument, "class means coincide; discriminant direction undefined");
  }

  Eigen::MatrixXd scatter = s.within;
  scatter.diagonal().array() += shrinkage * s.within.trace() / d;
  Eigen::VectorXd w_reduced;
  if (shrinkage > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(scatter);
    if (llt.info() != Eigen::Success) {
      throw Error(Errc::kSingularScatter, "regularized within-class scatter is not invertible");
    }
    w_reduced = llt.solve(diff);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scatter);
    if (qr.rank() < scatter.rows()) {
      throw Error(Errc::kSingularScatter,
                  "within-class scatter has rank " + std::to_string(qr.rank()) + " < " +
                      std::to_string(scatter.rows()) + "; use shrinkage > 0");
    }
    w_reduced = qr.solve(diff);
  }

  LinearClassifier out;
  out.weights = s.basis * w_reduced;
  const Eigen::VectorXd m_neg = s.mean + s.basis * s.class_means.row(0).transpose();
  const Eigen::VectorXd m_pos = s.mean + s.basis * s.class_means.row(1).transpose();
  out.bias = 0.5 * (out.weights.dot(m_neg) + out.weights.dot(m_pos));
  out.negative_label = s.classes[0];
  out.positive_label = s.classes[1];
  return out;
}

Eigen::MatrixXd PldaModel::embed(const Eigen::MatrixXd& features) const {
  return features * projection;
}

int PldaModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::RowVectorXd z = x.transpose() * projection;
  Eigen::Index best = 0;
  (centroids.rowwise() - z).rowwise().squaredNorm().minCoeff(&best);
  return classes[static_cast<std::size_t>(best)];
}

LinearClassifier PldaModel::as_linear_classifier() const {
  if (classes.size() != 2) {
    throw Error(Errc::kInvalidArgument, "a single hyperplane needs exactly two classes");
  }
  const Eigen::VectorXd c0 = centroids.row(0).transpose();
  const Eigen::VectorXd c1 = centroids.row(1).transpose();
  LinearClassifier out;
  out.weights = projection * (c1 - c0);
  out.bias = 0.5 * (c1.squaredNorm() - c0.squaredNorm());
  out.negative_label = classes[0];
  out.positive_label = classes[1];
  return out;
}

PldaModel fit_penalized_lda(const LabeledDataset& data, double alpha, int dimensions,
                            double ridge) {
  if (!(alpha >= 0.0) || !(ridge >= 0.0)) {
    throw Error(Errc::kInvalidArgument, "alpha and ridge must be nonnegative");
  }
  if (dimensions < 1 || dimensions > data.dimension()) {
    throw Error(Errc::kBadRank, "embedding dimension must lie in [1, D]");
  }
  const Scatter s = compute_scatter(data, true);
  const auto d = static_cast<double>(s.dimension);

  const Eigen::MatrixXd numerator = s.between + alpha * s.total;
  Eigen::MatrixXd denominator = s.within;
  denominator.diagonal().array() += (ridge * s.within.trace() + alpha * s.total.trace()) / d;
  if (Eigen::LLT<Eigen::MatrixXd>(denominator).info() != Eigen::Success) {
    throw Error(Errc::kSingularScatter, "penalized scatter is not positive definite");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      numerator, denominator, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::kSingularScatter, "generalized eigenproblem failed");
  }
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const Eigen::Index r = values.size();
  const double top = std::max(values(r - 1), 0.0);
  Eigen::Index nontrivial = 0;
  for (Eigen::Index i = 0; i < r; ++i) nontrivial += values(i) > 1e-9 * top && top > 0.0;
  if (dimensions > nontrivial) {
    throw Error(Errc::kBadRank, "requested " + std::to_string(dimensions) +
                                    " directions but only " + std::to_string(nontrivial) +
                                    " are nontrivial");
  }

  PldaModel model;
  model.classes = s.classes;
  model.projection.resize(s.dimension, dimensions);
  model.eigenvalues.resize(dimensions);
  for (int k = 0; k < dimensions; ++k) {
    Eigen::VectorXd v = s.basis * solver.eigenvectors().col(r - 1 - k);
    v.normalize();
    canonical_sign(v);
    model.projection.col(k) = v;
    model.eigenvalues(k) = values(r - 1 - k);
  }
  const Eigen::MatrixXd means =
      (s.class_means * s.basis.transpose()).rowwise() + s.mean.transpose();
  model.centroids = means * model.projection;
  return model;
}

}  // namespace cdtkit
