#include <cmath>
#include <limits>

#include "cdtkit/classify.hpp"
#include "cdtkit/error.hpp"

namespace cdtkit {

namespace {

// Root-mean-square row norm; SVM inputs are divided by it so that C means
// the same thing at every feature scale.
double feature_scale(const Eigen::MatrixXd& x) {
  const double s = std::sqrt(x.rowwise().squaredNorm().mean());
  return s > 0.0 ? s : 1.0;
}

LinearClassifier fit_binary(Method method, const LabeledDataset& data, double parameter) {
  switch (method) {
    case Method::kFisherLda:
      return fit_fisher_lda(data, parameter);
    case Method::kPenalizedLda:
      return fit_penalized_lda(data, parameter, 1).as_linear_classifier();
    case Method::kLinearSvm: {
      const double s = feature_scale(data.features);
      LabeledDataset scaled{data.features / s, data.labels};
      LinearClassifier out = fit_linear_svm(scaled, parameter);
      out.weights /= s;
      return out;
    }
  }
  throw Error(Errc::kInvalidArgument, "unknown method");
}

}  // namespace

int OneVsRest::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double best = -std::numeric_limits<double>::infinity();
  int label = classes.front();
  for (std::size_t i = 0; i < members.size(); ++i) {
    const double s = members[i].score(x);
    if (s > best) {
      best = s;
      label = classes[i];
    }
  }
  return label;
}

Classifier Classifier::fit(Method method, const LabeledDataset& data, double parameter) {
  data.validate();
  const auto classes = data.classes();
  Classifier out;
  if (method == Method::kPenalizedLda) {
    const int k = static_cast<int>(std::min<Eigen::Index>(classes.size() - 1, data.dimension()));
    out.plda_ = fit_penalized_lda(data, parameter, k);
    return out;
  }
  if (classes.size() == 2) {
    out.binary_ = fit_binary(method, data, parameter);
    return out;
  }
  OneVsRest ovr;
  ovr.classes = classes;
  for (int c : classes) {
    LabeledDataset relabeled{data.features, {}};
    relabeled.labels.reserve(data.labels.size());
    for (int l : data.labels) relabeled.labels.push_back(l == c ? 1 : 0);
    LinearClassifier member = fit_binary(method, relabeled, parameter);
    member.positive_label = c;
    member.negative_label = -1;
    ovr.members.push_back(std::move(member));
  }
  out.ovr_ = std::move(ovr);
  return out;
}

int Classifier::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (binary_) return binary_->predict(x);
  if (ovr_) return ovr_->predict(x);
  if (plda_) return plda_->predict(x);
  throw Error(Errc::kInvalidArgument, "classifier has not been fitted");
}

std::vector<int> Classifier::predict_all(const Eigen::MatrixXd& features) const {
  std::vector<int> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = predict(features.row(i).transpose());
  }
  return out;
}

double Classifier::error_rate(const LabeledDataset& data) const {
  if (data.size() == 0) return 0.0;
  const auto predicted = predict_all(data.features);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) wrong += predicted[i] != data.labels[i];
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

}  // namespace cdtkit
