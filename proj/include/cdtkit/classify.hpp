#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdtkit/dataset.hpp"

namespace cdtkit {

inline constexpr double kDefaultShrinkage = 1e-3;
inline constexpr double kDefaultPldaRidge = 1e-3;

/// Hyperplane w.x = b. Points with w.x > b get `positive_label`, the rest
/// `negative_label`.
struct LinearClassifier {
  Eigen::VectorXd weights;
  double bias = 0.0;
  int negative_label = 0;
  int positive_label = 1;

  double score(const Eigen::Ref<const Eigen::VectorXd>& x) const { return weights.dot(x) - bias; }
  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return score(x) > 0.0 ? positive_label : negative_label;
  }
};

/// Fisher discriminant w = (S_W + shrinkage * tr(S_W)/D * I)^-1 (m_pos - m_neg)
/// with the threshold halfway between the projected class means. The positive
/// class is the larger label.
LinearClassifier fit_fisher_lda(const LabeledDataset& data, double shrinkage = kDefaultShrinkage);

/// Penalized LDA: top-k generalized eigenvectors of
///   (S_B + alpha * S_T) v = lambda * (S_W + (ridge * tr(S_W) + alpha * tr(S_T)) / D * I) v.
/// alpha = 0 is regularized Fisher LDA; alpha -> infinity tends to PCA.
/// Samples are classified by the nearest class centroid in the embedding.
struct PldaModel {
  Eigen::MatrixXd projection;  // D x k, columns ordered by decreasing eigenvalue
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd centroids;  // one row per class, in embedding coordinates
  std::vector<int> classes;

  Eigen::MatrixXd embed(const Eigen::MatrixXd& features) const;
  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// The equivalent hyperplane for two classes.
  LinearClassifier as_linear_classifier() const;
};

PldaModel fit_penalized_lda(const LabeledDataset& data, double alpha, int dimensions,
                            double ridge = kDefaultPldaRidge);

struct SvmOptions {
  double gap_tolerance = 1e-6;  // relative duality gap
  long max_iterations = 10'000'000;
};

/// Soft-margin linear SVM, min 0.5|w|^2 + C sum hinge(y_i (w.x_i - b)), solved
/// in the dual with SMO until the duality gap is within tolerance.
LinearClassifier fit_linear_svm(const LabeledDataset& data, double c, const SvmOptions& options = {});

struct SvmDiagnostics {
  double primal = 0.0;
  double dual = 0.0;
  long iterations = 0;
};
LinearClassifier fit_linear_svm(const LabeledDataset& data, double c, const SvmOptions& options,
                                SvmDiagnostics* diagnostics);

/// One-vs-rest wrapper: the class with the largest score wins.
struct OneVsRest {
  std::vector<LinearClassifier> members;  // member i separates classes[i] (positive) from the rest
  std::vector<int> classes;

  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

enum class Method { kFisherLda, kPenalizedLda, kLinearSvm };

/// Fitted model of any method; multi-class LDA/SVM go through one-vs-rest.
class Classifier {
 public:
  static Classifier fit(Method method, const LabeledDataset& data, double parameter);

  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  std::vector<int> predict_all(const Eigen::MatrixXd& features) const;
  double error_rate(const LabeledDataset& data) const;

 private:
  std::optional<LinearClassifier> binary_;
  std::optional<OneVsRest> ovr_;
  std::optional<PldaModel> plda_;
};

/// Result of the exact separability test between two point sets.
struct SeparabilityResult {
  bool separable = false;
  /// Set when separable: every point of `a` has w.x < b, every point of `b` w.x > b.
  std::optional<LinearClassifier> witness;
  /// Set when not separable: convex weights with sum alpha_i a_i = sum beta_j b_j.
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  /// |sum alpha_i a_i - sum beta_j b_j|.
  double certificate_residual = 0.0;
};

/// Decides whether conv(a) and conv(b) are disjoint (rows are points). The
/// hull-intersection system {x >= 0 : [a^T, -b^T; 1, 0; 0, 1] x = (0, 1, 1)}
/// is solved by nonnegative least squares on the centred, rescaled affine
/// span of the points. A zero residual gives alpha and beta; otherwise the
/// residual is a Farkas certificate, i.e. a separating plane. The reported
/// witness is the hard-margin SVM plane when that one separates. Sets that
/// no plane separates verifiably in double precision count as touching.
SeparabilityResult check_linear_separability(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

std::string method_name(Method method);
/// Accepts "lda", "plda" and "svm".
Method parse_method(const std::string& name);
/// Name of the tuned parameter: shrinkage, alpha or C.
std::string parameter_name(Method method);
/// SVM: C = 1e-3 .. 1e3; PLDA: alpha in {0, 0.01, 0.1, 1, 10}; LDA: the
/// default shrinkage only.
std::vector<double> default_grid(Method method);

/// Stratified assignment of rows to folds. Each class is shuffled with the
/// seed and dealt round robin. folds == row count gives leave-one-out.
std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels, int folds,
                                                       std::uint64_t seed);

struct FoldResult {
  Classifier model;
  double parameter = 0.0;
  double train_error = 0.0;
  double test_error = 0.0;
  std::vector<int> predictions;  // for the test rows, in order
};

/// Trains on `train` only (with the inner parameter sweep for SVM and PLDA)
/// and scores the `test` rows.
FoldResult evaluate_fold(const LabeledDataset& data, Method method,
                         std::span<const std::size_t> train, std::span<const std::size_t> test,
                         const std::vector<double>& grid, std::uint64_t seed);

struct CvReport {
  Method method = Method::kFisherLda;
  std::vector<double> per_fold_errors;  // test error per outer fold
  std::vector<double> per_fold_train_errors;
  std::vector<double> chosen_params;  // per outer fold
  double mean_train_error = 0.0;
  double mean_test_error = 0.0;
  double kappa = 0.0;  // Cohen's kappa of the pooled out-of-fold predictions

  std::size_t folds() const { return per_fold_errors.size(); }
  std::string to_table() const;
  /// Header fold,train_error,test_error,params.
  std::string to_csv() const;
};

struct CvOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  std::vector<double> grid;  // empty: default_grid(method)
  int threads = 1;
};

CvReport cross_validate(const LabeledDataset& data, Method method, const CvOptions& options);

inline constexpr double kDefaultProjectionAlpha = 0.1;

/// Fits a two-dimensional PLDA embedding on the `train` rows and projects
/// every row.
Eigen::MatrixXd project_2d(const LabeledDataset& data, std::span<const std::size_t> train,
                           double alpha = kDefaultProjectionAlpha);

}  // namespace cdtkit
