#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "cdtkit/classify.hpp"
#include "cdtkit/error.hpp"

namespace cdtkit {

namespace {

constexpr int kInnerFolds = 5;

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::map<int, std::size_t> class_counts(const std::vector<int>& labels) {
  std::map<int, std::size_t> out;
  for (int l : labels) ++out[l];
  return out;
}

std::string format_number(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

double cohen_kappa(const std::vector<int>& truth, const std::vector<int>& predicted) {
  const auto n = static_cast<double>(truth.size());
  std::map<int, double> t, p;
  double agree = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    t[truth[i]] += 1.0;
    p[predicted[i]] += 1.0;
    agree += truth[i] == predicted[i];
  }
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [label, count] : t) {
    const auto it = p.find(label);
    if (it != p.end()) pe += (count / n) * (it->second / n);
  }
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

}  // namespace

std::string method_name(Method method) {
  switch (method) {
    case Method::kFisherLda: return "lda";
    case Method::kPenalizedLda: return "plda";
    case Method::kLinearSvm: return "svm";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "lda") return Method::kFisherLda;
  if (name == "plda") return Method::kPenalizedLda;
  if (name == "svm") return Method::kLinearSvm;
  throw Error(Errc::kInvalidArgument, "unknown classifier '" + name + "' (lda, plda, svm)");
}

std::string parameter_name(Method method) {
  switch (method) {
    case Method::kFisherLda: return "shrinkage";
    case Method::kPenalizedLda: return "alpha";
    case Method::kLinearSvm: return "C";
  }
  return "parameter";
}

std::vector<double> default_grid(Method method) {
  switch (method) {
    case Method::kFisherLda: return {kDefaultShrinkage};
    case Method::kPenalizedLda: return {0.0, 0.01, 0.1, 1.0, 10.0};
    case Method::kLinearSvm: return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  }
  return {};
}

std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels, int folds,
                                                       std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (folds < 2) throw Error(Errc::kInvalidArgument, "need at least two folds");
  if (static_cast<std::size_t>(folds) > n) {
    throw Error(Errc::kTooFewSamples, std::to_string(folds) + " folds for " + std::to_string(n) +
                                          " samples");
  }
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  if (static_cast<std::size_t>(folds) == n) {
    for (std::size_t i = 0; i < n; ++i) out[i].push_back(i);
    return out;
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, rows] : by_class) {
    if (rows.size() < static_cast<std::size_t>(folds)) {
      throw Error(Errc::kTooFewSamples, "class " + std::to_string(label) + " has " +
                                            std::to_string(rows.size()) + " samples for " +
                                            std::to_string(folds) + " folds");
    }
  }
  std::mt19937_64 rng(seed);
  std::size_t next = 0;
  for (auto& [label, rows] : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t r : rows) {
      out[next].push_back(r);
      next = (next + 1) % out.size();
    }
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

FoldResult evaluate_fold(const LabeledDataset& data, Method method,
                         std::span<const std::size_t> train, std::span<const std::size_t> test,
                         const std::vector<double>& grid, std::uint64_t seed) {
  if (train.empty()) throw Error(Errc::kTooFewSamples, "empty training set");
  std::vector<double> values = grid.empty() ? default_grid(method) : grid;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  const LabeledDataset training = data.subset(train);
  double chosen = values.front();
  if (method != Method::kFisherLda && values.size() > 1) {
    std::size_t smallest = training.size();
    for (const auto& [label, count] : class_counts(training.labels)) smallest = std::min(smallest, count);
    const int inner = static_cast<int>(std::min<std::size_t>(kInnerFolds, smallest));
    if (inner < 2) {
      throw Error(Errc::kTooFewSamples, "a class has fewer than two training samples");
    }
    const auto inner_folds = stratified_folds(training.labels, inner, seed);
    std::vector<double> mean_error(values.size(), 0.0);
    for (const auto& validation : inner_folds) {
      std::vector<std::size_t> fit_rows;
      for (std::size_t i = 0; i < static_cast<std::size_t>(training.size()); ++i) {
        if (!std::binary_search(validation.begin(), validation.end(), i)) fit_rows.push_back(i);
      }
      const LabeledDataset fit_set = training.subset(fit_rows);
      const LabeledDataset check_set = training.subset(validation);
      for (std::size_t p = 0; p < values.size(); ++p) {
        mean_error[p] += Classifier::fit(method, fit_set, values[p]).error_rate(check_set);
      }
    }
    // Ties keep the smallest parameter.
    std::size_t best = 0;
    for (std::size_t p = 1; p < values.size(); ++p) {
      if (mean_error[p] < mean_error[best] - 1e-12) best = p;
    }
    chosen = values[best];
  }

  FoldResult out{Classifier::fit(method, training, chosen), chosen, 0.0, 0.0, {}};
  out.train_error = out.model.error_rate(training);
  const LabeledDataset testing = data.subset(test);
  out.predictions = out.model.predict_all(testing.features);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < test.size(); ++i) wrong += out.predictions[i] != testing.labels[i];
  out.test_error = test.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(test.size());
  return out;
}

CvReport cross_validate(const LabeledDataset& data, Method method, const CvOptions& options) {
  data.validate();
  const auto folds = stratified_folds(data.labels, options.folds, options.seed);
  const std::size_t k = folds.size();
  const std::size_t n = static_cast<std::size_t>(data.size());

  std::vector<std::optional<FoldResult>> results(k);
  std::vector<std::exception_ptr> failures(k);
  auto run = [&](std::size_t f) {
    try {
      std::vector<std::size_t> train;
      train.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::binary_search(folds[f].begin(), folds[f].end(), i)) train.push_back(i);
      }
      results[f] = evaluate_fold(data, method, train, folds[f], options.grid, mix(options.seed, f));
    } catch (...) {
      failures[f] = std::current_exception();
    }
  };

  const std::size_t threads =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.threads, 1)), 1, k);
  if (threads == 1) {
    for (std::size_t f = 0; f < k; ++f) run(f);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t f = t; f < k; f += threads) run(f);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : failures) {
    if (e) std::rethrow_exception(e);
  }

  CvReport report;
  report.method = method;
  std::vector<int> truth, predicted;
  for (std::size_t f = 0; f < k; ++f) {
    const FoldResult& r = *results[f];
    report.per_fold_errors.push_back(r.test_error);
    report.per_fold_train_errors.push_back(r.train_error);
    report.chosen_params.push_back(r.parameter);
    report.mean_test_error += r.test_error / static_cast<double>(k);
    report.mean_train_error += r.train_error / static_cast<double>(k);
    for (std::size_t i = 0; i < folds[f].size(); ++i) {
      truth.push_back(data.labels[folds[f][i]]);
      predicted.push_back(r.predictions[i]);
    }
  }
  report.kappa = cohen_kappa(truth, predicted);
  return report;
}

std::string CvReport::to_table() const {
  std::ostringstream s;
  const std::string param = parameter_name(method);
  s << "method " << method_name(method) << ", " << folds() << " folds\n";
  s << "fold  train_error  test_error  " << param << "\n";
  char line[128];
  for (std::size_t f = 0; f < folds(); ++f) {
    std::snprintf(line, sizeof line, "%4zu  %11.4f  %10.4f  %g\n", f + 1, per_fold_train_errors[f],
                  per_fold_errors[f], chosen_params[f]);
    s << line;
  }
  std::snprintf(line, sizeof line, "mean  %11.4f  %10.4f\nkappa %.4f\n", mean_train_error,
                mean_test_error, kappa);
  s << line;
  return s.str();
}

std::string CvReport::to_csv() const {
  std::ostringstream s;
  s << "fold,train_error,test_error,params\n";
  for (std::size_t f = 0; f < folds(); ++f) {
    s << f + 1 << ',' << format_number(per_fold_train_errors[f]) << ','
      << format_number(per_fold_errors[f]) << ',' << parameter_name(method) << '='
      << format_number(chosen_params[f]) << '\n';
  }
  return s.str();
}

Eigen::MatrixXd project_2d(const LabeledDataset& data, std::span<const std::size_t> train,
                           double alpha) {
  if (train.empty()) throw Error(Errc::kEmptyInput, "training index set is empty");
  const PldaModel model = fit_penalized_lda(data.subset(train), alpha, 2);
  return model.embed(data.features);
}

}  // namespace cdtkit
