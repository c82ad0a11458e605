#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cdtkit/classify.hpp"
#include "cdtkit/error.hpp"

namespace cdtkit {

namespace {

constexpr double kTau = 1e-12;

// SMO with second-order working set selection on the dual
//   min 0.5 a'Qa - e'a,  0 <= a <= C,  y'a = 0,  Q_ij = y_i y_j x_i.x_j.
class SmoSolver {
 public:
  SmoSolver(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double c)
      : y_(y), c_(c), n_(x.rows()) {
    const Eigen::MatrixXd gram = x * x.transpose();
    q_ = (y * y.transpose()).cwiseProduct(gram);
    alpha_ = Eigen::VectorXd::Zero(n_);
    grad_ = -Eigen::VectorXd::Ones(n_);
  }

  // Iterates until the maximal KKT violation drops below eps. Returns the
  // number of updates performed.
  long run(double eps, long budget) {
    long iter = 0;
    while (iter < budget) {
      Eigen::Index i = -1, j = -1;
      if (!select(eps, i, j)) break;
      update(i, j);
      ++iter;
    }
    return iter;
  }

  double rho() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    int free = 0;
    for (Eigen::Index t = 0; t < n_; ++t) {
      const double yg = y_(t) * grad_(t);
      if (upper(t)) {
        if (y_(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (lower(t)) {
        if (y_(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++free;
        sum += yg;
      }
    }
    return free > 0 ? sum / free : 0.5 * (ub + lb);
  }

  const Eigen::VectorXd& alpha() const { return alpha_; }

  // Active-set refinement: solve the equality-constrained problem on the
  // free variables and move towards it as far as the box allows, fixing the
  // first variable that hits a bound, until a full step is taken.
  void polish(int rounds) {
    for (int round = 0; round < rounds; ++round) {
      std::vector<Eigen::Index> free;
      for (Eigen::Index t = 0; t < n_; ++t) {
        if (alpha_(t) > 0.0 && alpha_(t) < c_) free.push_back(t);
      }
      const auto f = static_cast<Eigen::Index>(free.size());
      if (f == 0 || f > 2000) return;
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(f + 1, f + 1);
      Eigen::VectorXd rhs(f + 1);
      Eigen::VectorXd yf(f);
      for (Eigen::Index a = 0; a < f; ++a) {
        const Eigen::Index i = free[static_cast<std::size_t>(a)];
        yf(a) = y_(i);
        for (Eigen::Index b = 0; b < f; ++b) kkt(a, b) = q_(i, free[static_cast<std::size_t>(b)]);
        kkt(a, f) = y_(i);
        kkt(f, a) = y_(i);
        rhs(a) = -grad_(i);
      }
      Eigen::VectorXd alpha_f(f);
      for (Eigen::Index a = 0; a < f; ++a) alpha_f(a) = alpha_(free[static_cast<std::size_t>(a)]);
      // Newton system for the step d: Q_FF d + y_F b = -G_F, y_F'd = 0.
      rhs(f) = 0.0;
      const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
      Eigen::VectorXd d = sol.head(f);
      d -= (yf.dot(d) / static_cast<double>(f)) * yf;

      double slope = 0.0;
      for (Eigen::Index a = 0; a < f; ++a) slope += grad_(free[static_cast<std::size_t>(a)]) * d(a);
      if (!(slope < 0.0)) return;
      const double curvature = d.dot(kkt.topLeftCorner(f, f) * d);
      double t_max = std::numeric_limits<double>::infinity();
      Eigen::Index blocking = -1;
      for (Eigen::Index a = 0; a < f; ++a) {
        double limit = std::numeric_limits<double>::infinity();
        if (d(a) > 0.0) limit = (c_ - alpha_f(a)) / d(a);
        if (d(a) < 0.0) limit = -alpha_f(a) / d(a);
        if (limit < t_max) {
          t_max = limit;
          blocking = a;
        }
      }
      double t = curvature > 0.0 ? -slope / curvature : t_max;
      const bool blocked = t >= t_max;
      t = std::min(t, t_max);
      if (!std::isfinite(t) || t <= 0.0) return;
      for (Eigen::Index a = 0; a < f; ++a) {
        const Eigen::Index i = free[static_cast<std::size_t>(a)];
        const double next = std::clamp(alpha_f(a) + t * d(a), 0.0, c_);
        grad_ += q_.col(i) * (next - alpha_(i));
        alpha_(i) = next;
      }
      if (blocked && blocking >= 0) {
        const Eigen::Index i = free[static_cast<std::size_t>(blocking)];
        const double snapped = d(blocking) > 0.0 ? c_ : 0.0;
        grad_ += q_.col(i) * (snapped - alpha_(i));
        alpha_(i) = snapped;
      } else {
        return;
      }
    }
  }

 private:
  bool upper(Eigen::Index t) const { return alpha_(t) >= c_; }
  bool lower(Eigen::Index t) const { return alpha_(t) <= 0.0; }
  bool in_up(Eigen::Index t) const { return y_(t) > 0 ? !upper(t) : !lower(t); }
  bool in_low(Eigen::Index t) const { return y_(t) > 0 ? !lower(t) : !upper(t); }

  bool select(double eps, Eigen::Index& out_i, Eigen::Index& out_j) const {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n_; ++t) {
      if (in_up(t) && -y_(t) * grad_(t) >= gmax) {
        gmax = -y_(t) * grad_(t);
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < n_; ++t) {
      if (!in_low(t)) continue;
      const double yg = y_(t) * grad_(t);
      gmax2 = std::max(gmax2, yg);
      if (i < 0) continue;
      const double diff = gmax + yg;
      if (diff > 0.0) {
        double quad = q_(i, i) + q_(t, t) - 2.0 * y_(i) * y_(t) * q_(i, t);
        if (quad <= 0.0) quad = kTau;
        const double obj = -(diff * diff) / quad;
        if (obj <= best) {
          best = obj;
          j = t;
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < eps) return false;
    out_i = i;
    out_j = j;
    return true;
  }

  void update(Eigen::Index i, Eigen::Index j) {
    const double old_i = alpha_(i);
    const double old_j = alpha_(j);
    if (y_(i) != y_(j)) {
      double quad = q_(i, i) + q_(j, j) + 2.0 * q_(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad_(i) - grad_(j)) / quad;
      const double diff = alpha_(i) - alpha_(j);
      alpha_(i) += delta;
      alpha_(j) += delta;
      if (diff > 0.0) {
        if (alpha_(j) < 0.0) { alpha_(j) = 0.0; alpha_(i) = diff; }
      } else {
        if (alpha_(i) < 0.0) { alpha_(i) = 0.0; alpha_(j) = -diff; }
      }
      if (diff > 0.0) {
        if (alpha_(i) > c_) { alpha_(i) = c_; alpha_(j) = c_ - diff; }
      } else {
        if (alpha_(j) > c_) { alpha_(j) = c_; alpha_(i) = c_ + diff; }
      }
    } else {
      double quad = q_(i, i) + q_(j, j) - 2.0 * q_(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad_(i) - grad_(j)) / quad;
      const double sum = alpha_(i) + alpha_(j);
      alpha_(i) -= delta;
      alpha_(j) += delta;
      if (sum > c_) {
        if (alpha_(i) > c_) { alpha_(i) = c_; alpha_(j) = sum - c_; }
      } else {
        if (alpha_(j) < 0.0) { alpha_(j) = 0.0; alpha_(i) = sum; }
      }
      if (sum > c_) {
        if (alpha_(j) > c_) { alpha_(j) = c_; alpha_(i) = sum - c_; }
      } else {
        if (alpha_(i) < 0.0) { alpha_(i) = 0.0; alpha_(j) = sum; }
      }
    }
    const double di = alpha_(i) - old_i;
    const double dj = alpha_(j) - old_j;
    grad_ += q_.col(i) * di + q_.col(j) * dj;
  }

  Eigen::VectorXd y_;
  double c_;
  Eigen::Index n_;
  Eigen::MatrixXd q_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd grad_;
};

double hinge_sum(const Eigen::VectorXd& scores, const Eigen::VectorXd& y, double b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    total += std::max(0.0, 1.0 - y(i) * (scores(i) - b));
  }
  return total;
}

// Exact minimizer of the convex piecewise-linear hinge sum over b; the
// optimum sits on one of the breakpoints s_i - y_i.
double best_bias(const Eigen::VectorXd& scores, const Eigen::VectorXd& y, double start) {
  double b = start;
  double value = hinge_sum(scores, y, b);
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double candidate = scores(i) - y(i);
    const double v = hinge_sum(scores, y, candidate);
    if (v < value) {
      value = v;
      b = candidate;
    }
  }
  return b;
}

}  // namespace

LinearClassifier fit_linear_svm(const LabeledDataset& data, double c, const SvmOptions& options) {
  return fit_linear_svm(data, c, options, nullptr);
}

LinearClassifier fit_linear_svm(const LabeledDataset& data, double c, const SvmOptions& options,
                                SvmDiagnostics* diagnostics) {
  data.validate();
  const auto classes = data.classes();
  if (classes.size() != 2) {
    throw Error(Errc::kInvalidArgument,
                "svm needs exactly two classes, got " + std::to_string(classes.size()));
  }
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(Errc::kInvalidArgument, "C must be positive");

  const Eigen::Index n = data.size();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = data.labels[static_cast<std::size_t>(i)] == classes[1] ? 1.0 : -1.0;
  }

  SmoSolver solver(data.features, y, c);
  double eps = 1e-3;
  long iterations = 0;
  LinearClassifier out;
  out.negative_label = classes[0];
  out.positive_label = classes[1];
  while (true) {
    // SMO alone crawls on ill-conditioned Gram matrices; interleave it with
    // active-set steps.
    const long chunk = 100 * static_cast<long>(n) + 1000;
    while (iterations < options.max_iterations) {
      const long done = solver.run(eps, std::min(chunk, options.max_iterations - iterations));
      iterations += done;
      solver.polish(50);
      if (done < chunk) break;
    }
    const Eigen::VectorXd ya = solver.alpha().cwiseProduct(y);
    out.weights = data.features.transpose() * ya;
    const double half_norm = 0.5 * out.weights.squaredNorm();
    const Eigen::VectorXd scores = data.features * out.weights;
    out.bias = best_bias(scores, y, solver.rho());
    const double primal = half_norm + c * hinge_sum(scores, y, out.bias);
    const double dual = solver.alpha().sum() - half_norm;
    if (diagnostics) {
      diagnostics->primal = primal;
      diagnostics->dual = dual;
      diagnostics->iterations = iterations;
    }
    if (primal - dual <= options.gap_tolerance * std::max(primal, 1e-300)) break;
    if (iterations >= options.max_iterations || eps < 1e-14) {
      throw Error(Errc::kNotConverged, "svm duality gap " + std::to_string(primal - dual) +
                                           " above tolerance after " +
                                           std::to_string(iterations) + " iterations");
    }
    eps /= 10.0;
  }
  if (!(out.weights.squaredNorm() > 0.0)) {
    throw Error(Errc::kNotConverged, "svm returned a zero weight vector");
  }
  return out;
}

}  // namespace cdtkit
