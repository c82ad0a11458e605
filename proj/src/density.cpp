#include "cdtkit/density.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cdtkit/error.hpp"

namespace cdtkit {

namespace {

void require_grid(double grid_start, double spacing) {
  if (!std::isfinite(grid_start) || !std::isfinite(spacing)) {
    throw Error(Errc::kNonFinite, "grid start and spacing must be finite");
  }
  if (spacing <= 0.0) {
    throw Error(Errc::kInvalidArgument, "spacing must be positive");
  }
}

}  // namespace

DiscreteDensity DiscreteDensity::from_samples(std::span<const double> raw, double grid_start,
                                              double spacing, double epsilon_floor) {
  require_grid(grid_start, spacing);
  if (raw.size() < 2) {
    throw Error(Errc::kInvalidArgument, "a density needs at least 2 samples, got " +
                                            std::to_string(raw.size()));
  }
  if (!std::isfinite(epsilon_floor) || epsilon_floor < 0.0) {
    throw Error(Errc::kInvalidArgument, "epsilon floor must be a finite nonnegative number");
  }
  std::vector<double> values(raw.size());
  double total = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) {
      throw Error(Errc::kNonFinite, "sample " + std::to_string(i) + " is not finite");
    }
    values[i] = std::max(raw[i], 0.0) + epsilon_floor;
    total += values[i];
  }
  if (total <= 0.0) {
    throw Error(Errc::kAllZero, "no strictly positive sample and no epsilon floor");
  }
  const double scale = 1.0 / (total * spacing);
  for (double& v : values) v *= scale;
  return DiscreteDensity(std::move(values), grid_start, spacing);
}

DiscreteDensity DiscreteDensity::from_cdf(const std::function<double(double)>& cdf,
                                          double lower, double upper, std::size_t bins,
                                          double epsilon_floor) {
  if (!(upper > lower)) {
    throw Error(Errc::kInvalidArgument, "empty interval for density discretization");
  }
  if (bins < 2) {
    throw Error(Errc::kInvalidArgument, "a density needs at least 2 bins");
  }
  const double spacing = (upper - lower) / static_cast<double>(bins);
  std::vector<double> raw(bins);
  double left = cdf(lower);
  for (std::size_t i = 0; i < bins; ++i) {
    const double edge = i + 1 == bins ? upper : lower + spacing * static_cast<double>(i + 1);
    const double right = cdf(edge);
    raw[i] = (right - left) / spacing;
    left = right;
  }
  return from_samples(raw, lower + 0.5 * spacing, spacing, epsilon_floor);
}

double DiscreteDensity::evaluate(double x) const {
  const double lo = lower();
  const double hi = upper();
  if (!(x >= lo && x <= hi)) {
    throw Error(Errc::kOutOfDomain, "x = " + std::to_string(x) + " outside [" +
                                        std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  const auto n = values_.size();
  auto i = static_cast<std::size_t>(std::floor((x - lo) / spacing_));
  return values_[std::min(i, n - 1)];
}

double l1_distance(const DiscreteDensity& a, const DiscreteDensity& b) {
  if (a.size() != b.size() || std::abs(a.spacing_ - b.spacing_) > 1e-12 * a.spacing_ ||
      std::abs(a.grid_start_ - b.grid_start_) > 1e-9 * a.spacing_) {
    throw Error(Errc::kDimensionMismatch, "densities live on different grids");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a.values_[i] - b.values_[i]);
  return sum * a.spacing_;
}

Cdf::Cdf(std::vector<double> breakpoints, std::vector<double> cumulative)
    : breakpoints_(std::move(breakpoints)), cumulative_(std::move(cumulative)) {
  if (breakpoints_.size() < 2 || breakpoints_.size() != cumulative_.size()) {
    throw Error(Errc::kInvalidArgument, "cdf needs matching breakpoints and levels (>= 2)");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw Error(Errc::kInvalidArgument, "cdf breakpoints must be strictly increasing");
    }
    if (cumulative_[i] < cumulative_[i - 1]) {
      throw Error(Errc::kNonMonotone, "cdf levels must be nondecreasing");
    }
  }
  if (std::abs(cumulative_.front()) > 1e-12 || std::abs(cumulative_.back() - 1.0) > 1e-12) {
    throw Error(Errc::kInvalidArgument, "cdf must run from 0 to 1");
  }
  cumulative_.front() = 0.0;
  cumulative_.back() = 1.0;
}

double Cdf::operator()(double x) const {
  if (x <= breakpoints_.front()) return 0.0;
  if (x >= breakpoints_.back()) return 1.0;
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  const auto j = static_cast<std::size_t>(it - breakpoints_.begin());
  const double t = (x - breakpoints_[j - 1]) / (breakpoints_[j] - breakpoints_[j - 1]);
  return cumulative_[j - 1] + t * (cumulative_[j] - cumulative_[j - 1]);
}

double Cdf::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw Error(Errc::kOutOfRange, "quantile level " + std::to_string(u) + " outside [0, 1]");
  }
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto j = static_cast<std::size_t>(it - cumulative_.begin());
  if (j == 0) return breakpoints_.front();
  const double t = (u - cumulative_[j - 1]) / (cumulative_[j] - cumulative_[j - 1]);
  return breakpoints_[j - 1] + t * (breakpoints_[j] - breakpoints_[j - 1]);
}

void Cdf::evaluate_sorted(std::span<const double> xs, std::span<double> out) const {
  if (xs.size() != out.size()) {
    throw Error(Errc::kDimensionMismatch, "output size differs from input size");
  }
  const std::size_t last = breakpoints_.size() - 1;
  std::size_t seg = 0;  // breakpoints_[seg] <= x < breakpoints_[seg + 1]
  double prev = -INFINITY;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double x = xs[k];
    if (x < prev) throw Error(Errc::kInvalidArgument, "points must be nondecreasing");
    prev = x;
    if (x <= breakpoints_.front()) {
      out[k] = 0.0;
      continue;
    }
    if (x >= breakpoints_.back()) {
      out[k] = 1.0;
      continue;
    }
    while (seg + 1 < last && breakpoints_[seg + 1] <= x) ++seg;
    const double t = (x - breakpoints_[seg]) / (breakpoints_[seg + 1] - breakpoints_[seg]);
    out[k] = cumulative_[seg] + t * (cumulative_[seg + 1] - cumulative_[seg]);
  }
}

void Cdf::quantile_sorted(std::span<const double> us, std::span<double> out) const {
  if (us.size() != out.size()) {
    throw Error(Errc::kDimensionMismatch, "output size differs from input size");
  }
  std::size_t j = 0;  // first index with cumulative_[j] >= u
  double prev = 0.0;
  for (std::size_t k = 0; k < us.size(); ++k) {
    const double u = us[k];
    if (!(u >= 0.0 && u <= 1.0)) {
      throw Error(Errc::kOutOfRange, "quantile level " + std::to_string(u) + " outside [0, 1]");
    }
    if (u < prev) throw Error(Errc::kInvalidArgument, "levels must be nondecreasing");
    prev = u;
    while (cumulative_[j] < u) ++j;
    if (j == 0) {
      out[k] = breakpoints_.front();
      continue;
    }
    const double t = (u - cumulative_[j - 1]) / (cumulative_[j] - cumulative_[j - 1]);
    out[k] = breakpoints_[j - 1] + t * (breakpoints_[j] - breakpoints_[j - 1]);
  }
}

Cdf cdf(const DiscreteDensity& d) {
  const std::size_t n = d.size();
  std::vector<double> edges(n + 1);
  std::vector<double> levels(n + 1);
  const double lo = d.lower();
  levels[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    edges[i] = lo + d.spacing() * static_cast<double>(i);
    levels[i + 1] = levels[i] + d.mass(i);
  }
  edges[n] = d.upper();
  const double total = levels[n];
  for (double& v : levels) v /= total;
  levels[n] = 1.0;
  return Cdf(std::move(edges), std::move(levels));
}

double quantile(const Cdf& c, double u) { return c.quantile(u); }

}  // namespace cdtkit
