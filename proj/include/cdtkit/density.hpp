#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace cdtkit {

inline constexpr double kDefaultEpsilonFloor = 1e-8;

/// A 1-D probability density sampled on a uniform grid and interpolated with
/// the degree-zero B-spline: bin i covers [x_i - r/2, x_i + r/2] and carries
/// the constant value c_i. Values are nonnegative and sum(c_i) * r == 1.
class DiscreteDensity {
 public:
  /// Clips negative samples to zero, adds `epsilon_floor` to every bin and
  /// renormalizes to unit mass.
  static DiscreteDensity from_samples(std::span<const double> raw, double grid_start,
                                      double spacing,
                                      double epsilon_floor = kDefaultEpsilonFloor);

  /// Bin values are the exact cell averages of a continuous distribution
  /// given by its CDF, over `bins` equal cells of [lower, upper].
  static DiscreteDensity from_cdf(const std::function<double(double)>& cdf, double lower,
                                  double upper, std::size_t bins,
                                  double epsilon_floor = kDefaultEpsilonFloor);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double grid_start() const { return grid_start_; }
  double spacing() const { return spacing_; }

  double center(std::size_t i) const { return grid_start_ + spacing_ * static_cast<double>(i); }
  double lower() const { return grid_start_ - 0.5 * spacing_; }
  double upper() const { return center(values_.size() - 1) + 0.5 * spacing_; }

  /// Value of the bin holding x. A point on the boundary between two bins
  /// belongs to the right bin; the upper domain end belongs to the last bin.
  double evaluate(double x) const;

  /// Probability mass of bin i.
  double mass(std::size_t i) const { return values_[i] * spacing_; }

  /// L1 distance between two densities on the same grid.
  friend double l1_distance(const DiscreteDensity& a, const DiscreteDensity& b);

 private:
  DiscreteDensity(std::vector<double> values, double grid_start, double spacing)
      : values_(std::move(values)), grid_start_(grid_start), spacing_(spacing) {}

  std::vector<double> values_;
  double grid_start_ = 0.0;
  double spacing_ = 1.0;
};

double l1_distance(const DiscreteDensity& a, const DiscreteDensity& b);

/// Exact, piecewise-linear cumulative distribution of a DiscreteDensity.
class Cdf {
 public:
  Cdf(std::vector<double> breakpoints, std::vector<double> cumulative);

  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const double> cumulative() const { return cumulative_; }
  double lower() const { return breakpoints_.front(); }
  double upper() const { return breakpoints_.back(); }

  /// 0 left of the domain, 1 right of it.
  double operator()(double x) const;

  /// Generalized inverse inf{x : F(x) >= u}. On a zero-density plateau this is
  /// the plateau's left endpoint.
  double quantile(double u) const;

  /// Evaluates the CDF at nondecreasing points in one pass over the segments.
  void evaluate_sorted(std::span<const double> xs, std::span<double> out) const;
  /// Quantiles of nondecreasing levels in one pass over the segments.
  void quantile_sorted(std::span<const double> us, std::span<double> out) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> cumulative_;
};

Cdf cdf(const DiscreteDensity& d);

double quantile(const Cdf& c, double u);

}  // namespace cdtkit
