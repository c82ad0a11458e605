#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cdtkit/density.hpp"

namespace cdtkit {

/// Strictly increasing piecewise-linear map through (knots_x[i], knots_y[i]).
/// Evaluation outside the knot span is an error; the inverse swaps the roles
/// of the two knot sequences.
class MonotoneMap {
 public:
  MonotoneMap(std::vector<double> knots_x, std::vector<double> knots_y);

  /// Samples a strictly increasing function at `knots` evenly spaced points.
  static MonotoneMap tabulate(const std::function<double(double)>& fn, double lower,
                              double upper, std::size_t knots);
  static MonotoneMap identity(double lower, double upper);

  double operator()(double x) const;
  /// Slope of the segment containing x; at an interior knot, the slope of the
  /// segment to its left.
  double slope(double x) const;
  MonotoneMap inverse() const { return MonotoneMap(knots_y_, knots_x_); }

  double domain_lower() const { return knots_x_.front(); }
  double domain_upper() const { return knots_x_.back(); }
  double range_lower() const { return knots_y_.front(); }
  double range_upper() const { return knots_y_.back(); }
  std::span<const double> knots_x() const { return knots_x_; }
  std::span<const double> knots_y() const { return knots_y_; }

 private:
  std::size_t segment(double x) const;

  std::vector<double> knots_x_;
  std::vector<double> knots_y_;
};

/// Strictly positive reference density I0 the transform is taken against.
class ReferenceDensity {
 public:
  /// I0(x) = 1 on [0, 1].
  static ReferenceDensity uniform();
  explicit ReferenceDensity(DiscreteDensity density);

  const DiscreteDensity& density() const { return density_; }
  const Cdf& cdf() const { return cdf_; }
  bool is_uniform() const { return uniform_; }
  double lower() const { return density_.lower(); }
  double upper() const { return density_.upper(); }

  friend bool operator==(const ReferenceDensity& a, const ReferenceDensity& b);

 private:
  DiscreteDensity density_;
  Cdf cdf_;
  bool uniform_ = false;
};

/// The M evaluation points of a transform: midpoints of M equal cells over
/// the reference domain, with sqrt(I0) cached at each point.
class CdtGrid {
 public:
  CdtGrid(ReferenceDensity reference, std::size_t points);

  const ReferenceDensity& reference() const { return reference_; }
  std::span<const double> points() const { return points_; }
  std::span<const double> sqrt_reference() const { return sqrt_ref_; }
  /// J0(x_k), nondecreasing.
  std::span<const double> reference_levels() const { return ref_cdf_; }
  /// Quadrature weight of each point (the cell width).
  double weight() const { return weight_; }
  std::size_t size() const { return points_.size(); }

  friend bool operator==(const CdtGrid& a, const CdtGrid& b);

 private:
  ReferenceDensity reference_;
  std::vector<double> points_;
  std::vector<double> sqrt_ref_;
  std::vector<double> ref_cdf_;
  double weight_ = 0.0;
};

using GridPtr = std::shared_ptr<const CdtGrid>;

GridPtr make_grid(ReferenceDensity reference, std::size_t points);

/// Transform values (f(x_k) - x_k) * sqrt(I0(x_k)) on a CdtGrid. `support`
/// holds f at the two ends of the reference domain when known.
class CdtSignal {
 public:
  CdtSignal(std::vector<double> values, GridPtr grid,
            std::optional<std::pair<double, double>> support = std::nullopt);

  std::span<const double> values() const { return values_; }
  const CdtGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::optional<std::pair<double, double>>& support() const { return support_; }

  /// f(x_k) = values[k] / sqrt(I0(x_k)) + x_k.
  std::vector<double> transport_map() const;

  /// Throws NonMonotone when the recovered map decreases by more than `tol`.
  void check_monotone(double tol = 1e-9) const;

 private:
  std::vector<double> values_;
  GridPtr grid_;
  std::optional<std::pair<double, double>> support_;
};

/// Builds a signal from transport-map samples f(x_k).
CdtSignal from_transport_map(std::span<const double> map_values, GridPtr grid,
                             std::optional<std::pair<double, double>> support = std::nullopt);

/// Forward transform. Runs in O(N + M) with one sweep over each CDF.
CdtSignal forward(const DiscreteDensity& signal, const GridPtr& grid);
CdtSignal forward(const DiscreteDensity& signal, const ReferenceDensity& reference,
                  std::size_t points);

/// Output bins for the inverse transform: `count` cells of width `spacing`
/// centred at grid_start + i * spacing.
struct OutputGrid {
  double grid_start = 0.0;
  double spacing = 1.0;
  std::size_t count = 0;

  /// `count` bins spanning [lower, upper].
  static OutputGrid spanning(double lower, double upper, std::size_t count);
};

/// Inverse transform. Bin masses are J0(f^-1(b)) - J0(f^-1(a)) for each output
/// cell [a, b], i.e. the exact cell integral of (f^-1)' * I0(f^-1) for the
/// piecewise-linear map; the result is renormalized to unit mass.
DiscreteDensity inverse(const CdtSignal& t, const OutputGrid& out);
/// Inverse onto `bins` cells spanning the map's range.
DiscreteDensity inverse(const CdtSignal& t, std::size_t bins);

/// The piecewise-linear transport map with end knots at the reference domain
/// bounds (taken from the support, else linearly extrapolated).
std::vector<std::pair<double, double>> map_knots(const CdtSignal& t);

CdtSignal translate_oracle(const CdtSignal& t, double mu);
CdtSignal scale_oracle(const CdtSignal& t, double a);
CdtSignal compose_oracle(const CdtSignal& t, const MonotoneMap& g_inv);

double transport_norm(const CdtSignal& t);
double transport_distance(const CdtSignal& t1, const CdtSignal& t2);

}  // namespace cdtkit
