#include "cdtkit/cdt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cdtkit/error.hpp"

namespace cdtkit {

namespace {

void require_strictly_increasing(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(Errc::kNonFinite, std::string(what) + " contains a non-finite value");
    }
    if (i > 0 && !(v[i] > v[i - 1])) {
      throw Error(Errc::kNonMonotone, std::string(what) + " must be strictly increasing (index " +
                                          std::to_string(i) + ")");
    }
  }
}

bool constant_values(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

// --- MonotoneMap ------------------------------------------------------------

MonotoneMap::MonotoneMap(std::vector<double> knots_x, std::vector<double> knots_y)
    : knots_x_(std::move(knots_x)), knots_y_(std::move(knots_y)) {
  if (knots_x_.size() < 2 || knots_x_.size() != knots_y_.size()) {
    throw Error(Errc::kInvalidArgument, "monotone map needs two equal-length knot sequences (>= 2)");
  }
  require_strictly_increasing(knots_x_, "knots_x");
  require_strictly_increasing(knots_y_, "knots_y");
}

MonotoneMap MonotoneMap::tabulate(const std::function<double(double)>& fn, double lower,
                                  double upper, std::size_t knots) {
  if (knots < 2 || !(upper > lower)) {
    throw Error(Errc::kInvalidArgument, "tabulation needs a nonempty interval and >= 2 knots");
  }
  std::vector<double> xs(knots);
  std::vector<double> ys(knots);
  const double step = (upper - lower) / static_cast<double>(knots - 1);
  for (std::size_t i = 0; i < knots; ++i) {
    xs[i] = i + 1 == knots ? upper : lower + step * static_cast<double>(i);
    ys[i] = fn(xs[i]);
  }
  return MonotoneMap(std::move(xs), std::move(ys));
}

MonotoneMap MonotoneMap::identity(double lower, double upper) {
  return MonotoneMap({lower, upper}, {lower, upper});
}

std::size_t MonotoneMap::segment(double x) const {
  const double span = knots_x_.back() - knots_x_.front();
  const double tol = 1e-12 * std::max(span, 1.0);
  if (!(x >= knots_x_.front() - tol && x <= knots_x_.back() + tol)) {
    throw Error(Errc::kOutOfRange, "x = " + std::to_string(x) + " outside map domain [" +
                                       std::to_string(knots_x_.front()) + ", " +
                                       std::to_string(knots_x_.back()) + "]");
  }
  const auto it = std::lower_bound(knots_x_.begin(), knots_x_.end(), x);
  const auto j = static_cast<std::size_t>(it - knots_x_.begin());
  return std::min(j == 0 ? 0 : j - 1, knots_x_.size() - 2);
}

double MonotoneMap::operator()(double x) const {
  const std::size_t s = segment(x);
  const double t = (x - knots_x_[s]) / (knots_x_[s + 1] - knots_x_[s]);
  return knots_y_[s] + t * (knots_y_[s + 1] - knots_y_[s]);
}

double MonotoneMap::slope(double x) const {
  const std::size_t s = segment(x);
  return (knots_y_[s + 1] - knots_y_[s]) / (knots_x_[s + 1] - knots_x_[s]);
}

// --- ReferenceDensity / CdtGrid ---------------------------------------------

ReferenceDensity ReferenceDensity::uniform() {
  const double ones[] = {1.0, 1.0};
  return ReferenceDensity(DiscreteDensity::from_samples(ones, 0.25, 0.5, 0.0));
}

ReferenceDensity::ReferenceDensity(DiscreteDensity density)
    : density_(std::move(density)), cdf_(cdtkit::cdf(density_)) {
  const auto v = density_.values();
  if (std::any_of(v.begin(), v.end(), [](double x) { return !(x > 0.0); })) {
    throw Error(Errc::kInvalidArgument, "reference density must be strictly positive");
  }
  uniform_ = constant_values(v);
}

bool operator==(const ReferenceDensity& a, const ReferenceDensity& b) {
  if (a.density_.size() != b.density_.size()) return false;
  if (a.density_.grid_start() != b.density_.grid_start()) return false;
  if (a.density_.spacing() != b.density_.spacing()) return false;
  return std::equal(a.density_.values().begin(), a.density_.values().end(),
                    b.density_.values().begin());
}

CdtGrid::CdtGrid(ReferenceDensity reference, std::size_t points)
    : reference_(std::move(reference)) {
  if (points < 2) throw Error(Errc::kInvalidArgument, "transform grid needs at least 2 points");
  const double lo = reference_.lower();
  const double hi = reference_.upper();
  weight_ = (hi - lo) / static_cast<double>(points);
  points_.resize(points);
  sqrt_ref_.resize(points);
  ref_cdf_.resize(points);
  for (std::size_t k = 0; k < points; ++k) {
    points_[k] = lo + (static_cast<double>(k) + 0.5) * weight_;
    sqrt_ref_[k] = std::sqrt(reference_.density().evaluate(points_[k]));
  }
  if (reference_.is_uniform()) {
    for (std::size_t k = 0; k < points; ++k) ref_cdf_[k] = (points_[k] - lo) / (hi - lo);
  } else {
    reference_.cdf().evaluate_sorted(points_, ref_cdf_);
  }
}

bool operator==(const CdtGrid& a, const CdtGrid& b) {
  return a.size() == b.size() && a.reference_ == b.reference_;
}

GridPtr make_grid(ReferenceDensity reference, std::size_t points) {
  return std::make_shared<const CdtGrid>(std::move(reference), points);
}

// --- CdtSignal --------------------------------------------------------------

CdtSignal::CdtSignal(std::vector<double> values, GridPtr grid,
                     std::optional<std::pair<double, double>> support)
    : values_(std::move(values)), grid_(std::move(grid)), support_(support) {
  if (!grid_) throw Error(Errc::kInvalidArgument, "transform signal needs a grid");
  if (values_.size() != grid_->size()) {
    throw Error(Errc::kDimensionMismatch, "transform has " + std::to_string(values_.size()) +
                                              " values for a grid of " +
                                              std::to_string(grid_->size()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw Error(Errc::kNonFinite, "transform value " + std::to_string(k) + " is not finite");
    }
  }
}

std::vector<double> CdtSignal::transport_map() const {
  const auto x = grid_->points();
  const auto s = grid_->sqrt_reference();
  std::vector<double> f(values_.size());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = values_[k] / s[k] + x[k];
  return f;
}

void CdtSignal::check_monotone(double tol) const {
  const auto f = transport_map();
  auto fail = [](std::size_t k, double drop) {
    throw Error(Errc::kNonMonotone, "recovered map decreases by " + std::to_string(drop) +
                                        " at grid index " + std::to_string(k));
  };
  for (std::size_t k = 1; k < f.size(); ++k) {
    if (f[k] < f[k - 1] - tol * std::max(1.0, std::abs(f[k - 1]))) fail(k, f[k - 1] - f[k]);
  }
  if (support_) {
    if (support_->first > f.front() + tol * std::max(1.0, std::abs(f.front()))) {
      fail(0, support_->first - f.front());
    }
    if (support_->second < f.back() - tol * std::max(1.0, std::abs(f.back()))) {
      fail(f.size() - 1, f.back() - support_->second);
    }
  }
}

CdtSignal from_transport_map(std::span<const double> map_values, GridPtr grid,
                             std::optional<std::pair<double, double>> support) {
  if (!grid) throw Error(Errc::kInvalidArgument, "transform signal needs a grid");
  if (map_values.size() != grid->size()) {
    throw Error(Errc::kDimensionMismatch, "map sample count differs from grid size");
  }
  const auto x = grid->points();
  const auto s = grid->sqrt_reference();
  std::vector<double> values(map_values.size());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = (map_values[k] - x[k]) * s[k];
  return CdtSignal(std::move(values), std::move(grid), support);
}

// --- forward / inverse ------------------------------------------------------

CdtSignal forward(const DiscreteDensity& signal, const GridPtr& grid) {
  if (!grid) throw Error(Errc::kInvalidArgument, "forward transform needs a grid");
  const auto levels = grid->reference_levels();
  const auto x = grid->points();
  const auto s = grid->sqrt_reference();
  const auto c = signal.values();
  const double r = signal.spacing();
  const double lo = signal.lower();
  const std::size_t n = c.size();

  double total = 0.0;
  for (double v : c) total += v;

  // Merged sweep: bin i holds cumulative (unnormalized) mass [below, below + c[i]].
  std::vector<double> values(levels.size());
  std::size_t i = 0;
  double below = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double target = levels[k] * total;
    while (i + 1 < n && below + c[i] < target) below += c[i++];
    double f = lo + r * static_cast<double>(i);
    if (c[i] > 0.0) f += r * std::clamp((target - below) / c[i], 0.0, 1.0);
    values[k] = (f - x[k]) * s[k];
  }

  std::size_t last = n;
  while (last > 1 && c[last - 1] == 0.0) --last;
  return CdtSignal(std::move(values), grid,
                   std::pair{lo, lo + r * static_cast<double>(last)});
}

CdtSignal forward(const DiscreteDensity& signal, const ReferenceDensity& reference,
                  std::size_t points) {
  return forward(signal, make_grid(reference, points));
}

OutputGrid OutputGrid::spanning(double lower, double upper, std::size_t count) {
  if (count < 2 || !(upper > lower)) {
    throw Error(Errc::kInvalidArgument, "output grid needs a nonempty interval and >= 2 bins");
  }
  const double spacing = (upper - lower) / static_cast<double>(count);
  return OutputGrid{lower + 0.5 * spacing, spacing, count};
}

std::vector<std::pair<double, double>> map_knots(const CdtSignal& t) {
  const auto x = t.grid().points();
  const auto f = t.transport_map();
  const double lo = t.grid().reference().lower();
  const double hi = t.grid().reference().upper();
  const std::size_t m = f.size();

  std::pair<double, double> ends;
  if (t.support()) {
    ends = *t.support();
  } else {
    const double left_slope = std::max(0.0, (f[1] - f[0]) / (x[1] - x[0]));
    const double right_slope = std::max(0.0, (f[m - 1] - f[m - 2]) / (x[m - 1] - x[m - 2]));
    ends = {f[0] - (x[0] - lo) * left_slope, f[m - 1] + (hi - x[m - 1]) * right_slope};
  }
  std::vector<std::pair<double, double>> knots;
  knots.reserve(m + 2);
  knots.emplace_back(lo, ends.first);
  for (std::size_t k = 0; k < m; ++k) knots.emplace_back(x[k], f[k]);
  knots.emplace_back(hi, ends.second);
  // Absorb sub-tolerance decreases so the knots are nondecreasing in f.
  for (std::size_t k = 1; k < knots.size(); ++k) {
    knots[k].second = std::max(knots[k].second, knots[k - 1].second);
  }
  return knots;
}

DiscreteDensity inverse(const CdtSignal& t, const OutputGrid& out) {
  t.check_monotone();
  if (out.count < 2 || !(out.spacing > 0.0)) {
    throw Error(Errc::kInvalidArgument, "output grid needs >= 2 bins of positive width");
  }
  const auto knots = map_knots(t);
  std::vector<double> fs(knots.size());
  std::transform(knots.begin(), knots.end(), fs.begin(), [](const auto& k) { return k.second; });

  // Right-continuous inverse of the nondecreasing piecewise-linear map. A flat
  // run of the map becomes a jump, i.e. a point mass that lands in one bin.
  auto map_inverse = [&](double y) {
    if (y < fs.front()) return knots.front().first;
    if (y >= fs.back()) return knots.back().first;
    const auto it = std::upper_bound(fs.begin(), fs.end(), y);
    const auto k = static_cast<std::size_t>(it - fs.begin());
    const double t0 = (y - fs[k - 1]) / (fs[k] - fs[k - 1]);
    return knots[k - 1].first + t0 * (knots[k].first - knots[k - 1].first);
  };

  std::vector<double> pre_images(out.count + 1);
  const double first_edge = out.grid_start - 0.5 * out.spacing;
  for (std::size_t i = 0; i <= out.count; ++i) {
    pre_images[i] = map_inverse(first_edge + out.spacing * static_cast<double>(i));
  }
  std::vector<double> levels(pre_images.size());
  t.grid().reference().cdf().evaluate_sorted(pre_images, levels);

  std::vector<double> values(out.count);
  for (std::size_t i = 0; i < out.count; ++i) {
    values[i] = (levels[i + 1] - levels[i]) / out.spacing;
  }
  return DiscreteDensity::from_samples(values, out.grid_start, out.spacing, 0.0);
}

DiscreteDensity inverse(const CdtSignal& t, std::size_t bins) {
  const auto knots = map_knots(t);
  return inverse(t, OutputGrid::spanning(knots.front().second, knots.back().second, bins));
}

// --- property oracles -------------------------------------------------------

CdtSignal translate_oracle(const CdtSignal& t, double mu) {
  const auto s = t.grid().sqrt_reference();
  std::vector<double> values(t.values().begin(), t.values().end());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] += mu * s[k];
  auto support = t.support();
  if (support) support = std::pair{support->first + mu, support->second + mu};
  return CdtSignal(std::move(values), t.grid_ptr(), support);
}

CdtSignal scale_oracle(const CdtSignal& t, double a) {
  if (!(a > 0.0)) {
    throw Error(Errc::kNonPositiveScale, "scale factor must be positive, got " + std::to_string(a));
  }
  const auto x = t.grid().points();
  const auto s = t.grid().sqrt_reference();
  std::vector<double> values(t.values().begin(), t.values().end());
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = (values[k] - x[k] * (a - 1.0) * s[k]) / a;
  }
  auto support = t.support();
  if (support) support = std::pair{support->first / a, support->second / a};
  return CdtSignal(std::move(values), t.grid_ptr(), support);
}

CdtSignal compose_oracle(const CdtSignal& t, const MonotoneMap& g_inv) {
  auto apply = [&](double y) {
    try {
      return g_inv(y);
    } catch (const Error& e) {
      throw Error(Errc::kRangeMismatch, std::string("map value outside g^-1 knot span: ") + e.what());
    }
  };
  auto f = t.transport_map();
  for (double& v : f) v = apply(v);
  auto support = t.support();
  if (support) support = std::pair{apply(support->first), apply(support->second)};
  return from_transport_map(f, t.grid_ptr(), support);
}

double transport_norm(const CdtSignal& t) {
  double sum = 0.0;
  for (double v : t.values()) sum += v * v;
  return std::sqrt(sum * t.grid().weight());
}

double transport_distance(const CdtSignal& t1, const CdtSignal& t2) {
  if (t1.grid_ptr() != t2.grid_ptr() && !(t1.grid() == t2.grid())) {
    throw Error(Errc::kReferenceMismatch, "transforms use different references or grids");
  }
  const auto a = t1.values();
  const auto b = t2.values();
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(sum * t1.grid().weight());
}

}  // namespace cdtkit
