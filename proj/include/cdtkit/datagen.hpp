#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cdtkit/cdt.hpp"
#include "cdtkit/dataset.hpp"
#include "cdtkit/density.hpp"

namespace cdtkit {

/// A strictly increasing confound h with its inverse. For the parametric
/// kinds h(x) = scale * (x - shift).
struct Warp {
  std::function<double(double)> map;
  std::function<double(double)> inverse;
  double scale = 1.0;
  double shift = 0.0;
  int member = -1;  // index into ConfoundFamily::members for custom families

  double operator()(double x) const { return map(x); }
  static Warp affine(double scale, double shift);
};

enum class FamilyKind { kTranslation, kScaling, kAffine, kCustomMonotone };

std::string to_string(FamilyKind kind);
FamilyKind parse_family_kind(const std::string& name);

struct ConfoundFamily {
  FamilyKind kind = FamilyKind::kAffine;
  std::pair<double, double> shift_range{0.0, 0.5};
  std::pair<double, double> scale_range{0.6, 1.67};
  std::vector<Warp> members;  // custom families only
  /// Interval on which closure is checked.
  std::pair<double, double> domain{0.0, 1.0};
  std::uint64_t seed = 0;

  static ConfoundFamily translation(std::pair<double, double> shifts, std::uint64_t seed);
  static ConfoundFamily scaling(std::pair<double, double> scales, std::uint64_t seed);
  static ConfoundFamily affine(std::pair<double, double> shifts, std::pair<double, double> scales,
                               std::uint64_t seed);
  static ConfoundFamily custom(std::vector<Warp> members, std::pair<double, double> domain,
                               std::uint64_t seed);

  /// Draws one confound.
  template <class Rng>
  Warp draw(Rng& rng) const;
};

struct GenerativeSpec {
  DiscreteDensity mother_p;
  DiscreteDensity mother_q;
  ConfoundFamily family;
  std::size_t samples_per_class = 0;
  std::optional<DiscreteDensity> noise;
  /// Floor added to each pushed-forward sample before renormalizing.
  double epsilon_floor = kDefaultEpsilonFloor;

  /// Throws unless the mothers share a grid and differ in L1 by more than
  /// 1e-6, and the noise kernel (if any) has the mothers' spacing.
  void validate() const;
};

struct GeneratedClass {
  std::vector<DiscreteDensity> densities;
  std::vector<Warp> warps;
};

/// Push-forward h' * (mother o h) of a density through one warp, on the
/// mother's grid: bin [e_k, e_k+1] receives J(h(e_k+1)) - J(h(e_k)) with J the
/// mother's CDF. Throws DomainEscape when more than 1e-3 of the mass leaves
/// the grid; otherwise the remainder is renormalized.
DiscreteDensity push_forward(const DiscreteDensity& mother, const Warp& h,
                             double epsilon_floor = kDefaultEpsilonFloor);

/// Linear convolution with a kernel centred on its middle bin, cropped to
/// the signal's grid and renormalized.
DiscreteDensity convolve(const DiscreteDensity& signal, const DiscreteDensity& kernel);

/// Samples `samples_per_class` members of class 0 (mother_p) or 1 (mother_q).
/// Sample i of class c uses its own generator seeded from (family seed, c, i).
GeneratedClass sample_class(const GenerativeSpec& spec, int which);

struct ClosureReport {
  int trials = 0;
  int inverse_violations = 0;
  int convex_violations = 0;
  int composition_violations = 0;
  double max_violation = 0.0;
  std::vector<std::string> failures;

  int violations() const { return inverse_violations + convex_violations + composition_violations; }
};

/// Numerically checks that the family is closed under inversion, convex
/// combination of inverses and composition, on `family.domain`.
ClosureReport verify_family_closure(const ConfoundFamily& family, int trials);

/// Domain and resolution of the bundled texture histograms.
inline constexpr double kTextureLower = 0.0;
inline constexpr double kTextureUpper = 2.25;
inline constexpr std::size_t kTextureBins = 256;
inline constexpr std::size_t kTextureCdtPoints = 256;

/// Prototype histograms as cell averages over `bins` cells of the texture
/// domain. Class 1 is a narrow bump; class 0 is the even mixture of two
/// copies of it shifted apart, so it is bimodal with the same centre.
std::pair<DiscreteDensity, DiscreteDensity> texture_prototypes(std::size_t bins = kTextureBins);

struct TextureSimulation {
  LabeledDataset raw;  // histogram values, one row per sample
  LabeledDataset cdt;  // transform values on `grid`
  GridPtr grid;
  double raw_grid_start = 0.0;
  double raw_spacing = 0.0;
  std::vector<Warp> warps;  // per row
};

/// 64 samples per class: the same 8 brightness shifts x 8 contrast scales,
/// drawn uniformly from [0, 0.5] and [0.6, 1.67], applied to each prototype.
TextureSimulation texture_simulation(std::uint64_t seed);

/// Rows of a dataset built from densities on one grid.
LabeledDataset density_rows(const std::vector<DiscreteDensity>& p,
                            const std::vector<DiscreteDensity>& q);
/// Forward transforms of both classes on `grid`, as dataset rows.
LabeledDataset cdt_rows(const std::vector<DiscreteDensity>& p,
                        const std::vector<DiscreteDensity>& q, const GridPtr& grid);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

template <class Rng>
Warp ConfoundFamily::draw(Rng& rng) const {
  auto uniform = [&](std::pair<double, double> r) {
    return r.first + (r.second - r.first) * std::generate_canonical<double, 53>(rng);
  };
  switch (kind) {
    case FamilyKind::kTranslation:
      return Warp::affine(1.0, uniform(shift_range));
    case FamilyKind::kScaling:
      return Warp::affine(uniform(scale_range), 0.0);
    case FamilyKind::kAffine: {
      const double shift = uniform(shift_range);
      return Warp::affine(uniform(scale_range), shift);
    }
    case FamilyKind::kCustomMonotone: {
      const auto n = members.size();
      auto k = static_cast<std::size_t>(std::generate_canonical<double, 53>(rng) *
                                        static_cast<double>(n));
      if (k >= n) k = n - 1;
      Warp w = members[k];
      w.member = static_cast<int>(k);
      return w;
    }
  }
  return Warp::affine(1.0, 0.0);
}

}  // namespace cdtkit
