#include "cdtkit/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "cdtkit/error.hpp"

namespace cdtkit {

namespace {

constexpr double kEscapeTolerance = 1e-3;
constexpr double kClosureTolerance = 1e-9;
constexpr int kClosurePoints = 201;

double normal_cdf(double x, double mean, double sd) {
  return boost::math::cdf(boost::math::normal_distribution<double>(mean, sd), x);
}

bool same_grid(const DiscreteDensity& a, const DiscreteDensity& b) {
  return a.size() == b.size() && std::abs(a.spacing() - b.spacing()) <= 1e-12 * a.spacing() &&
         std::abs(a.grid_start() - b.grid_start()) <= 1e-9 * a.spacing();
}

std::string format(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// Evaluates `fn` on the closure grid.
std::vector<double> tabulate(const std::function<double(double)>& fn,
                             std::pair<double, double> domain) {
  std::vector<double> out(kClosurePoints);
  for (int k = 0; k < kClosurePoints; ++k) {
    const double y = domain.first + (domain.second - domain.first) * k / (kClosurePoints - 1.0);
    out[static_cast<std::size_t>(k)] = fn(y);
  }
  return out;
}

// How far a tabulated function is from being strictly increasing.
double monotone_violation(const std::vector<double>& v) {
  double worst = 0.0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (!(v[k] > v[k - 1])) worst = std::max(worst, v[k - 1] - v[k] + 1e-300);
  }
  for (double x : v) {
    if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
  }
  return worst;
}

// Distance of a tabulated function from the parametric form of the family.
double form_violation(FamilyKind kind, const std::vector<double>& v,
                      std::pair<double, double> domain) {
  const auto n = static_cast<double>(v.size());
  std::vector<double> y(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    y[k] = domain.first + (domain.second - domain.first) * static_cast<double>(k) / (n - 1.0);
  }
  double sy = 0, sv = 0, syy = 0, syv = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    sy += y[k];
    sv += v[k];
    syy += y[k] * y[k];
    syv += y[k] * v[k];
  }
  double slope = (n * syv - sy * sv) / (n * syy - sy * sy);
  double intercept = (sv - slope * sy) / n;
  double extra = 0.0;
  if (kind == FamilyKind::kTranslation) {
    extra = std::abs(slope - 1.0);
    slope = 1.0;
    intercept = (sv - sy) / n;
  } else if (kind == FamilyKind::kScaling) {
    slope = syv / syy;
    intercept = 0.0;
  }
  double scale = 1.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  double resid = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    resid = std::max(resid, std::abs(v[k] - (slope * y[k] + intercept)));
  }
  if (!(slope > 0.0)) return std::numeric_limits<double>::infinity();
  return std::max(resid / scale, extra);
}

// Distance of a tabulated function from the nearest listed member (or member
// inverse).
double member_violation(const ConfoundFamily& family, const std::vector<double>& v,
                        bool against_inverse) {
  double best = std::numeric_limits<double>::infinity();
  for (const Warp& m : family.members) {
    const auto ref = tabulate(against_inverse ? m.inverse : m.map, family.domain);
    double sup = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) sup = std::max(sup, std::abs(v[k] - ref[k]));
    best = std::min(best, sup);
  }
  return best;
}

}  // namespace

Warp Warp::affine(double scale, double shift) {
  if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(shift)) {
    throw Error(Errc::kNonPositiveScale, "affine warp needs a finite positive scale");
  }
  Warp w;
  w.scale = scale;
  w.shift = shift;
  w.map = [scale, shift](double x) { return scale * (x - shift); };
  w.inverse = [scale, shift](double y) { return y / scale + shift; };
  return w;
}

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::kTranslation: return "translation";
    case FamilyKind::kScaling: return "scaling";
    case FamilyKind::kAffine: return "affine";
    case FamilyKind::kCustomMonotone: return "custom-monotone";
  }
  return "unknown";
}

FamilyKind parse_family_kind(const std::string& name) {
  if (name == "translation") return FamilyKind::kTranslation;
  if (name == "scaling") return FamilyKind::kScaling;
  if (name == "affine") return FamilyKind::kAffine;
  if (name == "custom-monotone") return FamilyKind::kCustomMonotone;
  throw Error(Errc::kInvalidArgument, "unknown family kind '" + name + "'");
}

ConfoundFamily ConfoundFamily::translation(std::pair<double, double> shifts, std::uint64_t seed) {
  ConfoundFamily f;
  f.kind = FamilyKind::kTranslation;
  f.shift_range = shifts;
  f.scale_range = {1.0, 1.0};
  f.seed = seed;
  return f;
}

ConfoundFamily ConfoundFamily::scaling(std::pair<double, double> scales, std::uint64_t seed) {
  if (!(scales.first > 0.0) || scales.second < scales.first) {
    throw Error(Errc::kNonPositiveScale, "scale range must be positive and ordered");
  }
  ConfoundFamily f;
  f.kind = FamilyKind::kScaling;
  f.shift_range = {0.0, 0.0};
  f.scale_range = scales;
  f.seed = seed;
  return f;
}

ConfoundFamily ConfoundFamily::affine(std::pair<double, double> shifts,
                                      std::pair<double, double> scales, std::uint64_t seed) {
  ConfoundFamily f = scaling(scales, seed);
  f.kind = FamilyKind::kAffine;
  f.shift_range = shifts;
  return f;
}

ConfoundFamily ConfoundFamily::custom(std::vector<Warp> members, std::pair<double, double> domain,
                                      std::uint64_t seed) {
  if (members.empty()) throw Error(Errc::kEmptyInput, "custom family needs members");
  ConfoundFamily f;
  f.kind = FamilyKind::kCustomMonotone;
  f.members = std::move(members);
  f.domain = domain;
  f.seed = seed;
  return f;
}

void GenerativeSpec::validate() const {
  if (!same_grid(mother_p, mother_q)) {
    throw Error(Errc::kDimensionMismatch, "mother densities live on different grids");
  }
  if (l1_distance(mother_p, mother_q) <= 1e-6) {
    throw Error(Errc::kInvalidArgument, "mother densities coincide");
  }
  if (noise && std::abs(noise->spacing() - mother_p.spacing()) > 1e-12 * mother_p.spacing()) {
    throw Error(Errc::kDimensionMismatch, "noise kernel spacing differs from the mothers'");
  }
  if (family.kind == FamilyKind::kCustomMonotone && family.members.empty()) {
    throw Error(Errc::kEmptyInput, "custom family needs members");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

DiscreteDensity push_forward(const DiscreteDensity& mother, const Warp& h, double epsilon_floor) {
  const Cdf c = cdf(mother);
  const std::size_t n = mother.size();
  const double r = mother.spacing();
  std::vector<double> level(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double edge = k == n ? mother.upper() : mother.lower() + r * static_cast<double>(k);
    const double y = h(edge);
    if (!std::isfinite(y)) throw Error(Errc::kNonFinite, "warp produced a non-finite value");
    level[k] = c(y);
  }
  const double captured = level[n] - level[0];
  if (captured < 1.0 - kEscapeTolerance) {
    throw Error(Errc::kDomainEscape, "warp moves " + format(1.0 - captured) +
                                         " of the mass outside [" + format(mother.lower()) +
                                         ", " + format(mother.upper()) + "]");
  }
  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double m = level[k + 1] - level[k];
    if (m < -1e-12) throw Error(Errc::kNonMonotone, "warp is not increasing on the grid");
    values[k] = std::max(m, 0.0) / r;
  }
  return DiscreteDensity::from_samples(values, mother.grid_start(), r, epsilon_floor);
}

DiscreteDensity convolve(const DiscreteDensity& signal, const DiscreteDensity& kernel) {
  if (std::abs(kernel.spacing() - signal.spacing()) > 1e-12 * signal.spacing()) {
    throw Error(Errc::kDimensionMismatch, "kernel spacing differs from the signal's");
  }
  const auto n = static_cast<std::ptrdiff_t>(signal.size());
  const auto l = static_cast<std::ptrdiff_t>(kernel.size());
  const std::ptrdiff_t centre = (l - 1) / 2;
  std::vector<double> out(signal.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t j = 0; j < l; ++j) {
      const std::ptrdiff_t src = i - j + centre;
      if (src < 0 || src >= n) continue;
      acc += signal.mass(static_cast<std::size_t>(src)) * kernel.mass(static_cast<std::size_t>(j));
    }
    out[static_cast<std::size_t>(i)] = acc / signal.spacing();
  }
  return DiscreteDensity::from_samples(out, signal.grid_start(), signal.spacing(), 0.0);
}

GeneratedClass sample_class(const GenerativeSpec& spec, int which) {
  spec.validate();
  if (which != 0 && which != 1) throw Error(Errc::kInvalidArgument, "class must be 0 or 1");
  const DiscreteDensity& mother = which == 0 ? spec.mother_p : spec.mother_q;
  GeneratedClass out;
  for (std::size_t i = 0; i < spec.samples_per_class; ++i) {
    std::mt19937_64 rng(derive_seed(spec.family.seed, static_cast<std::uint64_t>(which), i));
    Warp w = spec.family.draw(rng);
    DiscreteDensity d = push_forward(mother, w, spec.epsilon_floor);
    if (spec.noise) d = convolve(d, *spec.noise);
    out.densities.push_back(std::move(d));
    out.warps.push_back(std::move(w));
  }
  return out;
}

ClosureReport verify_family_closure(const ConfoundFamily& family, int trials) {
  if (trials < 1) throw Error(Errc::kInvalidArgument, "need at least one trial");
  ClosureReport report;
  report.trials = trials;
  std::mt19937_64 rng(derive_seed(family.seed, 0xc1u));
  const bool custom = family.kind == FamilyKind::kCustomMonotone;

  auto record = [&](int trial, const char* what, double violation, int& counter) {
    report.max_violation = std::max(report.max_violation, violation);
    if (violation > kClosureTolerance) {
      ++counter;
      report.failures.push_back("trial " + std::to_string(trial) + ": " + what +
                                " (violation " + format(violation) + ")");
    }
  };

  for (int t = 0; t < trials; ++t) {
    const Warp h1 = family.draw(rng);
    const Warp h2 = family.draw(rng);
    const Warp h3 = family.draw(rng);

    // i) h^-1 belongs to the family.
    const auto inv = tabulate(h1.inverse, family.domain);
    const double v1 = std::max(monotone_violation(inv),
                               custom ? member_violation(family, inv, false)
                                      : form_violation(family.kind, inv, family.domain));
    record(t, "inverse is not in the family", v1, report.inverse_violations);

    // ii) sum_i alpha_i h_i^-1 is the inverse of a member.
    std::gamma_distribution<double> gamma(1.0, 1.0);
    double w[3] = {gamma(rng), gamma(rng), gamma(rng)};
    const double total = w[0] + w[1] + w[2];
    for (double& x : w) x /= total;
    const auto mix = tabulate(
        [&](double y) { return w[0] * h1.inverse(y) + w[1] * h2.inverse(y) + w[2] * h3.inverse(y); },
        family.domain);
    const double v2 = std::max(monotone_violation(mix),
                               custom ? member_violation(family, mix, true)
                                      : form_violation(family.kind, mix, family.domain));
    record(t, "convex combination of inverses is not in the family", v2, report.convex_violations);

    // iii) h1 o h2 belongs to the family.
    const auto comp = tabulate([&](double y) { return h1(h2(y)); }, family.domain);
    const double v3 = std::max(monotone_violation(comp),
                               custom ? member_violation(family, comp, false)
                                      : form_violation(family.kind, comp, family.domain));
    record(t, "composition is not in the family", v3, report.composition_violations);
  }
  return report;
}

std::pair<DiscreteDensity, DiscreteDensity> texture_prototypes(std::size_t bins) {
  const double centre = 0.4;
  const double offset = 0.06;
  const double sd = 0.04;
  auto truncated = [](std::function<double(double)> c) {
    const double lo = c(kTextureLower);
    const double hi = c(kTextureUpper);
    return [=](double x) { return (c(x) - lo) / (hi - lo); };
  };
  const auto p = truncated([=](double x) {
    return 0.5 * normal_cdf(x, centre - offset, sd) + 0.5 * normal_cdf(x, centre + offset, sd);
  });
  const auto q = truncated([=](double x) { return normal_cdf(x, centre, sd); });
  return {DiscreteDensity::from_cdf(p, kTextureLower, kTextureUpper, bins),
          DiscreteDensity::from_cdf(q, kTextureLower, kTextureUpper, bins)};
}

LabeledDataset density_rows(const std::vector<DiscreteDensity>& p,
                            const std::vector<DiscreteDensity>& q) {
  if (p.empty() || q.empty()) throw Error(Errc::kEmptyInput, "both classes need samples");
  LabeledDataset out;
  const auto n = static_cast<Eigen::Index>(p.size() + q.size());
  const auto d = static_cast<Eigen::Index>(p.front().size());
  out.features.resize(n, d);
  Eigen::Index row = 0;
  for (int c = 0; c < 2; ++c) {
    for (const auto& density : c == 0 ? p : q) {
      if (!same_grid(density, p.front())) {
        throw Error(Errc::kDimensionMismatch, "samples live on different grids");
      }
      out.features.row(row++) = Eigen::Map<const Eigen::RowVectorXd>(density.values().data(), d);
      out.labels.push_back(c);
    }
  }
  return out;
}

LabeledDataset cdt_rows(const std::vector<DiscreteDensity>& p,
                        const std::vector<DiscreteDensity>& q, const GridPtr& grid) {
  if (p.empty() || q.empty()) throw Error(Errc::kEmptyInput, "both classes need samples");
  LabeledDataset out;
  const auto m = static_cast<Eigen::Index>(grid->size());
  out.features.resize(static_cast<Eigen::Index>(p.size() + q.size()), m);
  Eigen::Index row = 0;
  for (int c = 0; c < 2; ++c) {
    for (const auto& density : c == 0 ? p : q) {
      const CdtSignal t = forward(density, grid);
      out.features.row(row++) = Eigen::Map<const Eigen::RowVectorXd>(t.values().data(), m);
      out.labels.push_back(c);
    }
  }
  return out;
}

TextureSimulation texture_simulation(std::uint64_t seed) {
  const auto [p0, q0] = texture_prototypes();
  const ConfoundFamily family = ConfoundFamily::affine({0.0, 0.5}, {0.6, 1.67}, seed);
  TextureSimulation out;
  std::mt19937_64 rng(derive_seed(seed, 0));
  auto draw = [&](std::pair<double, double> r) {
    return r.first + (r.second - r.first) * std::generate_canonical<double, 53>(rng);
  };
  std::vector<double> shifts(8), scales(8);
  for (double& s : shifts) s = draw(family.shift_range);
  for (double& a : scales) a = draw(family.scale_range);

  std::vector<DiscreteDensity> samples[2];
  for (int c = 0; c < 2; ++c) {
    for (double shift : shifts) {
      for (double scale : scales) {
        const Warp w = Warp::affine(scale, shift);
        samples[c].push_back(push_forward(c == 0 ? p0 : q0, w));
        out.warps.push_back(w);
      }
    }
  }
  out.grid = make_grid(ReferenceDensity::uniform(), kTextureCdtPoints);
  out.raw = density_rows(samples[0], samples[1]);
  out.cdt = cdt_rows(samples[0], samples[1], out.grid);
  out.raw_grid_start = p0.grid_start();
  out.raw_spacing = p0.spacing();
  return out;
}

}  // namespace cdtkit
