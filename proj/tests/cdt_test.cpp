#include "cdtkit/cdt.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cdtkit/error.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cdtkit;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a cdtkit::Error");
  return Errc::kInvalidArgument;
}

double sup_diff(std::span<const double> a, std::span<const double> b, double trim = 0.0) {
  const auto n = a.size();
  const auto skip = static_cast<std::size_t>(trim * static_cast<double>(n));
  double worst = 0.0;
  for (std::size_t k = skip; k + skip < n; ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

DiscreteDensity sampled_normal(std::size_t n, double mean = 0.0, double sd = 1.0) {
  std::vector<double> raw(n);
  const double lo = mean - 5 * sd;
  const double r = 10 * sd / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw[i] = oracle::normal_pdf(lo + (static_cast<double>(i) + 0.5) * r, mean, sd);
  }
  return DiscreteDensity::from_samples(raw, lo + 0.5 * r, r);
}

DiscreteDensity discretized_normal(std::size_t n, double mean, double sd) {
  return DiscreteDensity::from_cdf(oracle::truncated_normal_cdf(mean, sd), mean - 5 * sd,
                                   mean + 5 * sd, n);
}

ReferenceDensity ramp_reference() {
  std::vector<double> ramp(64);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.5 + static_cast<double>(i) / 63.0;
  return ReferenceDensity(DiscreteDensity::from_samples(ramp, 0.5 / 64, 1.0 / 64, 0.0));
}

/// Direct-summation CDF of a density, independent of cdtkit::Cdf.
double direct_cdf(const DiscreteDensity& d, double x) {
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double edge = d.lower() + d.spacing() * static_cast<double>(i);
    total += d.mass(i) * std::clamp((x - edge) / d.spacing(), 0.0, 1.0);
  }
  return total;
}

}  // namespace

TEST_CASE("MonotoneMap") {
  const MonotoneMap m({0, 1, 3}, {0, 2, 3});
  CHECK(m(0.5) == doctest::Approx(1.0));
  CHECK(m(2.0) == doctest::Approx(2.5));
  CHECK(m.slope(0.5) == doctest::Approx(2.0));
  CHECK(m.slope(1.0) == doctest::Approx(2.0));  // left-limit at the knot
  CHECK(m.slope(1.5) == doctest::Approx(0.5));
  const auto inv = m.inverse();
  CHECK(inv(2.5) == doctest::Approx(2.0));
  CHECK(code_of([&] { (void)m(3.5); }) == Errc::kOutOfRange);
  CHECK(code_of([] { MonotoneMap({0, 1}, {1, 1}); }) == Errc::kNonMonotone);
  CHECK(code_of([] { MonotoneMap({0, 1, 2}, {1, 2}); }) == Errc::kInvalidArgument);
}

TEST_CASE("forward of the reference is zero") {
  const std::vector<double> flat(64, 1.0);
  const auto d = DiscreteDensity::from_samples(flat, 0.5 / 64, 1.0 / 64, 0.0);
  const auto t = forward(d, ReferenceDensity::uniform(), 100);
  for (double v : t.values()) CHECK(std::abs(v) <= 1e-14);
  CHECK(transport_norm(t) <= 1e-14);
}

TEST_CASE("forward of a normal density matches the inverse normal CDF") {
  const auto t = forward(sampled_normal(10000), ReferenceDensity::uniform(), 10000);
  const auto x = t.grid().points();
  double worst = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] < 0.01 || x[k] > 0.99) continue;
    worst = std::max(worst, std::abs(t.values()[k] - (oracle::normal_quantile(x[k]) - x[k])));
  }
  CHECK(worst <= 1e-2);
}

TEST_CASE("forward of a two-bin density at x = 1/2") {
  const std::vector<double> raw{3, 1};
  const auto d = DiscreteDensity::from_samples(raw, 0.25, 0.5, 0.0);
  const auto t = forward(d, ReferenceDensity::uniform(), 3);  // points 1/6, 1/2, 5/6
  REQUIRE(t.grid().points()[1] == doctest::Approx(0.5));
  const double f_half = oracle::bisect_quantile([&](double y) { return direct_cdf(d, y); }, 0.5,
                                                0.0, 1.0);
  CHECK(f_half == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(t.values()[1] == doctest::Approx(f_half - 0.5).epsilon(1e-12));
  CHECK(t.values()[1] == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));
  // Every grid point against the bisection oracle.
  for (std::size_t k = 0; k < 3; ++k) {
    const double u = t.grid().points()[k];
    const double f = oracle::bisect_quantile([&](double y) { return direct_cdf(d, y); }, u, 0, 1);
    CHECK(t.values()[k] == doctest::Approx(f - u).epsilon(1e-12));
  }
}

TEST_CASE("forward with a non-uniform reference matches bisection") {
  std::mt19937_64 rng(5);
  const auto mix = oracle::MixtureDensity::random(rng);
  const auto d = DiscreteDensity::from_cdf([&](double x) { return mix.cdf(x); }, 0, 1, 300);
  const auto ref = ramp_reference();
  const auto t = forward(d, ref, 50);
  const auto f = t.transport_map();
  for (std::size_t k = 0; k < 50; ++k) {
    const double x = t.grid().points()[k];
    const double u = direct_cdf(ref.density(), x);
    const double expected = oracle::bisect_quantile([&](double y) { return direct_cdf(d, y); }, u,
                                                    0.0, 1.0);
    CHECK(f[k] == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("inverse") {
  SUBCASE("round trip at N = M = 1024") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 5; ++trial) {
      const auto mix = oracle::MixtureDensity::random(rng);
      const auto d = DiscreteDensity::from_cdf([&](double x) { return mix.cdf(x); }, 0, 1, 1024);
      const auto t = forward(d, ReferenceDensity::uniform(), 1024);
      const auto back = inverse(t, OutputGrid{d.grid_start(), d.spacing(), d.size()});
      CHECK(l1_distance(back, d) <= 1e-3);
    }
  }
  SUBCASE("zero transform gives the uniform density") {
    const auto grid = make_grid(ReferenceDensity::uniform(), 128);
    const CdtSignal zero(std::vector<double>(128, 0.0), grid);
    const auto d = inverse(zero, 32);
    CHECK(d.lower() == doctest::Approx(0.0).scale(1.0));
    CHECK(d.upper() == doctest::Approx(1.0));
    for (double v : d.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("analytic normal transform reconstructs the normal density") {
    const std::size_t m = 10000;
    const auto grid = make_grid(ReferenceDensity::uniform(), m);
    std::vector<double> f(m);
    for (std::size_t k = 0; k < m; ++k) f[k] = oracle::normal_quantile(grid->points()[k]);
    const auto t = from_transport_map(f, grid);
    const auto d = inverse(t, 4000);
    double l1 = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double y = d.center(i);
      if (y < -3.0 || y > 3.0) continue;
      l1 += std::abs(d.values()[i] - oracle::normal_pdf(y)) * d.spacing();
    }
    CHECK(l1 <= 5e-3);
  }
  SUBCASE("non-monotone transform is rejected") {
    const auto grid = make_grid(ReferenceDensity::uniform(), 4);
    const CdtSignal bad({0.0, 0.5, -0.5, 0.0}, grid);
    CHECK(code_of([&] { (void)inverse(bad, 8); }) == Errc::kNonMonotone);
  }
}

TEST_CASE("translate_oracle") {
  const auto grid = make_grid(ReferenceDensity::uniform(), 1000);
  std::vector<double> f(grid->size());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = oracle::normal_quantile(grid->points()[k]);
  const auto t = from_transport_map(f, grid);

  CHECK(sup_diff(translate_oracle(t, 0.0).values(), t.values()) == 0.0);

  const auto moved = translate_oracle(t, 2.0);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double x = grid->points()[k];
    CHECK(moved.values()[k] == doctest::Approx(oracle::normal_quantile(x) - x + 2.0));
  }
}

TEST_CASE("scale_oracle") {
  const auto grid = make_grid(ReferenceDensity::uniform(), 1000);
  std::vector<double> f(grid->size());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = oracle::normal_quantile(grid->points()[k]);
  const auto t = from_transport_map(f, grid);

  CHECK(sup_diff(scale_oracle(t, 1.0).values(), t.values()) <= 1e-15);
  const auto scaled = scale_oracle(t, 2.0);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double x = grid->points()[k];
    CHECK(scaled.values()[k] == doctest::Approx(oracle::normal_quantile(x) / 2.0 - x));
  }
  CHECK(code_of([&] { (void)scale_oracle(t, 0.0); }) == Errc::kNonPositiveScale);
  CHECK(code_of([&] { (void)scale_oracle(t, -1.0); }) == Errc::kNonPositiveScale);
}

TEST_CASE("compose_oracle") {
  const auto t = forward(discretized_normal(4000, 0, 1), ReferenceDensity::uniform(), 1000);
  CHECK(sup_diff(compose_oracle(t, MonotoneMap::identity(-6, 6)).values(), t.values()) <= 1e-12);
  const MonotoneMap half({-10, 10}, {-5, 5});  // inverse of g(x) = 2x
  CHECK(sup_diff(compose_oracle(t, half).values(), scale_oracle(t, 2.0).values()) <= 1e-12);
  const MonotoneMap narrow({-1, 1}, {-1, 1});
  CHECK(code_of([&] { (void)compose_oracle(t, narrow); }) == Errc::kRangeMismatch);
}

TEST_CASE("property identities hold against regridded densities") {
  std::mt19937_64 rng(31);
  for (const bool uniform_ref : {true, false}) {
    const auto ref = uniform_ref ? ReferenceDensity::uniform() : ramp_reference();
    const auto grid = make_grid(ref, 512);
    for (int trial = 0; trial < 3; ++trial) {
      const auto mix = oracle::MixtureDensity::random(rng);
      auto base_cdf = [&](double x) { return mix.cdf(x); };
      const auto t = forward(DiscreteDensity::from_cdf(base_cdf, 0, 1, 4096), grid);

      for (double mu : {-0.2, 0.1, 2.0}) {
        const auto shifted = DiscreteDensity::from_cdf(
            [&](double x) { return mix.cdf(x - mu); }, mu, 1 + mu, 4096);
        CHECK(sup_diff(forward(shifted, grid).values(), translate_oracle(t, mu).values()) <= 1e-3);
      }
      for (double a : {0.6, 1.67, 2.0}) {
        const auto dilated = DiscreteDensity::from_cdf(
            [&](double x) { return mix.cdf(a * x); }, 0, 1 / a, 4096);
        CHECK(sup_diff(forward(dilated, grid).values(), scale_oracle(t, a).values()) <= 1e-3);
      }
    }
  }
}

TEST_CASE("composition with g(x) = x^3 + x matches the pushed-forward density") {
  auto g = [](double x) { return x * x * x + x; };
  const auto base_cdf = oracle::truncated_normal_cdf(0, 1);
  const auto grid = make_grid(ReferenceDensity::uniform(), 1000);
  const auto t = forward(DiscreteDensity::from_cdf(base_cdf, -5, 5, 20000), grid);
  // J_g(z) = J_1(g(z)) on g^-1([-5, 5]).
  const double z_hi = oracle::bisect_quantile([&](double z) { return g(z) / 10 + 0.5; }, 1.0, 0, 5);
  const auto pushed = DiscreteDensity::from_cdf([&](double z) { return base_cdf(g(z)); }, -z_hi,
                                                z_hi, 20000);
  const auto g_inv = MonotoneMap::tabulate(g, -2.0, 2.0, 40001).inverse();
  CHECK(sup_diff(forward(pushed, grid).values(), compose_oracle(t, g_inv).values(), 0.01) <=
        2e-3);
}

TEST_CASE("transport_norm") {
  const auto grid = make_grid(ReferenceDensity::uniform(), 1000);
  CHECK(transport_norm(CdtSignal(std::vector<double>(1000, 0.0), grid)) == 0.0);

  const std::vector<double> flat(100, 1.0);
  const auto shifted = DiscreteDensity::from_samples(flat, 0.3 + 0.005, 0.01, 0.0);
  CHECK(transport_norm(forward(shifted, grid)) == doctest::Approx(0.3).epsilon(1e-12));

  const auto t = forward(sampled_normal(10000), ReferenceDensity::uniform(), 10000);
  const double expected = oracle::w2_quantile_quadrature(
      [](double u) { return oracle::normal_quantile(u); }, [](double u) { return u; }, 1000000);
  CHECK(transport_norm(t) == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("transport_distance") {
  const auto grid = make_grid(ReferenceDensity::uniform(), 10000);
  const auto n01 = forward(discretized_normal(20000, 0, 1), grid);
  CHECK(transport_distance(n01, n01) == 0.0);
  CHECK(transport_distance(n01, forward(discretized_normal(20000, 2, 1), grid)) ==
        doctest::Approx(2.0).epsilon(5e-3));
  CHECK(transport_distance(n01, forward(discretized_normal(20000, 1, 2), grid)) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(7e-3));

  const auto other = forward(discretized_normal(200, 0, 1), ReferenceDensity::uniform(), 500);
  CHECK(code_of([&] { (void)transport_distance(n01, other); }) == Errc::kReferenceMismatch);
  const auto ramp = forward(discretized_normal(200, 0, 1), ramp_reference(), 10000);
  CHECK(code_of([&] { (void)transport_distance(n01, ramp); }) == Errc::kReferenceMismatch);
}

TEST_CASE("property: transform distance equals the quantile-quadrature W2") {
  std::mt19937_64 rng(41);
  const auto grid = make_grid(ReferenceDensity::uniform(), 2000);
  for (int trial = 0; trial < 5; ++trial) {
    const auto m1 = oracle::MixtureDensity::random(rng);
    const auto m2 = oracle::MixtureDensity::random(rng);
    const auto c1 = [&](double x) { return m1.cdf(x); };
    const auto c2 = [&](double x) { return m2.cdf(x); };
    const double d = transport_distance(forward(DiscreteDensity::from_cdf(c1, 0, 1, 2000), grid),
                                        forward(DiscreteDensity::from_cdf(c2, 0, 1, 2000), grid));
    const double expected = oracle::w2_quantile_quadrature(
        [&](double u) { return oracle::bisect_quantile(c1, u, 0, 1); },
        [&](double u) { return oracle::bisect_quantile(c2, u, 0, 1); }, 4000);
    CHECK(d == doctest::Approx(expected).epsilon(1e-2));
  }
}

TEST_CASE("property: the transform is nonlinear") {
  const auto grid = make_grid(ReferenceDensity::uniform(), 1000);
  // Both densities on a shared window [-5, 5].
  const auto normal = discretized_normal(2000, 0, 1);
  const std::vector<double> flat(2000, 1.0);
  const auto uniform = DiscreteDensity::from_samples(flat, normal.grid_start(), normal.spacing());
  std::vector<double> mixed(2000);
  for (std::size_t i = 0; i < mixed.size(); ++i) {
    mixed[i] = 0.5 * normal.values()[i] + 0.5 * uniform.values()[i];
  }
  const auto mixture = DiscreteDensity::from_samples(mixed, normal.grid_start(), normal.spacing());
  const auto t1 = forward(normal, grid);
  const auto t2 = forward(uniform, grid);
  std::vector<double> avg(grid->size());
  for (std::size_t k = 0; k < avg.size(); ++k) avg[k] = 0.5 * (t1.values()[k] + t2.values()[k]);
  CHECK(transport_distance(forward(mixture, grid), CdtSignal(avg, grid)) > 0.01);
}

TEST_CASE("property: h o f_i = f_0 for pushed-forward densities") {
  auto h = [](double x) { return x * x * x + x; };
  const auto grid = make_grid(ReferenceDensity::uniform(), 1000);
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 3; ++trial) {
    const auto mix = oracle::MixtureDensity::random(rng);
    auto base = [&](double x) { return mix.cdf(x); };
    const auto f0 = forward(DiscreteDensity::from_cdf(base, 0, 1, 8192), grid).transport_map();
    const double z_hi = oracle::bisect_quantile([&](double z) { return h(z) / 2.0; }, 0.5, 0, 1);
    const auto pushed = DiscreteDensity::from_cdf([&](double z) { return base(h(z)); }, 0, z_hi,
                                                  8192);
    const auto fi = forward(pushed, grid).transport_map();
    double worst = 0.0;
    for (std::size_t k = 0; k < fi.size(); ++k) worst = std::max(worst, std::abs(h(fi[k]) - f0[k]));
    CHECK(worst <= 1e-3);
  }
}
