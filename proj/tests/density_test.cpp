#include "cdtkit/density.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "cdtkit/error.hpp"
#include "doctest.h"

using cdtkit::Cdf;
using cdtkit::DiscreteDensity;
using cdtkit::Errc;
using cdtkit::Error;

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

DiscreteDensity random_density(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> value(0.0, 3.0);
  std::vector<double> raw(n);
  for (double& v : raw) v = value(rng);
  return DiscreteDensity::from_samples(raw, -1.0, 2.0 / static_cast<double>(n), 1e-3);
}

}  // namespace

TEST_CASE("from_samples normalizes to unit mass") {
  SUBCASE("uniform") {
    const std::vector<double> raw{1, 1, 1, 1};
    const auto d = DiscreteDensity::from_samples(raw, 0.125, 0.25, 0.0);
    for (double v : d.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.lower() == doctest::Approx(0.0));
    CHECK(d.upper() == doctest::Approx(1.0));
  }
  SUBCASE("two bins") {
    const std::vector<double> raw{3, 1};
    const auto d = DiscreteDensity::from_samples(raw, 0.25, 0.5, 0.0);
    CHECK(d.values()[0] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(d.values()[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d.mass(0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(d.mass(1) == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("floor makes every bin positive") {
    const std::vector<double> raw{0, 2, 0};
    const auto d = DiscreteDensity::from_samples(raw, 0.0, 1.0, 1e-8);
    double mass = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(d.values()[i] > 0.0);
      mass += d.mass(i);
    }
    CHECK(std::abs(mass - 1.0) <= 1e-12);
  }
  SUBCASE("negative samples are clipped") {
    const std::vector<double> raw{-4, 1, 1};
    const auto d = DiscreteDensity::from_samples(raw, 0.0, 1.0, 0.0);
    CHECK(d.values()[0] == 0.0);
    CHECK(d.values()[1] == doctest::Approx(0.5));
  }
}

TEST_CASE("from_samples errors") {
  const std::vector<double> zeros{0, -1, 0};
  CHECK(code_of([&] { DiscreteDensity::from_samples(zeros, 0, 1, 0.0); }) == Errc::kAllZero);
  const std::vector<double> nan{1, std::numeric_limits<double>::quiet_NaN()};
  CHECK(code_of([&] { DiscreteDensity::from_samples(nan, 0, 1, 0.0); }) == Errc::kNonFinite);
  const std::vector<double> inf{1, INFINITY};
  CHECK(code_of([&] { DiscreteDensity::from_samples(inf, 0, 1, 0.0); }) == Errc::kNonFinite);
  const std::vector<double> ok{1, 1};
  CHECK(code_of([&] { DiscreteDensity::from_samples(ok, 0, 0.0, 0.0); }) ==
        Errc::kInvalidArgument);
  const std::vector<double> single{1};
  CHECK(code_of([&] { DiscreteDensity::from_samples(single, 0, 1, 0.0); }) ==
        Errc::kInvalidArgument);
}

TEST_CASE("cdf at bin edges") {
  SUBCASE("uniform, N = 4") {
    const std::vector<double> raw{1, 1, 1, 1};
    const Cdf c = cdtkit::cdf(DiscreteDensity::from_samples(raw, 0.125, 0.25, 0.0));
    const std::vector<double> expected{0, 0.25, 0.5, 0.75, 1};
    REQUIRE(c.cumulative().size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK(c.cumulative()[i] == doctest::Approx(expected[i]).epsilon(1e-15));
      CHECK(c.breakpoints()[i] == doctest::Approx(0.25 * static_cast<double>(i)));
    }
  }
  SUBCASE("two bins") {
    const std::vector<double> raw{3, 1};
    const Cdf c = cdtkit::cdf(DiscreteDensity::from_samples(raw, 0.25, 0.5, 0.0));
    CHECK(c(0.0) == 0.0);
    CHECK(c(0.5) == doctest::Approx(0.75));
    CHECK(c(1.0) == 1.0);
    CHECK(c(7.0) == 1.0);
    CHECK(c(-7.0) == 0.0);
  }
}

TEST_CASE("quantile") {
  const std::vector<double> flat{1, 1, 1, 1};
  const Cdf uniform = cdtkit::cdf(DiscreteDensity::from_samples(flat, 0.125, 0.25, 0.0));
  CHECK(cdtkit::quantile(uniform, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(cdtkit::quantile(uniform, 1.0) == doctest::Approx(1.0));
  CHECK(cdtkit::quantile(uniform, 0.0) == doctest::Approx(0.0));

  const std::vector<double> raw{3, 1};
  const Cdf skew = cdtkit::cdf(DiscreteDensity::from_samples(raw, 0.25, 0.5, 0.0));
  // 1.5 x = 0.5
  CHECK(cdtkit::quantile(skew, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  CHECK(code_of([&] { (void)cdtkit::quantile(skew, 1.5); }) == Errc::kOutOfRange);
  CHECK(code_of([&] { (void)cdtkit::quantile(skew, -0.1); }) == Errc::kOutOfRange);
}

TEST_CASE("quantile on a zero-density plateau returns the left endpoint") {
  const std::vector<double> raw{1, 0, 0, 1};
  const Cdf c = cdtkit::cdf(DiscreteDensity::from_samples(raw, 0.5, 1.0, 0.0));
  // Mass 1/2 is reached at x = 1 and stays there until x = 3.
  CHECK(c.quantile(0.5) == doctest::Approx(1.0));
  CHECK(c.quantile(0.75) == doctest::Approx(3.5));
  std::vector<double> out(1);
  const std::vector<double> level{0.5};
  c.quantile_sorted(level, out);
  CHECK(out[0] == doctest::Approx(1.0));
}

TEST_CASE("evaluate") {
  const std::vector<double> flat{1, 1, 1, 1};
  const auto uniform = DiscreteDensity::from_samples(flat, 0.125, 0.25, 0.0);
  for (double x : {0.0, 0.1, 0.5, 0.77, 1.0}) CHECK(uniform.evaluate(x) == doctest::Approx(1.0));

  const std::vector<double> raw{3, 1};
  const auto d = DiscreteDensity::from_samples(raw, 0.25, 0.5, 0.0);
  CHECK(d.evaluate(0.7) == doctest::Approx(0.5));
  CHECK(d.evaluate(0.2) == doctest::Approx(1.5));
  // Half-way edge belongs to the right bin.
  CHECK(d.evaluate(0.5) == doctest::Approx(0.5));
  CHECK(code_of([&] { (void)d.evaluate(std::nextafter(0.0, -1.0)); }) == Errc::kOutOfDomain);
  CHECK(code_of([&] { (void)d.evaluate(1.0000001); }) == Errc::kOutOfDomain);
}

TEST_CASE("from_cdf reproduces bin masses of the continuous distribution") {
  auto cdf = [](double x) { return std::clamp(x * x, 0.0, 1.0); };  // density 2x on [0, 1]
  const auto d = DiscreteDensity::from_cdf(cdf, 0.0, 1.0, 4, 0.0);
  // Cell averages of 2x over quarters: 0.25, 0.75, 1.25, 1.75
  const std::vector<double> expected{0.25, 0.75, 1.25, 1.75};
  for (std::size_t i = 0; i < 4; ++i) CHECK(d.values()[i] == doctest::Approx(expected[i]));
}

TEST_CASE("property: quantile inverts the cdf inside positive bins") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = random_density(rng, 5 + trial * 7);
    const Cdf c = cdtkit::cdf(d);
    for (int k = 0; k < 40; ++k) {
      const double x = d.lower() + unit(rng) * (d.upper() - d.lower());
      CHECK(std::abs(c.quantile(c(x)) - x) <= 1e-10);
    }
  }
}

TEST_CASE("property: cdf is piecewise linear and conserves mass") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = random_density(rng, 3 + trial);
    const Cdf c = cdtkit::cdf(d);
    const double r = d.spacing();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double a = d.lower() + r * static_cast<double>(i);
      const double mid = c(a + 0.5 * r);
      CHECK(mid == doctest::Approx(0.5 * (c(a) + c(a + r))).epsilon(1e-12));
    }
    const std::size_t from = d.size() / 3;
    const std::size_t to = d.size() - 1;
    double mass = 0.0;
    for (std::size_t i = from; i < to; ++i) mass += d.mass(i);
    const double a = d.lower() + r * static_cast<double>(from);
    const double b = d.lower() + r * static_cast<double>(to);
    CHECK(std::abs(c(b) - c(a) - mass) <= 1e-12);
  }
}

TEST_CASE("sorted sweeps agree with pointwise evaluation") {
  std::mt19937_64 rng(13);
  const auto d = random_density(rng, 97);
  const Cdf c = cdtkit::cdf(d);
  std::vector<double> xs, us;
  for (int k = 0; k <= 500; ++k) {
    xs.push_back(-1.2 + 2.4 * k / 500.0);
    us.push_back(k / 500.0);
  }
  std::vector<double> cx(xs.size()), qu(us.size());
  c.evaluate_sorted(xs, cx);
  c.quantile_sorted(us, qu);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    CHECK(cx[k] == doctest::Approx(c(xs[k])).epsilon(1e-14));
    CHECK(qu[k] == doctest::Approx(c.quantile(us[k])).epsilon(1e-14));
  }
  std::vector<double> unsorted{0.5, 0.2};
  std::vector<double> out(2);
  CHECK(code_of([&] { c.quantile_sorted(unsorted, out); }) == Errc::kInvalidArgument);
}
