#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/oracles.hpp"
#include "windclear/probkit.hpp"

using namespace windclear;

TEST_CASE("normal pdf") {
  CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804).epsilon(1e-9));
  CHECK(normal_pdf(1.0) == doctest::Approx(0.2419707245).epsilon(1e-9));
  CHECK(normal_pdf(-1.0) == doctest::Approx(normal_pdf(1.0)));
  CHECK(normal_pdf(10.0) < 1e-21);
}

TEST_CASE("normal cdf against quadrature of the pdf") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(normal_cdf(1.6448536) == doctest::Approx(0.95).epsilon(1e-7));
  CHECK(normal_cdf(-3.8906) == doctest::Approx(5.0e-5).epsilon(2e-3));
  for (double z : {-3.0, -1.2, 0.3, 0.9, 2.5}) {
    double quad = 0.5 + oracles::integrate([](double t) { return normal_pdf(t); }, 0.0, z);
    CHECK(normal_cdf(z) == doctest::Approx(quad).epsilon(1e-11));
  }
}

TEST_CASE("cdf symmetry") {
  for (double z = -8.0; z <= 8.0; z += 0.37)
    CHECK(normal_cdf(z) + normal_cdf(-z) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("quantile inverts the cdf") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536).epsilon(1e-6));
  CHECK(normal_quantile(1.0 - 5e-5) == doctest::Approx(3.8906).epsilon(1e-4));
  // bisection oracle for a couple of points
  for (double p : {0.95, 1.0 - 5e-5}) {
    double z = oracles::bisection([&](double x) { return normal_cdf(x) - p; }, -10, 10, 1e-13);
    CHECK(normal_quantile(p) == doctest::Approx(z).epsilon(1e-9));
  }
  for (double p = 0.0005; p < 1.0; p += 0.0317)
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(-0.1), std::domain_error);
}

TEST_CASE("expected overload") {
  CHECK(expected_overload(0.0, 1.0) == doctest::Approx(0.3989423).epsilon(1e-7));
  CHECK(expected_overload(0.0, 1.0) ==
        doctest::Approx(oracles::overload_quadrature(0.0, 1.0)).epsilon(1e-9));
  CHECK(expected_overload(-10.0, 1e-9) == 0.0);
  CHECK(expected_overload(2.0, 0.0) == 2.0);
  CHECK(expected_overload(-2.0, 0.0) == 0.0);
}

TEST_CASE("expected overload equals quadrature over a mu/sigma grid") {
  oracles::Rng rng(20240811);
  for (int k = 0; k < 40; ++k) {
    double sigma = rng.uniform(0.2, 60.0);
    double mu = rng.uniform(-5.0, 5.0) * sigma;
    double got = expected_overload(mu, sigma);
    double want = oracles::overload_quadrature(mu, sigma);
    CHECK(got == doctest::Approx(want).epsilon(1e-8).scale(std::max(1.0, sigma)));
  }
}

TEST_CASE("truncated moments") {
  GaussianSpec std_normal(0.0, 1.0);
  auto below = truncated_moments(std_normal, 0.0, TruncSide::Below);
  CHECK(below.mean == doctest::Approx(-0.7978846).epsilon(1e-7));
  CHECK(below.variance == doctest::Approx(0.3633802).epsilon(1e-6));
  auto above = truncated_moments(std_normal, 0.0, TruncSide::Above);
  CHECK(above.mean == doctest::Approx(0.7978846).epsilon(1e-7));
  CHECK(above.variance == doctest::Approx(below.variance).epsilon(1e-12));

  GaussianSpec wide(0.0, 7.5);
  auto no_trunc = truncated_moments(wide, std::numeric_limits<double>::infinity(), TruncSide::Below);
  CHECK(no_trunc.mean == doctest::Approx(0.0));
  CHECK(no_trunc.variance == doctest::Approx(56.25));
}

TEST_CASE("truncated moments match quadrature") {
  oracles::Rng rng(7);
  for (int k = 0; k < 25; ++k) {
    double mu = rng.uniform(-30, 30), sigma = rng.uniform(0.5, 40);
    double cut = mu + rng.uniform(-3.0, 3.0) * sigma;
    for (bool below : {true, false}) {
      auto got = truncated_moments(GaussianSpec(mu, sigma), cut,
                                   below ? TruncSide::Below : TruncSide::Above);
      auto want = oracles::truncated_quadrature(mu, sigma, cut, below);
      CHECK(got.mean == doctest::Approx(want.mean).epsilon(1e-8).scale(sigma));
      CHECK(got.variance == doctest::Approx(want.variance).epsilon(1e-7).scale(sigma * sigma));
    }
  }
}

TEST_CASE("law of total variance across the cut") {
  oracles::Rng rng(99);
  for (int k = 0; k < 20; ++k) {
    double mu = rng.uniform(-10, 10), sigma = rng.uniform(0.3, 20);
    double cut = mu + rng.uniform(-2.5, 2.5) * sigma;
    GaussianSpec spec(mu, sigma);
    auto lo = truncated_moments(spec, cut, TruncSide::Below);
    auto hi = truncated_moments(spec, cut, TruncSide::Above);
    double w = normal_cdf((cut - mu) / sigma);
    double mean = w * lo.mean + (1 - w) * hi.mean;
    double var = w * (lo.variance + lo.mean * lo.mean) + (1 - w) * (hi.variance + hi.mean * hi.mean) -
                 mean * mean;
    CHECK(mean == doctest::Approx(mu).epsilon(1e-9).scale(std::max(1.0, sigma)));
    CHECK(var == doctest::Approx(sigma * sigma).epsilon(1e-9).scale(sigma * sigma));
  }
}

TEST_CASE("deep-tail hazard stays finite and monotone") {
  double prev = normal_hazard_upper(6.0);
  for (double z = 6.5; z <= 40.0; z += 0.5) {
    double h = normal_hazard_upper(z);
    CHECK(std::isfinite(h));
    CHECK(h > prev);
    CHECK(h > z);
    prev = h;
  }
  // Mills-ratio bounds pin the hazard between z and z + 1/z
  for (double z = 2.0; z <= 40.0; z += 0.47) {
    double h = normal_hazard_upper(z);
    CHECK(h > z);
    CHECK(h < z + 1.0 / z);
  }
  // the branch switch is continuous up to the series truncation error
  double lo = normal_hazard_upper(7.999999);
  double hi = normal_hazard_upper(8.000001);
  CHECK(std::abs(hi - lo) / lo < 5e-4);
}

TEST_CASE("rate function") {
  GaussianSpec spec(0.0, 50.0);
  CHECK(rate_function(spec, 0.0) == 0.0);
  CHECK(rate_function(spec, 50.0) == doctest::Approx(0.5));
  CHECK(rate_function(spec, 235.0) == doctest::Approx(11.045).epsilon(1e-4));
  CHECK(rate_function(spec, -75.0) > 0.0);
}

TEST_CASE("first-order probability estimate matches the exact Gaussian tail") {
  GaussianSpec spec(0.0, 50.0);
  for (double omega : {20.0, 80.0, 150.0, 235.0}) {
    double p1 = normal_cdf(-std::sqrt(2.0 * rate_function(spec, omega)));
    double exact = 1.0 - normal_cdf(omega / spec.std);
    CHECK(p1 == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("gaussian spec validation") {
  CHECK_THROWS_AS(GaussianSpec(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(GaussianSpec(0.0, -1.0), std::invalid_argument);
}
