#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scenegen/rng.hpp"
#include "scenegen/special.hpp"

using namespace scenegen;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kEulerGamma = 0.57721566490153286061;
}  // namespace

TEST_CASE("lgamma anchors and agreement with the libm oracle") {
  CHECK(sf::lgamma(0.5) == doctest::Approx(0.5723649429247001).epsilon(1e-12));
  CHECK(sf::lgamma(1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sf::lgamma(2.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sf::lgamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-12));

  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(0.05, 50.0);
    const double ours = sf::lgamma(x);
    const double ref = std::lgamma(x);
    CHECK(std::abs(ours - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("digamma: tabulated values and recurrence") {
  CHECK(sf::digamma(1.0) == doctest::Approx(-kEulerGamma).epsilon(1e-12));
  CHECK(sf::digamma(2.0) == doctest::Approx(1.0 - kEulerGamma).epsilon(1e-12));
  CHECK(sf::digamma(0.5) ==
        doctest::Approx(-kEulerGamma - 2.0 * std::log(2.0)).epsilon(1e-12));

  Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(0.1, 30.0);
    CHECK(sf::digamma(x + 1.0) - sf::digamma(x) ==
          doctest::Approx(1.0 / x).epsilon(1e-10));
  }
}

TEST_CASE("trigamma: tabulated values and recurrence") {
  CHECK(sf::trigamma(1.0) == doctest::Approx(kPi * kPi / 6.0).epsilon(1e-12));
  CHECK(sf::trigamma(0.5) == doctest::Approx(kPi * kPi / 2.0).epsilon(1e-12));

  Rng rng(13);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(0.1, 30.0);
    CHECK(sf::trigamma(x) - sf::trigamma(x + 1.0) ==
          doctest::Approx(1.0 / (x * x)).epsilon(1e-10));
  }
}

TEST_CASE("erf stays within the advertised 1.5e-7 of libm") {
  double worst = 0.0;
  for (int i = -4000; i <= 4000; ++i) {
    const double x = i * 1e-3;
    worst = std::max(worst, std::abs(sf::erf(x) - std::erf(x)));
  }
  CHECK(worst < 1.5e-7);
  CHECK(std::abs(sf::erf(0.0)) < 1.5e-7);
  CHECK(sf::erf(-1.25) == -sf::erf(1.25));
}

TEST_CASE("normal cdf/icdf round trip") {
  for (int i = -40; i <= 40; ++i) {
    const double x = i * 0.1;
    const double p = sf::normal_cdf(x);
    CHECK(sf::normal_icdf(p) == doctest::Approx(x).epsilon(2e-6));
  }
  CHECK(std::abs(sf::normal_cdf(0.0) - 0.5) < 1e-9);
  CHECK_THROWS_AS((void)sf::normal_icdf(0.0), std::domain_error);
  CHECK_THROWS_AS((void)sf::normal_icdf(1.0), std::domain_error);
}

TEST_CASE("softplus and sigmoid") {
  CHECK(sf::softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(sf::softplus(40.0) == doctest::Approx(40.0));
  CHECK(sf::sigmoid(0.0) == doctest::Approx(0.5));
  Rng rng(14);
  for (int i = 0; i < 500; ++i) {
    const double x = rng.uniform(-20.0, 20.0);
    // softplus' = sigmoid
    const double h = 1e-6;
    const double fd = (sf::softplus(x + h) - sf::softplus(x - h)) / (2.0 * h);
    CHECK(sf::sigmoid(x) == doctest::Approx(fd).epsilon(1e-6));
  }
}
