#include "scenegen/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scenegen/special.hpp"

namespace scenegen {

namespace {
constexpr double kUnitClamp = 1e-9;  // keep samples strictly inside the support

void check_beta_params(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("beta parameters must be positive");
  }
}

void check_sigma(double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("sigma must be positive");
}
}  // namespace

double beta_log_prob(double a, double b, double u) {
  check_beta_params(a, b);
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("beta_log_prob: u must be strictly inside (0, 1)");
  }
  return (a - 1.0) * std::log(u) + (b - 1.0) * std::log1p(-u) - sf::log_beta(a, b);
}

double beta_entropy(double a, double b) {
  check_beta_params(a, b);
  return sf::log_beta(a, b) - (a - 1.0) * sf::digamma(a) -
         (b - 1.0) * sf::digamma(b) + (a + b - 2.0) * sf::digamma(a + b);
}

void beta_log_prob_grad(double a, double b, double u, double& d_da,
                        double& d_db) {
  check_beta_params(a, b);
  const double psi_ab = sf::digamma(a + b);
  d_da = std::log(u) - sf::digamma(a) + psi_ab;
  d_db = std::log1p(-u) - sf::digamma(b) + psi_ab;
}

void beta_entropy_grad(double a, double b, double& d_da, double& d_db) {
  check_beta_params(a, b);
  const double tri_ab = sf::trigamma(a + b);
  d_da = -(a - 1.0) * sf::trigamma(a) + (a + b - 2.0) * tri_ab;
  d_db = -(b - 1.0) * sf::trigamma(b) + (a + b - 2.0) * tri_ab;
}

double sample_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw std::domain_error("gamma shape must be positive");
  if (shape < 1.0) {
    // Boost: Gamma(a) = Gamma(a + 1) * U^{1/a}
    const double u = std::max(rng.uniform(), 1e-300);
    return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(std::max(u, 1e-300)) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

double sample_beta(double a, double b, Rng& rng) {
  check_beta_params(a, b);
  const double x = sample_gamma(a, rng);
  const double y = sample_gamma(b, rng);
  const double u = x / (x + y);
  return std::clamp(u, kUnitClamp, 1.0 - kUnitClamp);
}

double trunc_normal_log_prob(double mu, double sigma, double x, double lo,
                             double hi) {
  check_sigma(sigma);
  if (x < lo || x > hi) {
    throw std::domain_error("trunc_normal_log_prob: x outside the support");
  }
  const double xt = (x - mu) / sigma;
  const double at = (lo - mu) / sigma;
  const double bt = (hi - mu) / sigma;
  const double z = std::max(sf::normal_cdf(bt) - sf::normal_cdf(at), 1e-300);
  return -0.5 * xt * xt - std::log(sigma) - 0.91893853320467274178 - std::log(z);
}

double trunc_normal_entropy(double mu, double sigma, double lo, double hi) {
  check_sigma(sigma);
  const double at = (lo - mu) / sigma;
  const double bt = (hi - mu) / sigma;
  const double z = std::max(sf::normal_cdf(bt) - sf::normal_cdf(at), 1e-300);
  const double g = at * sf::normal_pdf(at) - bt * sf::normal_pdf(bt);
  return 0.5 * std::log(2.0 * 3.14159265358979323846 * 2.718281828459045235) +
         std::log(sigma * z) + g / (2.0 * z);
}

void trunc_normal_log_prob_grad(double mu, double sigma, double x, double lo,
                                double hi, double& d_dmu, double& d_dsigma) {
  check_sigma(sigma);
  const double xt = (x - mu) / sigma;
  const double at = (lo - mu) / sigma;
  const double bt = (hi - mu) / sigma;
  const double pa = sf::normal_pdf(at);
  const double pb = sf::normal_pdf(bt);
  const double z = std::max(sf::normal_cdf(bt) - sf::normal_cdf(at), 1e-300);
  // dZ/dmu = (pa - pb)/sigma ; dZ/dsigma = (at*pa - bt*pb)/sigma
  d_dmu = xt / sigma - (pa - pb) / (sigma * z);
  d_dsigma = (xt * xt - 1.0) / sigma - (at * pa - bt * pb) / (sigma * z);
}

void trunc_normal_entropy_grad(double mu, double sigma, double lo, double hi,
                               double& d_dmu, double& d_dsigma) {
  check_sigma(sigma);
  const double at = (lo - mu) / sigma;
  const double bt = (hi - mu) / sigma;
  const double pa = sf::normal_pdf(at);
  const double pb = sf::normal_pdf(bt);
  const double z = std::max(sf::normal_cdf(bt) - sf::normal_cdf(at), 1e-300);
  const double g = at * pa - bt * pb;
  // d(t*phi(t))/dt = phi(t) (1 - t^2)
  const double dz_dmu = (pa - pb) / sigma;
  const double dg_dmu = (pb * (1.0 - bt * bt) - pa * (1.0 - at * at)) / sigma;
  d_dmu = dz_dmu / z + dg_dmu / (2.0 * z) - g * dz_dmu / (2.0 * z * z);
  const double dz_dsigma = g / sigma;
  const double dg_dsigma =
      (bt * pb * (1.0 - bt * bt) - at * pa * (1.0 - at * at)) / sigma;
  d_dsigma = 1.0 / sigma + dz_dsigma / z + dg_dsigma / (2.0 * z) -
             g * dz_dsigma / (2.0 * z * z);
}

double sample_trunc_normal(double mu, double sigma, Rng& rng, double lo,
                           double hi) {
  check_sigma(sigma);
  const double ca = sf::normal_cdf((lo - mu) / sigma);
  const double cb = sf::normal_cdf((hi - mu) / sigma);
  const double span = std::max(cb - ca, 1e-12);
  const double p = std::clamp(ca + span * rng.uniform(), 1e-12, 1.0 - 1e-12);
  const double x = mu + sigma * sf::normal_icdf(p);
  const double margin = kUnitClamp * (hi - lo);
  return std::clamp(x, lo + margin, hi - margin);
}

}  // namespace scenegen
