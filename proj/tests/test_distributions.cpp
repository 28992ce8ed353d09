#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scenegen/distributions.hpp"
#include "scenegen/policy.hpp"

using namespace scenegen;

namespace {

constexpr double kLn2 = 0.69314718055994530942;

// Tanh-sinh quadrature of f(u, log p(u)) du over (0, 1): the double
// exponential transform tames the endpoint singularities of the Beta
// density, so the estimate converges far below the 1e-6 targets.
double beta_quad(double a, double b,
                 const std::function<double(double, double)>& f) {
  const double kHalfPi = 1.5707963267948966;
  const double h = 1e-3;
  const int n = 4000;
  double acc = 0.0;
  for (int i = -n; i <= n; ++i) {
    const double t = i * h;
    const double s = kHalfPi * std::sinh(t);
    const double u = 0.5 * (1.0 + std::tanh(s));
    if (u <= 0.0 || u >= 1.0) continue;
    const double w = 0.5 * kHalfPi * std::cosh(t) / std::pow(std::cosh(s), 2);
    acc += w * f(u, beta_log_prob(a, b, u));
  }
  return acc * h;
}

double simpson(const std::function<double(double)>& f, double lo, double hi,
               int n = 200000) {
  const double h = (hi - lo) / n;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("Beta(1,1) is the uniform distribution") {
  CHECK(beta_entropy(1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(beta_log_prob(1.0, 1.0, 0.3) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(beta_log_prob(1.0, 1.0, 0.9) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("Beta(2,2) anchors") {
  CHECK(beta_log_prob(2.0, 2.0, 0.5) ==
        doctest::Approx(std::log(1.5)).epsilon(1e-12));
  // Entropy against -integral p ln p.
  const double h_quad =
      beta_quad(2.0, 2.0, [](double, double logp) { return -logp * std::exp(logp); });
  CHECK(beta_entropy(2.0, 2.0) == doctest::Approx(h_quad).epsilon(1e-9));
  CHECK(beta_entropy(2.0, 2.0) == doctest::Approx(-0.1251).epsilon(1e-3));
}

TEST_CASE("Beta density integrates to one and entropy matches quadrature") {
  const double grid[] = {0.5, 1.0, 2.0, 5.0, 10.0};
  for (const double a : grid) {
    for (const double b : grid) {
      const double mass =
          beta_quad(a, b, [](double, double logp) { return std::exp(logp); });
      CHECK(std::abs(mass - 1.0) < 1e-6);
      const double h_quad = beta_quad(
          a, b, [](double, double logp) { return -logp * std::exp(logp); });
      CHECK(std::abs(beta_entropy(a, b) - h_quad) < 1e-6);
    }
  }
}

TEST_CASE("beta log-prob domain errors") {
  CHECK_THROWS_AS((void)beta_log_prob(2.0, 2.0, 0.0), std::domain_error);
  CHECK_THROWS_AS((void)beta_log_prob(2.0, 2.0, 1.0), std::domain_error);
  CHECK_THROWS_AS((void)beta_log_prob(-1.0, 2.0, 0.5), std::domain_error);
}

TEST_CASE("beta log-prob and entropy gradients match finite differences") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = rng.uniform(0.6, 9.0);
    const double b = rng.uniform(0.6, 9.0);
    const double u = rng.uniform(0.05, 0.95);
    double da, db;
    beta_log_prob_grad(a, b, u, da, db);
    const double h = 1e-6;
    const double fd_a =
        (beta_log_prob(a + h, b, u) - beta_log_prob(a - h, b, u)) / (2 * h);
    const double fd_b =
        (beta_log_prob(a, b + h, u) - beta_log_prob(a, b - h, u)) / (2 * h);
    CHECK(da == doctest::Approx(fd_a).epsilon(1e-5));
    CHECK(db == doctest::Approx(fd_b).epsilon(1e-5));

    beta_entropy_grad(a, b, da, db);
    const double fe_a = (beta_entropy(a + h, b) - beta_entropy(a - h, b)) / (2 * h);
    const double fe_b = (beta_entropy(a, b + h) - beta_entropy(a, b - h)) / (2 * h);
    CHECK(da == doctest::Approx(fe_a).epsilon(1e-5));
    CHECK(db == doctest::Approx(fe_b).epsilon(1e-5));
  }
}

TEST_CASE("gamma and beta sampling statistics") {
  Rng rng(22);
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += sample_gamma(3.0, rng);
  CHECK(acc / n == doctest::Approx(3.0).epsilon(0.02));

  // Mapped action mean for alpha=5, beta=2: 2 E[u] - 1 = 3/7 within 3 sigma.
  double mean_a = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = sample_beta(5.0, 2.0, rng);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    mean_a += 2.0 * u - 1.0;
  }
  mean_a /= n;
  const double var_a = 4.0 * (5.0 * 2.0) / (49.0 * 8.0);
  const double sigma = 3.0 * std::sqrt(var_a / n);
  CHECK(std::abs(mean_a - 3.0 / 7.0) < sigma);
}

TEST_CASE("truncated normal: normalization, uniform limit, bounds") {
  // sigma = 1: density integrates to 1 over [-1, 1].
  const double mass = simpson(
      [](double x) { return std::exp(trunc_normal_log_prob(0.0, 1.0, x)); },
      -1.0 + 1e-12, 1.0 - 1e-12);
  CHECK(std::abs(mass - 1.0) < 1e-6);

  // sigma -> infinity approaches the uniform density 1/2.
  for (const double x : {-0.9, -0.3, 0.0, 0.4, 0.8}) {
    CHECK(std::abs(trunc_normal_log_prob(0.0, 100.0, x) + kLn2) < 1e-3);
  }

  Rng rng(23);
  for (int i = 0; i < 100000; ++i) {
    const double x = sample_trunc_normal(rng.uniform(-1.0, 1.0),
                                         rng.uniform(0.05, 3.0), rng);
    CHECK(x > -1.0);
    CHECK(x < 1.0);
  }

  CHECK_THROWS_AS((void)trunc_normal_log_prob(0.0, 0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS((void)sample_trunc_normal(0.0, -1.0, rng), std::domain_error);
}

TEST_CASE("truncated normal entropy matches quadrature and gradients match FD") {
  Rng rng(24);
  for (int trial = 0; trial < 60; ++trial) {
    const double mu = rng.uniform(-0.8, 0.8);
    const double s = rng.uniform(0.1, 2.0);
    const double h_quad = simpson(
        [&](double x) {
          const double lp = trunc_normal_log_prob(mu, s, x);
          return -lp * std::exp(lp);
        },
        -1.0 + 1e-12, 1.0 - 1e-12, 20000);
    CHECK(trunc_normal_entropy(mu, s) == doctest::Approx(h_quad).epsilon(1e-5));

    const double x = rng.uniform(-0.95, 0.95);
    double dmu, dsigma;
    trunc_normal_log_prob_grad(mu, s, x, -1.0, 1.0, dmu, dsigma);
    const double h = 1e-6;
    const double fd_mu = (trunc_normal_log_prob(mu + h, s, x) -
                          trunc_normal_log_prob(mu - h, s, x)) /
                         (2 * h);
    const double fd_s = (trunc_normal_log_prob(mu, s + h, x) -
                         trunc_normal_log_prob(mu, s - h, x)) /
                        (2 * h);
    CHECK(dmu == doctest::Approx(fd_mu).epsilon(2e-5));
    CHECK(dsigma == doctest::Approx(fd_s).epsilon(2e-5));

    trunc_normal_entropy_grad(mu, s, -1.0, 1.0, dmu, dsigma);
    const double fe_mu =
        (trunc_normal_entropy(mu + h, s) - trunc_normal_entropy(mu - h, s)) /
        (2 * h);
    const double fe_s =
        (trunc_normal_entropy(mu, s + h) - trunc_normal_entropy(mu, s - h)) /
        (2 * h);
    CHECK(dmu == doctest::Approx(fe_mu).epsilon(2e-5));
    CHECK(dsigma == doctest::Approx(fe_s).epsilon(2e-5));
  }
}

TEST_CASE("policy heads: uniform Beta maps to the -4 ln 2 action density") {
  Rng rng(25);
  ActorCritic policy(6, PolicyHead::Beta, rng, 8, 3);
  PolicyOutput out;
  out.head = PolicyHead::Beta;
  out.alpha = Vec4::Ones();
  out.beta = Vec4::Ones();
  ActionSample s;
  s.u = Vec4(0.3, 0.7, 0.5, 0.9);
  s.a = 2.0 * s.u - Vec4::Ones();
  CHECK(policy.action_log_prob(out, s) ==
        doctest::Approx(-4.0 * kLn2).epsilon(1e-12));
  // Entropy in action space: uniform on [-1,1]^4 has entropy 4 ln 2.
  CHECK(policy.entropy(out) == doctest::Approx(4.0 * kLn2).epsilon(1e-12));
}

TEST_CASE("sampled actions always stay strictly inside the box") {
  Rng rng(26);
  ActorCritic policy(5, PolicyHead::Beta, rng, 8, 3);
  const VectorXd obs = VectorXd::Random(5);
  for (int i = 0; i < 20000; ++i) {
    const ActionSample s = policy.sample_action(obs, rng);
    for (int k = 0; k < 4; ++k) {
      CHECK(s.a[k] > -1.0);
      CHECK(s.a[k] < 1.0);
    }
    CHECK(std::isfinite(s.log_prob));
  }
  // Beta-head parameters exceed 1, so the per-dim mode is interior.
  const PolicyOutput out = policy.actor_forward(obs);
  for (int k = 0; k < 4; ++k) {
    CHECK(out.alpha[k] > 1.0);
    CHECK(out.beta[k] > 1.0);
    const double mode = (out.alpha[k] - 1.0) / (out.alpha[k] + out.beta[k] - 2.0);
    CHECK(std::isfinite(mode));
  }
}

TEST_CASE("policy log-prob/entropy gradients w.r.t. raw outputs match FD") {
  Rng rng(27);
  for (const PolicyHead head : {PolicyHead::Beta, PolicyHead::TruncNormal}) {
    ActorCritic policy(4, head, rng, 8, 3);
    for (int trial = 0; trial < 40; ++trial) {
      Raw8 raw;
      for (int k = 0; k < 8; ++k) raw[k] = rng.uniform(-1.5, 1.5);
      const PolicyOutput out = policy.head_from_raw(raw);
      ActionSample s = policy.sample_from_output(out, rng);

      const Raw8 glp = policy.log_prob_grad_raw(out, s);
      const Raw8 gh = policy.entropy_grad_raw(out);
      const double h = 1e-6;
      for (int k = 0; k < 8; ++k) {
        Raw8 rp = raw, rm = raw;
        rp[k] += h;
        rm[k] -= h;
        const double lp_p =
            policy.action_log_prob(policy.head_from_raw(rp), s);
        const double lp_m =
            policy.action_log_prob(policy.head_from_raw(rm), s);
        CHECK(glp[k] == doctest::Approx((lp_p - lp_m) / (2 * h)).epsilon(5e-4));
        const double h_p = policy.entropy(policy.head_from_raw(rp));
        const double h_m = policy.entropy(policy.head_from_raw(rm));
        CHECK(gh[k] == doctest::Approx((h_p - h_m) / (2 * h)).epsilon(5e-4));
      }
    }
  }
}

TEST_CASE("checkpoints round trip byte-stably") {
  Rng rng(28);
  Checkpoint ckpt;
  ckpt.policy = ActorCritic(7, PolicyHead::Beta, rng, 16, 3);
  ckpt.actor_adam.init(ckpt.policy.actor().parameter_count());
  ckpt.critic_adam.init(ckpt.policy.critic().parameter_count());
  ckpt.actor_adam.t = 12;
  ckpt.meta = {{"note", "unit"}};

  const std::string once = checkpoint_to_json(ckpt).dump(2);
  const Checkpoint back = checkpoint_from_json(nlohmann::json::parse(once));
  const std::string twice = checkpoint_to_json(back).dump(2);
  CHECK(once == twice);
  CHECK(back.policy.actor().parameters_flat() ==
        ckpt.policy.actor().parameters_flat());
  CHECK(back.actor_adam.t == 12);
  CHECK(back.policy.head() == PolicyHead::Beta);

  const VectorXd obs = VectorXd::Random(7);
  CHECK(back.policy.value(obs) == ckpt.policy.value(obs));
}
