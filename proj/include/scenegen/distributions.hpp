#pragma once

#include "scenegen/rng.hpp"

namespace scenegen {

// ---------------------------------------------------------------------------
// Beta distribution on (0, 1)

// log p(u; a, b); throws std::domain_error for u at {0, 1} or a, b <= 0.
double beta_log_prob(double a, double b, double u);

// Differential entropy:
//   ln B(a,b) - (a-1) psi(a) - (b-1) psi(b) + (a+b-2) psi(a+b)
double beta_entropy(double a, double b);

void beta_log_prob_grad(double a, double b, double u, double& d_da, double& d_db);
void beta_entropy_grad(double a, double b, double& d_da, double& d_db);

// Marsaglia-Tsang gamma sampling (shape, unit scale).
double sample_gamma(double shape, Rng& rng);

// Draws u ~ Beta(a, b) via two gamma draws; result strictly inside (0, 1).
double sample_beta(double a, double b, Rng& rng);

// ---------------------------------------------------------------------------
// Normal distribution truncated to [lo, hi]

double trunc_normal_log_prob(double mu, double sigma, double x, double lo = -1.0,
                             double hi = 1.0);
double trunc_normal_entropy(double mu, double sigma, double lo = -1.0,
                            double hi = 1.0);
void trunc_normal_log_prob_grad(double mu, double sigma, double x, double lo,
                                double hi, double& d_dmu, double& d_dsigma);
void trunc_normal_entropy_grad(double mu, double sigma, double lo, double hi,
                               double& d_dmu, double& d_dsigma);

// Inverse-CDF sampling; always lands inside (lo, hi).
double sample_trunc_normal(double mu, double sigma, Rng& rng, double lo = -1.0,
                           double hi = 1.0);

}  // namespace scenegen
