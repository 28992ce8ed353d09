#pragma once

// Scalar special functions used by the distribution heads. Implemented
// in-repo so the numeric path has no external dependencies:
//   lgamma  — Lanczos approximation (g = 7, 9 coefficients)
//   digamma/trigamma — upward recurrence + asymptotic series
//   erf     — Abramowitz & Stegun 7.1.26 (max abs error < 1.5e-7)

namespace scenegen::sf {

double lgamma(double x);
double digamma(double x);
double trigamma(double x);
double erf(double x);

// log B(a, b) = lgamma(a) + lgamma(b) - lgamma(a + b)
double log_beta(double a, double b);

// Standard normal pdf/cdf and inverse cdf (Acklam rational approximation
// with one Halley refinement).
double normal_pdf(double x);
double normal_cdf(double x);
double normal_icdf(double p);

double softplus(double x);
double sigmoid(double x);

}  // namespace scenegen::sf
