#pragma once

#include <span>
#include <vector>

namespace gsa {

// Standard normal c.d.f. Phi(z). Absolute error below 1e-12.
// Throws std::invalid_argument on non-finite input.
double normal_cdf(double z);

// Inverse of normal_cdf. Requires 0 < p < 1; inputs inside (0,1) are
// clamped to [1e-15, 1 - 1e-15] before inversion so results stay finite.
double normal_quantile(double p);

// Student-t c.d.f. with df degrees of freedom, evaluated through the
// regularized incomplete beta function. Requires df >= 1.
double t_cdf(double t, int df);

// Regularized incomplete beta I_x(a, b) via continued fraction (Lentz).
double regularized_incomplete_beta(double a, double b, double x);

// Order statistic at index ceil(q * len) - 1 (clamped) of the sorted values.
// Deterministic; throws on empty input.
double percentile(std::span<const double> values, double q);

struct Moments {
    double mean = 0.0;
    double stdev = 0.0;  // population form (divisor = count)
};

// Mean and population standard deviation of a sequence. Requires size >= 1.
Moments sample_moments(std::span<const double> values);

}  // namespace gsa
