#pragma once

#include <vector>

namespace lago::stats {

// Standard normal CDF, accurate to ~1e-15 via the complementary error function.
double normal_cdf(double z);

// Standard normal quantile (inverse CDF) on (0,1); relative error < 1e-9.
double normal_quantile(double p);

// Chi-square CDF with df > 0 degrees of freedom (regularized lower incomplete
// gamma); relative error < 1e-12.
double chi2_cdf(double x, double df);

// Chi-square quantile on (0,1); relative error < 1e-10.
double chi2_quantile(double p, double df);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

// Sample quantile with linear interpolation between order statistics
// (the "type 7" definition: h = (n-1)p). Copies and sorts the input.
double quantile_type7(std::vector<double> values, double p);

}  // namespace lago::stats
