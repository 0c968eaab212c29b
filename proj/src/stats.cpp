#include "lago/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lago/errors.hpp"

namespace lago::stats {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488016887242097;
}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

// Wichura's algorithm AS 241 (PPND16): rational approximations on three
// regions, giving ~16 significant digits.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("normal_quantile requires p in (0,1)");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return (q < 0.0) ? -val : val;
}

// Regularized lower incomplete gamma via series expansion (x < a+1) or the
// Lentz continued fraction for the upper tail (x >= a+1).
double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) {
    throw ValidationError("gamma_p requires x >= 0 and a > 0");
  }
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 10000; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Continued fraction for Q(a, x), modified Lentz.
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

double chi2_cdf(double x, double df) {
  if (df <= 0.0) throw ValidationError("chi2_cdf requires df > 0");
  if (x <= 0.0) return 0.0;
  return gamma_p(df / 2.0, x / 2.0);
}

namespace {
double chi2_pdf(double x, double df) {
  if (x <= 0.0) return 0.0;
  const double a = df / 2.0;
  return std::exp((a - 1.0) * std::log(x) - x / 2.0 - a * std::log(2.0) -
                  std::lgamma(a));
}
}  // namespace

double chi2_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("chi2_quantile requires p in (0,1)");
  }
  if (df <= 0.0) throw ValidationError("chi2_quantile requires df > 0");
  // Wilson-Hilferty starting point, then safeguarded Newton on the CDF.
  const double z = normal_quantile(p);
  const double t = 1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df));
  double x = df * t * t * t;
  if (!(x > 0.0) || !std::isfinite(x)) x = df;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 200; ++iter) {
    const double f = chi2_cdf(x, df) - p;
    if (f > 0.0) {
      hi = std::min(hi, x);
    } else {
      lo = std::max(lo, x);
    }
    const double d = chi2_pdf(x, df);
    double step = (d > 0.0) ? f / d : 0.0;
    double next = x - step;
    if (!(next > lo && (next < hi))) {
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : lo * 2.0 + 1.0;
    }
    if (std::fabs(next - x) <= 1e-13 * std::max(1.0, std::fabs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("quantile of empty sample");
  if (p < 0.0 || p > 1.0) throw ValidationError("quantile requires p in [0,1]");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 1) return values[0];
  const double h = static_cast<double>(n - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace lago::stats
