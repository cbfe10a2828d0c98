#include "cvinfer/quantiles.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cvinfer/error.hpp"

namespace cvinfer {

namespace {

void check_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::invalid_probability,
                "probability " + std::to_string(p) + " outside (0, 1)");
  }
}

// Acklam's approximation, lower half (p <= 0.5).
double acklam_lower(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for I_x(a, b); converges quickly for x < (a+1)/(a+b+2).
double beta_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return h;
}

// I_x(a, b) given both x and y = 1 - x, so callers can pass an exactly
// computed complement.
double incomplete_beta(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log(y) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, y) / b;
}

// Upper tail P(T > t) for t >= 0.
double t_upper_tail(double t, double df) {
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  return 0.5 * incomplete_beta(df / 2.0, 0.5, x, y);
}

double t_density(double t, double df) {
  const double log_norm = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                          0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_norm - (df + 1.0) / 2.0 * std::log1p(t * t / df));
}

}  // namespace

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  check_probability(p);
  if (p > 0.5) return -normal_quantile(1.0 - p);
  if (p == 0.5) return 0.0;
  double x = acklam_lower(p);
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::invalid_input, "incomplete beta needs a, b > 0 and x in [0, 1]");
  }
  return incomplete_beta(a, b, x, 1.0 - x);
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::invalid_input, "degrees of freedom must be positive");
  if (std::isnan(t)) return t;
  if (t >= 0.0) return 1.0 - t_upper_tail(t, df);
  return t_upper_tail(-t, df);
}

double t_quantile(double p, double df) {
  check_probability(p);
  if (!(df >= 1.0)) {
    throw Error(ErrorCode::invalid_probability, "degrees of freedom must be >= 1");
  }
  if (p < 0.5) return -t_quantile(1.0 - p, df);
  if (p == 0.5) return 0.0;
  if (df == 1.0) return std::tan(std::numbers::pi * (p - 0.5));
  const double tail = 1.0 - p;  // exact for p >= 0.5
  if (df == 2.0) {
    return (2.0 * p - 1.0) / std::sqrt(2.0 * p * tail);
  }

  // Starting point: normal quantile with the first Cornish-Fisher correction.
  const double z = -normal_quantile(tail);
  double t = z + (z * z * z + z) / (4.0 * df);

  double lo = 0.0;
  double hi = std::max(1.0, 2.0 * t);
  while (t_upper_tail(hi, df) > tail) hi *= 2.0;
  if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);

  for (int it = 0; it < 200; ++it) {
    const double f = t_upper_tail(t, df) - tail;  // decreasing in t
    if (f > 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    double next = t + f / t_density(t, df);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-14 * std::max(1.0, std::abs(t))) return next;
    t = next;
  }
  return t;
}

}  // namespace cvinfer
