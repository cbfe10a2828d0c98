#pragma once

namespace cvinfer {

/// Standard normal CDF via erfc.
double normal_cdf(double x) noexcept;

/// Standard normal quantile for p in (0, 1): Acklam's rational approximation
/// (relative error about 1e-9) followed by one Halley step against
/// normal_cdf. Upper-tail arguments are reflected so refinement always runs in
/// the lower tail, where erfc keeps full relative precision.
/// Throws invalid-probability outside (0, 1).
double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b) by the modified Lentz continued
/// fraction, with the symmetry I_x(a, b) = 1 - I_{1-x}(b, a) for fast
/// convergence.
double regularized_incomplete_beta(double a, double b, double x);

/// Student t CDF with df degrees of freedom (df > 0).
double student_t_cdf(double t, double df);

/// Student t quantile: closed forms for df = 1, 2; otherwise safeguarded
/// Newton iteration on the upper tail 0.5 * I_{df/(df+t^2)}(df/2, 1/2).
/// Throws invalid-probability for p outside (0, 1) or df < 1.
double t_quantile(double p, double df);

}  // namespace cvinfer
