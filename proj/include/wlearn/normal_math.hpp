#pragma once

// Standard normal primitives shared by every distribution family.

namespace wlearn::stdnormal {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;

double pdf(double z);
double log_pdf(double z);

/// Phi(z), via erfc so the lower tail keeps full relative precision.
double cdf(double z);

/// 1 - Phi(z) without cancellation.
double survival(double z);

/// log Phi(z); finite far into the lower tail.
double log_cdf(double z);

/// Phi^{-1}(p) for p in (0, 1). Rational approximation polished by two
/// Newton steps on the erfc-based cdf. Returns -inf/+inf at 0/1.
double quantile(double p);

/// Inverse of the survival function: z with 1 - Phi(z) = q.
double survival_quantile(double q);

}  // namespace wlearn::stdnormal
