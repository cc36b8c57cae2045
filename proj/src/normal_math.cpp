#include "wlearn/normal_math.hpp"

#include <cmath>
#include <limits>

namespace wlearn::stdnormal {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

// Acklam's rational approximation, |rel err| < 1.2e-9 before polishing.
double quantile_seed(double p) {
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
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double survival(double z) { return 0.5 * std::erfc(z / kSqrt2); }

double log_cdf(double z) {
    if (z > -30.0) return std::log(cdf(z));
    // Asymptotic Mills-ratio series; error below 1e-12 for z <= -30.
    const double z2 = z * z;
    const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    return log_pdf(z) - std::log(-z) + std::log(series);
}

double quantile(double p) {
    if (std::isnan(p)) return std::numeric_limits<double>::quiet_NaN();
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    if (p > 0.5) return survival_quantile(1.0 - p);

    double z = quantile_seed(p);
    for (int i = 0; i < 2; ++i) {
        const double dens = pdf(z);
        if (dens <= 0.0) break;
        // Halley step on Phi(z) - p.
        const double e = (cdf(z) - p) / dens;
        z -= e / (1.0 + 0.5 * z * e);
    }
    return z;
}

double survival_quantile(double q) {
    if (q <= 0.0) return std::numeric_limits<double>::infinity();
    if (q >= 1.0) return -std::numeric_limits<double>::infinity();
    if (q > 0.5) return quantile(1.0 - q);

    double z = -quantile_seed(q);
    for (int i = 0; i < 2; ++i) {
        const double dens = pdf(z);
        if (dens <= 0.0) break;
        const double e = (q - survival(z)) / dens;
        z -= e / (1.0 + 0.5 * z * e);
    }
    return z;
}

}  // namespace wlearn::stdnormal
