#pragma once

#include <cmath>
#include <cstdint>

namespace mdsearch {

struct CI {
    double lo = 0.0;
    double hi = 0.0;
};

// Wilson score interval for a binomial proportion (default 95%).
inline CI wilson_ci(long long successes, long long n, double z = 1.959963984540054) {
    if (n <= 0) return {0.0, 1.0};
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Normal-approximation CI for a mean given sum and sum of squares.
inline CI mean_ci(double sum, double sum_sq, long long n, double z = 1.959963984540054) {
    if (n <= 0) return {0.0, 0.0};
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    const double half = n > 1 ? z * std::sqrt(var / n) : 0.0;
    return {mean - half, mean + half};
}

// Accumulator for the restart identity E[tau]*(1 - Pr(erase)) = block length.
// tau is the realized per-trial stopping time; e is the FIRST-attempt erasure
// indicator (an iid Bernoulli, unlike later attempts), so the identity is a
// genuine statistical check rather than algebra. The 95% half-width comes
// from the delta method on g(T,p) = T(1-p).
struct RestartIdentity {
    long long n = 0;
    double tau_sum = 0.0, tau_sq = 0.0;
    long long e_sum = 0;
    double tau_e_sum = 0.0;

    void add(double tau, int e_first) {
        ++n;
        tau_sum += tau;
        tau_sq += tau * tau;
        e_sum += e_first;
        tau_e_sum += tau * e_first;
    }
    void merge(const RestartIdentity& o) {
        n += o.n;
        tau_sum += o.tau_sum;
        tau_sq += o.tau_sq;
        e_sum += o.e_sum;
        tau_e_sum += o.tau_e_sum;
    }
    double deviation(double block_length) const {
        if (n == 0) return 0.0;
        const double t = tau_sum / n, p = static_cast<double>(e_sum) / n;
        return std::abs(t * (1.0 - p) - block_length);
    }
    double halfwidth(double z = 1.959963984540054) const {
        if (n <= 1) return 0.0;
        const double t = tau_sum / n, p = static_cast<double>(e_sum) / n;
        const double var_t = std::max(0.0, tau_sq / n - t * t);
        const double var_e = p * (1.0 - p);
        const double cov = tau_e_sum / n - t * p;
        const double var_g = ((1.0 - p) * (1.0 - p) * var_t + t * t * var_e -
                              2.0 * (1.0 - p) * t * cov) /
                             n;
        return z * std::sqrt(std::max(0.0, var_g));
    }
};

// Acklam's rational approximation to the standard normal quantile (~1e-9
// relative error), used for Neyman-Pearson threshold defaults.
inline double normal_quantile(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > phigh) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace mdsearch
