#pragma once

#include <algorithm>
#include <cmath>

#include "qcs/errors.hpp"

namespace qcs {

inline double std_normal_pdf(double t) {
    static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);
    return inv_sqrt_2pi * std::exp(-0.5 * t * t);
}

inline double std_normal_cdf(double t) { return 0.5 * std::erfc(-t * M_SQRT1_2); }

// Scaled complementary error function exp(x^2) * erfc(x) for x >= 0.
// Direct evaluation is exact until erfc underflows; beyond that the
// asymptotic series takes over.
inline double erfcx_nonneg(double x) {
    if (x < 26.0) return std::exp(x * x) * std::erfc(x);
    const double ix2 = 1.0 / (x * x);
    const double series =
        1.0 + ix2 * (-0.5 + ix2 * (0.75 + ix2 * (-1.875 + ix2 * 6.5625)));
    return series / (x * std::sqrt(M_PI));
}

namespace detail {

// Mean of N(0,1) truncated to [alpha, beta] with 0 <= alpha <= beta,
// written so the exp(-alpha^2/2) factor cancels between numerator and
// denominator; stable arbitrarily far into the tail.
inline double upper_tail_trunc_mean(double alpha, double beta) {
    const double g = std::exp(-0.5 * (beta - alpha) * (beta + alpha));
    const double denom = erfcx_nonneg(alpha * M_SQRT1_2) - g * erfcx_nonneg(beta * M_SQRT1_2);
    if (denom <= 0.0) return alpha;  // cell mass underflow: nearer endpoint
    return std::sqrt(2.0 / M_PI) * (1.0 - g) / denom;
}

}  // namespace detail

// E[X | a <= X <= b] for X ~ N(mu, sigma^2). Result always lies in [a, b].
inline double trunc_normal_mean(double mu, double sigma, double a, double b) {
    if (sigma <= 0.0) throw InvalidConfigError("trunc_normal_mean: sigma must be positive");
    if (a > b) throw InvalidConfigError("trunc_normal_mean: empty interval");
    const double alpha = (a - mu) / sigma;
    const double beta = (b - mu) / sigma;
    double r;
    if (alpha >= 0.0) {
        r = detail::upper_tail_trunc_mean(alpha, beta);
        return std::clamp(mu + sigma * r, a, b);
    }
    if (beta <= 0.0) {
        r = detail::upper_tail_trunc_mean(-beta, -alpha);
        return std::clamp(mu - sigma * r, a, b);
    }
    const double mass = std_normal_cdf(beta) - std_normal_cdf(alpha);
    if (mass <= 0.0) return std::clamp(mu, a, b);
    r = (std_normal_pdf(alpha) - std_normal_pdf(beta)) / mass;
    return std::clamp(mu + sigma * r, a, b);
}

// E[X | X >= a].
inline double trunc_normal_mean_lower(double mu, double sigma, double a) {
    if (sigma <= 0.0) throw InvalidConfigError("trunc_normal_mean_lower: sigma must be positive");
    const double alpha = (a - mu) / sigma;
    double hazard;  // pdf(alpha) / (1 - cdf(alpha))
    if (alpha >= 0.0) {
        hazard = std::sqrt(2.0 / M_PI) / erfcx_nonneg(alpha * M_SQRT1_2);
    } else {
        const double tail = 1.0 - std_normal_cdf(alpha);
        hazard = std_normal_pdf(alpha) / tail;
    }
    return std::max(mu + sigma * hazard, a);
}

// E[X | X <= b].
inline double trunc_normal_mean_upper(double mu, double sigma, double b) {
    return -trunc_normal_mean_lower(-mu, sigma, -b);
}

}  // namespace qcs
