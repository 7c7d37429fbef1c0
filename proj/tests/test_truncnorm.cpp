#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "qcs/truncnorm.hpp"
#include "test_support.hpp"

using testsupport::quad_trunc_mean;

TEST_CASE("scaled complementary error function") {
    for (double x : {0.0, 0.5, 1.0, 3.0, 7.5, 12.0, 20.0, 25.9}) {
        const double direct = std::exp(x * x) * std::erfc(x);
        CHECK(qcs::erfcx_nonneg(x) == Catch::Approx(direct).epsilon(1e-12));
    }
    // Beyond the representable range of exp(x^2) the asymptotic series takes
    // over; check continuity across the switch and the leading-order form.
    const double at_switch = qcs::erfcx_nonneg(26.0);
    CHECK(at_switch == Catch::Approx(1.0 / (26.0 * std::sqrt(M_PI))).epsilon(1e-3));
    CHECK(qcs::erfcx_nonneg(1000.0) ==
          Catch::Approx(1.0 / (1000.0 * std::sqrt(M_PI))).epsilon(1e-5));
    double prev = qcs::erfcx_nonneg(0.0);
    for (double x = 0.25; x < 60.0; x += 0.25) {
        const double cur = qcs::erfcx_nonneg(x);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("two-sided truncated mean matches quadrature") {
    // Sub-sampled version of the full grid exercised by the acceptance runner.
    for (double delta : {0.1, 0.5}) {
        const double a = -delta / 2.0, b = delta / 2.0;
        for (double sigma : {delta / 10.0, delta, 10.0 * delta}) {
            for (int i = -8; i <= 8; ++i) {
                const double mu = 2.0 * delta * static_cast<double>(i) / 8.0;
                const double oracle = quad_trunc_mean(mu, sigma, a, b);
                CHECK(qcs::trunc_normal_mean(mu, sigma, a, b) ==
                      Catch::Approx(oracle).margin(1e-8));
            }
        }
    }
}

TEST_CASE("symmetry, range and monotonicity") {
    const double delta = 0.3, sigma = 0.07;
    CHECK(qcs::trunc_normal_mean(0.0, sigma, -delta / 2, delta / 2) ==
          Catch::Approx(0.0).margin(1e-15));
    double prev = -1.0;
    for (int i = -40; i <= 40; ++i) {
        const double mu = delta * static_cast<double>(i) / 10.0;
        const double m = qcs::trunc_normal_mean(mu, sigma, -delta / 2, delta / 2);
        CHECK(m >= -delta / 2);
        CHECK(m <= delta / 2);
        CHECK(m >= prev - 1e-12);
        prev = m;
        // Antisymmetry in mu for the symmetric interval.
        CHECK(m == Catch::Approx(-qcs::trunc_normal_mean(-mu, sigma, -delta / 2, delta / 2))
                       .margin(1e-12));
    }
}

TEST_CASE("deep-tail evaluation stays finite and inside the interval") {
    const double delta = 0.5;
    // Interval thousands of sigmas away: the cancel-factor form keeps working.
    const double far = qcs::trunc_normal_mean(10.0 * delta, delta / 1000.0, -delta / 2, delta / 2);
    CHECK(far <= delta / 2);
    CHECK(far >= delta / 2 - 1e-6 * delta);  // boundary layer sigma/9500
    const double far_low =
        qcs::trunc_normal_mean(-10.0 * delta, delta / 1000.0, -delta / 2, delta / 2);
    CHECK(far_low >= -delta / 2);
    CHECK(far_low <= -delta / 2 + 1e-6 * delta);
    // No NaN for absurd offsets in either direction; degenerate point interval.
    CHECK(std::isfinite(qcs::trunc_normal_mean(1e9, 1.0, -1.0, 1.0)));
    CHECK(std::isfinite(qcs::trunc_normal_mean(-1e9, 1.0, -1.0, 1.0)));
    CHECK(qcs::trunc_normal_mean(5.0, 1.0, 0.25, 0.25) == 0.25);
}

TEST_CASE("distant cell saturates to the facing edge") {
    // With the mean 10 cells away and sigma = delta/10, the conditional
    // density hugs the facing edge with boundary layer sigma^2/(mu - b)
    // = delta/950; the quadrature oracle puts the mean exactly there.
    for (double delta : {0.1, 0.5}) {
        const double sigma = delta / 10.0;
        const double m = qcs::trunc_normal_mean(10.0 * delta, sigma, -delta / 2, delta / 2);
        const double oracle = quad_trunc_mean(10.0 * delta, sigma, -delta / 2, delta / 2, 400001);
        CHECK(m == Catch::Approx(oracle).margin(1e-8));
        CHECK(m < delta / 2);
        CHECK(delta / 2 - m == Catch::Approx(delta / 950.0).epsilon(0.02));
    }
}

TEST_CASE("one-sided truncated means match quadrature") {
    const double sigma = 0.2;
    for (double bound : {-0.25, 0.0, 0.4}) {
        for (double mu : {-0.9, -0.2, 0.0, 0.3, 1.1}) {
            // Lower truncation [bound, inf): integrate far enough to cover the mass.
            const double upper = std::max(mu, bound) + 40.0 * sigma;
            const double oracle_lo = quad_trunc_mean(mu, sigma, bound, upper, 400001);
            CHECK(qcs::trunc_normal_mean_lower(mu, sigma, bound) ==
                  Catch::Approx(oracle_lo).margin(1e-8));
            const double lower = std::min(mu, bound) - 40.0 * sigma;
            const double oracle_hi = quad_trunc_mean(mu, sigma, lower, bound, 400001);
            CHECK(qcs::trunc_normal_mean_upper(mu, sigma, bound) ==
                  Catch::Approx(oracle_hi).margin(1e-8));
        }
    }
}

TEST_CASE("one-sided means stay on the correct side and handle deep tails") {
    // Mean far below a lower bound: result approaches the bound from above.
    const double m = qcs::trunc_normal_mean_lower(-100.0, 1.0, 0.0);
    CHECK(m >= 0.0);
    CHECK(m <= 0.011);  // asymptotically sigma^2/(bound - mu) = 0.01
    const double u = qcs::trunc_normal_mean_upper(100.0, 1.0, 0.0);
    CHECK(u <= 0.0);
    CHECK(u >= -0.011);
    CHECK(std::isfinite(qcs::trunc_normal_mean_lower(1e8, 1.0, 0.0)));
    CHECK(std::isfinite(qcs::trunc_normal_mean_upper(-1e8, 1.0, 0.0)));
}
