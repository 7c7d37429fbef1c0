#include <algorithm>
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "qcs/quantizer.hpp"
#include "qcs/rng.hpp"
#include "qcs/wire.hpp"
#include "test_support.hpp"

using qcs::QuantizerConfig;

TEST_CASE("cell width arithmetic") {
    CHECK(qcs::cell_width(1.0, 2) == 0.5);
    CHECK(qcs::cell_width(1.0, 1) == 1.0);
    CHECK(qcs::cell_width(0.35, 2) == Catch::Approx(0.175).margin(1e-15));
    CHECK_THROWS_AS(qcs::cell_width(0.0, 2), qcs::InvalidConfigError);
    CHECK_THROWS_AS(qcs::cell_width(-1.0, 2), qcs::InvalidConfigError);
    CHECK_THROWS_AS(qcs::cell_width(1.0, 0), qcs::InvalidConfigError);
}

TEST_CASE("quantizer config invariants") {
    const QuantizerConfig cfg(1.0, 4);
    CHECK(cfg.levels() == 16);
    CHECK(cfg.delta() == 2.0 * cfg.v_ref / 16.0);
    CHECK_THROWS_AS(QuantizerConfig(1.0, 1), qcs::InvalidConfigError);
    CHECK_THROWS_AS(QuantizerConfig(1.0, 17), qcs::InvalidConfigError);
    CHECK_THROWS_AS(QuantizerConfig(-0.5, 4), qcs::InvalidConfigError);
}

TEST_CASE("quantize cell membership and saturation") {
    const QuantizerConfig cfg(1.0, 2);
    const auto level = [&](double v) {
        return qcs::quantize(Eigen::VectorXd::Constant(1, v), cfg)[0];
    };
    CHECK(level(0.3) == 2);    // cell [0, 0.5)
    CHECK(level(-1.2) == 0);   // saturated low
    CHECK(level(0.5) == 3);    // boundary joins the upper cell
    CHECK(level(1.7) == 3);    // saturated high
    CHECK(level(-1.0) == 0);   // bottom edge
    CHECK(level(1.0) == 3);    // top edge stays in the closed top cell
}

TEST_CASE("quantize is monotone non-decreasing") {
    const QuantizerConfig cfg(0.8, 3);
    qcs::Rng rng(11);
    Eigen::VectorXd v(512);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = 2.5 * (rng.uniform01() - 0.5);
    std::sort(v.begin(), v.end());
    const auto levels = qcs::quantize(v, cfg);
    for (std::size_t i = 1; i < levels.size(); ++i) CHECK(levels[i] >= levels[i - 1]);
}

TEST_CASE("dequantize mid-points") {
    const QuantizerConfig cfg(1.0, 2);
    CHECK(qcs::dequantize({2}, cfg)[0] == Catch::Approx(0.25).margin(1e-15));
    CHECK(qcs::dequantize({0}, cfg)[0] == Catch::Approx(-0.75).margin(1e-15));
    for (std::uint32_t k = 0; k < cfg.levels(); ++k) {
        const double v = qcs::dequantize({k}, cfg)[0];
        CHECK(v > -cfg.v_ref);
        CHECK(v < cfg.v_ref);
    }
    CHECK_THROWS_AS(qcs::dequantize({4}, cfg), qcs::CorruptPayloadError);
}

TEST_CASE("round trip stays within half a cell for non-saturated input") {
    const QuantizerConfig cfg(1.3, 5);
    const double delta = cfg.delta();
    qcs::Rng rng(17);
    Eigen::VectorXd v(4096);
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v[i] = cfg.v_ref * (2.0 * rng.uniform01() - 1.0);
    const Eigen::VectorXd back = qcs::dequantize(qcs::quantize(v, cfg), cfg);
    CHECK((back - v).cwiseAbs().maxCoeff() <= delta / 2.0 + 1e-12);
}

TEST_CASE("rounding error variance formula") {
    CHECK(qcs::error_variance(0.5) == Catch::Approx(0.5 * 0.5 / 12.0).epsilon(1e-15));
    CHECK(qcs::error_variance(1.0) == Catch::Approx(1.0 / 12.0).epsilon(1e-15));
    CHECK_THROWS_AS(qcs::error_variance(0.0), qcs::InvalidConfigError);
}

TEST_CASE("rounding error of uniform input is uniform on [-delta/2, delta/2]") {
    const QuantizerConfig cfg(1.0, 4);
    const double delta = cfg.delta();
    constexpr int samples = 1000000;
    qcs::Rng rng(23);
    std::vector<double> err(samples);
    double var = 0.0;
    Eigen::VectorXd chunk(1);
    for (int i = 0; i < samples; ++i) {
        const double x = 2.0 * rng.uniform01() - 1.0;
        chunk[0] = x;
        const double e = qcs::dequantize(qcs::quantize(chunk, cfg), cfg)[0] - x;
        err[static_cast<std::size_t>(i)] = e;
        var += e * e;
    }
    var /= samples;
    CHECK(std::abs(var - qcs::error_variance(delta)) / qcs::error_variance(delta) < 0.02);

    // Kolmogorov-Smirnov distance against the uniform CDF on [-delta/2, delta/2].
    std::sort(err.begin(), err.end());
    double ks = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double f = (err[static_cast<std::size_t>(i)] + delta / 2.0) / delta;
        const double lo = static_cast<double>(i) / samples;
        const double hi = static_cast<double>(i + 1) / samples;
        ks = std::max({ks, std::abs(f - lo), std::abs(f - hi)});
    }
    CHECK(ks < 0.01);
}

TEST_CASE("bit packing layout") {
    CHECK(qcs::pack_bits({3, 0, 1, 2}, 2) == std::vector<std::uint8_t>{0x93});
    CHECK(qcs::pack_bits({1}, 2) == std::vector<std::uint8_t>{0x01});
    CHECK_THROWS_AS(qcs::pack_bits({4}, 2), qcs::InvalidConfigError);
    CHECK_THROWS_AS(qcs::pack_bits({0}, 0), qcs::InvalidConfigError);
    CHECK_THROWS_AS(qcs::unpack_bits({0x00}, 8, 2), qcs::CorruptPayloadError);
}

TEST_CASE("bit packing size and inverse") {
    qcs::Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const int bits = 1 + static_cast<int>(rng.uniform_below(16));
        const std::size_t count = 1 + rng.uniform_below(50);
        std::vector<std::uint32_t> levels(count);
        for (auto& lv : levels)
            lv = static_cast<std::uint32_t>(rng.uniform_below(std::uint64_t{1} << bits));
        const auto bytes = qcs::pack_bits(levels, bits);
        CHECK(bytes.size() == (count * static_cast<std::size_t>(bits) + 7) / 8);
        CHECK(qcs::unpack_bits(bytes, count, bits) == levels);
    }
}

TEST_CASE("payload serialization round trip") {
    qcs::QuantizedPayload p;
    p.header = {128, 64, 2, 12, 0.7131, 99, 5};
    p.levels.assign(64, 0);
    qcs::Rng rng(41);
    for (auto& lv : p.levels) lv = static_cast<std::uint32_t>(rng.uniform_below(4));
    const auto bytes = qcs::serialize_payload(p);
    CHECK(bytes.size() == 35 + 16);  // header + ceil(64*2/8) body
    CHECK(qcs::parse_payload(bytes) == p);
}

TEST_CASE("payload corruption is detected") {
    qcs::QuantizedPayload p;
    p.header = {16, 8, 3, 12, 1.0, 7, 0};
    p.levels = {0, 1, 2, 3, 4, 5, 6, 7};
    auto bytes = qcs::serialize_payload(p);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(qcs::parse_payload(bad_magic), qcs::CorruptPayloadError);

    auto bad_version = bytes;
    bad_version[4] = 9;
    CHECK_THROWS_AS(qcs::parse_payload(bad_version), qcs::CorruptPayloadError);

    auto truncated = bytes;
    truncated.pop_back();
    CHECK_THROWS_AS(qcs::parse_payload(truncated), qcs::CorruptPayloadError);

    CHECK_THROWS_AS(qcs::serialize_payload(qcs::QuantizedPayload{{16, 9, 3, 12, 1.0, 7, 0},
                                                                 {0, 1, 2}}),
                    qcs::InvalidConfigError);
}
