#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qcs/errors.hpp"

namespace qcs {

// Cell width of a uniform quantizer spanning [-v_ref, v_ref] with B bits.
inline double cell_width(double v_ref, int bits) {
    if (v_ref <= 0.0) throw InvalidConfigError("cell_width: v_ref must be positive");
    if (bits < 1) throw InvalidConfigError("cell_width: bit depth must be at least 1");
    return 2.0 * v_ref / static_cast<double>(std::uint64_t{1} << bits);
}

// Uniform mid-point quantizer over [-v_ref, v_ref].
struct QuantizerConfig {
    double v_ref;
    int bit_depth;

    QuantizerConfig(double v_ref_in, int bit_depth_in)
        : v_ref(v_ref_in), bit_depth(bit_depth_in) {
        if (v_ref <= 0.0) throw InvalidConfigError("QuantizerConfig: v_ref must be positive");
        if (bit_depth < 2 || bit_depth > 16)
            throw InvalidConfigError("QuantizerConfig: bit depth must be in [2, 16]");
    }

    std::uint32_t levels() const { return std::uint32_t{1} << bit_depth; }
    double delta() const { return cell_width(v_ref, bit_depth); }
};

// Maps samples to level indices. Cells are half-open [edge, edge + delta),
// the top cell also contains its upper edge; inputs beyond +-v_ref saturate
// to the extreme levels.
inline std::vector<std::uint32_t> quantize(const Eigen::VectorXd& v, const QuantizerConfig& cfg) {
    const double delta = cfg.delta();
    const double top = static_cast<double>(cfg.levels()) - 1.0;
    std::vector<std::uint32_t> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double k = std::floor((v[i] + cfg.v_ref) / delta);
        if (k < 0.0) k = 0.0;
        if (k > top) k = top;
        out[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(k);
    }
    return out;
}

// Mid-point reconstruction of level indices.
inline Eigen::VectorXd dequantize(const std::vector<std::uint32_t>& levels,
                                  const QuantizerConfig& cfg) {
    const double delta = cfg.delta();
    Eigen::VectorXd out(static_cast<Eigen::Index>(levels.size()));
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] >= cfg.levels())
            throw CorruptPayloadError("dequantize: level index out of range");
        out[static_cast<Eigen::Index>(i)] = -cfg.v_ref + delta * (levels[i] + 0.5);
    }
    return out;
}

// Variance of the rounding error of a non-saturating uniform quantizer.
inline double error_variance(double delta) {
    if (delta <= 0.0) throw InvalidConfigError("error_variance: delta must be positive");
    return delta * delta / 12.0;
}

// Packs B-bit level indices LSB-first into bytes.
inline std::vector<std::uint8_t> pack_bits(const std::vector<std::uint32_t>& levels, int bits) {
    if (bits < 1 || bits > 16) throw InvalidConfigError("pack_bits: bit depth must be in [1, 16]");
    const std::uint32_t max_level = (std::uint32_t{1} << bits) - 1;
    std::vector<std::uint8_t> out((levels.size() * bits + 7) / 8, 0);
    std::size_t bitpos = 0;
    for (std::uint32_t lv : levels) {
        if (lv > max_level) throw InvalidConfigError("pack_bits: level does not fit in bit depth");
        for (int b = 0; b < bits; ++b, ++bitpos) {
            if ((lv >> b) & 1u) out[bitpos / 8] |= static_cast<std::uint8_t>(1u << (bitpos % 8));
        }
    }
    return out;
}

// Inverse of pack_bits for a known count of levels.
inline std::vector<std::uint32_t> unpack_bits(const std::vector<std::uint8_t>& bytes,
                                              std::size_t count, int bits) {
    if (bits < 1 || bits > 16) throw InvalidConfigError("unpack_bits: bit depth must be in [1, 16]");
    if (bytes.size() < (count * bits + 7) / 8)
        throw CorruptPayloadError("unpack_bits: byte stream shorter than count*bits");
    std::vector<std::uint32_t> out(count, 0);
    std::size_t bitpos = 0;
    for (std::size_t i = 0; i < count; ++i) {
        for (int b = 0; b < bits; ++b, ++bitpos) {
            if ((bytes[bitpos / 8] >> (bitpos % 8)) & 1u) out[i] |= (std::uint32_t{1} << b);
        }
    }
    return out;
}

}  // namespace qcs
