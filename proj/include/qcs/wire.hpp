#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <vector>

#include "qcs/errors.hpp"
#include "qcs/quantizer.hpp"

namespace qcs {

// Per-segment payload header carried next to the packed measurement levels.
// (M, N, matrix_seed) reconstruct the sensing matrix on the receiver.
struct PayloadHeader {
    std::uint32_t n = 0;
    std::uint32_t m = 0;
    std::uint8_t bits = 0;
    std::uint8_t input_bits = 0;
    double v_ref = 0.0;
    std::uint64_t matrix_seed = 0;
    std::uint32_t segment_index = 0;

    bool operator==(const PayloadHeader&) const = default;
};

struct QuantizedPayload {
    PayloadHeader header;
    std::vector<std::uint32_t> levels;

    bool operator==(const QuantizedPayload&) const = default;
};

namespace detail {

inline void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
}

template <typename T>
T get_le(const std::vector<std::uint8_t>& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw CorruptPayloadError("payload: truncated header");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace detail

inline constexpr std::array<char, 4> kPayloadMagic = {'Q', 'C', 'S', '1'};
inline constexpr std::uint8_t kPayloadVersion = 1;

// Serializes header and packed body. All header integers and the v_ref double
// are little-endian; the body is ceil(M*B/8) bytes of LSB-first packed levels.
inline std::vector<std::uint8_t> serialize_payload(const QuantizedPayload& p) {
    if (p.levels.size() != p.header.m)
        throw InvalidConfigError("serialize_payload: level count does not match header M");
    std::vector<std::uint8_t> out;
    out.reserve(35 + (p.header.m * p.header.bits + 7) / 8);
    detail::put_bytes(out, kPayloadMagic.data(), 4);
    out.push_back(kPayloadVersion);
    detail::put_bytes(out, &p.header.n, 4);
    detail::put_bytes(out, &p.header.m, 4);
    out.push_back(p.header.bits);
    out.push_back(p.header.input_bits);
    detail::put_bytes(out, &p.header.v_ref, 8);
    detail::put_bytes(out, &p.header.matrix_seed, 8);
    detail::put_bytes(out, &p.header.segment_index, 4);
    const std::vector<std::uint8_t> body = pack_bits(p.levels, p.header.bits);
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

inline QuantizedPayload parse_payload(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    if (bytes.size() < 5 || std::memcmp(bytes.data(), kPayloadMagic.data(), 4) != 0)
        throw CorruptPayloadError("payload: bad magic");
    pos = 4;
    const auto version = detail::get_le<std::uint8_t>(bytes, pos);
    if (version != kPayloadVersion) throw CorruptPayloadError("payload: unsupported version");
    QuantizedPayload p;
    p.header.n = detail::get_le<std::uint32_t>(bytes, pos);
    p.header.m = detail::get_le<std::uint32_t>(bytes, pos);
    p.header.bits = detail::get_le<std::uint8_t>(bytes, pos);
    p.header.input_bits = detail::get_le<std::uint8_t>(bytes, pos);
    p.header.v_ref = detail::get_le<double>(bytes, pos);
    p.header.matrix_seed = detail::get_le<std::uint64_t>(bytes, pos);
    p.header.segment_index = detail::get_le<std::uint32_t>(bytes, pos);
    if (p.header.bits < 1 || p.header.bits > 16)
        throw CorruptPayloadError("payload: bit depth out of range");
    const std::size_t body_size = (static_cast<std::size_t>(p.header.m) * p.header.bits + 7) / 8;
    if (bytes.size() - pos < body_size) throw CorruptPayloadError("payload: truncated body");
    const std::vector<std::uint8_t> body(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + body_size));
    p.levels = unpack_bits(body, p.header.m, p.header.bits);
    return p;
}

}  // namespace qcs
