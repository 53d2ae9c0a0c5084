// SPDX-License-Identifier: Apache-2.0
#include "ecc/fronthaul/message.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace ecc::fronthaul {

namespace {

constexpr char kMagic[] = {'E', 'C', 'C', 'F', 'H', '1'};

template <typename T>
void put(std::vector<std::uint8_t>& out, T value)
{
    std::uint8_t bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
    out.insert(out.end(), std::begin(bytes), std::end(bytes));
}

template <typename T>
T take(std::span<const std::uint8_t> bytes, std::size_t& at)
{
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes.data() + at, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(raw), std::end(raw));
    at += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
}

} // namespace

std::vector<std::uint8_t> pack(std::span<const std::uint32_t> indices, int bits)
{
    if (bits < 1 || bits > QuantizerConfig::kMaxBits) throw std::invalid_argument("pack: bits must be in [1, 32]");
    std::vector<std::uint8_t> out(payload_bytes(indices.size(), bits), 0);
    const std::uint64_t limit = std::uint64_t{1} << bits;
    std::size_t bit_pos = 0;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= limit)
            throw std::out_of_range("pack: index " + std::to_string(indices[i]) + " at position " + std::to_string(i) +
                                    " overflows " + std::to_string(bits) + " bits");
        for (int b = bits - 1; b >= 0; --b, ++bit_pos)
            if ((indices[i] >> b) & 1u) out[bit_pos / 8] |= static_cast<std::uint8_t>(0x80u >> (bit_pos % 8));
    }
    return out;
}

std::vector<std::uint32_t> unpack(std::span<const std::uint8_t> payload, std::size_t count, int bits)
{
    if (bits < 1 || bits > QuantizerConfig::kMaxBits) throw std::invalid_argument("unpack: bits must be in [1, 32]");
    if (payload.size() != payload_bytes(count, bits))
        throw PayloadLengthMismatch("unpack: payload has " + std::to_string(payload.size()) + " bytes, expected " +
                                    std::to_string(payload_bytes(count, bits)));
    std::vector<std::uint32_t> out(count, 0);
    std::size_t bit_pos = 0;
    for (auto& v : out)
        for (int b = 0; b < bits; ++b, ++bit_pos)
            v = (v << 1) | ((payload[bit_pos / 8] >> (7 - bit_pos % 8)) & 1u);
    for (; bit_pos < payload.size() * 8; ++bit_pos)
        if ((payload[bit_pos / 8] >> (7 - bit_pos % 8)) & 1u) throw MessageError("unpack: nonzero pad bits");
    return out;
}

FronthaulMessage encode_message(std::span<const double> latent, double gain, const QuantizerConfig& cfg,
                                std::uint16_t bs_id, std::uint64_t snapshot_id)
{
    std::vector<std::uint32_t> indices(latent.size());
    for (std::size_t i = 0; i < latent.size(); ++i) indices[i] = quantize_index(latent[i], cfg);
    FronthaulMessage msg;
    msg.bs_id = bs_id;
    msg.snapshot_id = snapshot_id;
    msg.bits = static_cast<std::uint8_t>(cfg.bits());
    msg.length = static_cast<std::uint32_t>(latent.size());
    msg.gain = static_cast<float>(gain);
    msg.payload = pack(indices, cfg.bits());
    return msg;
}

DecodedMessage decode_message(const FronthaulMessage& msg, const QuantizerConfig& cfg)
{
    if (msg.bits != cfg.bits())
        throw MalformedHeader("decode: message carries Q=" + std::to_string(msg.bits) + " but the decoder expects Q=" +
                              std::to_string(cfg.bits()));
    const auto indices = unpack(msg.payload, msg.length, msg.bits);
    DecodedMessage out{msg.bs_id, msg.snapshot_id, std::vector<double>(indices.size()), static_cast<double>(msg.gain)};
    for (std::size_t i = 0; i < indices.size(); ++i) out.latent[i] = index_level(indices[i], cfg);
    return out;
}

std::vector<std::uint8_t> serialize(const FronthaulMessage& msg)
{
    if (msg.payload.size() != payload_bytes(msg.length, msg.bits))
        throw PayloadLengthMismatch("serialize: payload size does not match D and Q");
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put(out, msg.bs_id);
    put(out, msg.snapshot_id);
    put(out, msg.bits);
    put(out, msg.length);
    put(out, msg.gain);
    out.insert(out.end(), msg.payload.begin(), msg.payload.end());
    return out;
}

FronthaulMessage deserialize(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kWireHeaderBytes) throw MalformedHeader("deserialize: message shorter than the header");
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) throw MalformedHeader("deserialize: bad magic");
    std::size_t at = sizeof(kMagic);
    FronthaulMessage msg;
    msg.bs_id = take<std::uint16_t>(bytes, at);
    msg.snapshot_id = take<std::uint64_t>(bytes, at);
    msg.bits = take<std::uint8_t>(bytes, at);
    msg.length = take<std::uint32_t>(bytes, at);
    msg.gain = take<float>(bytes, at);
    if (msg.bits < 1 || msg.bits > QuantizerConfig::kMaxBits)
        throw MalformedHeader("deserialize: invalid Q=" + std::to_string(msg.bits));
    const std::size_t expected = payload_bytes(msg.length, msg.bits);
    if (bytes.size() - at != expected)
        throw PayloadLengthMismatch("deserialize: payload has " + std::to_string(bytes.size() - at) +
                                    " bytes, header implies " + std::to_string(expected));
    msg.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(at), bytes.end());
    return msg;
}

} // namespace ecc::fronthaul
