// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecc/fronthaul/quantizer.hpp"

namespace ecc::fronthaul {

class MessageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class MalformedHeader : public MessageError {
public:
    using MessageError::MessageError;
};
class PayloadLengthMismatch : public MessageError {
public:
    using MessageError::MessageError;
};

// Packs Q-bit fields MSB-first, in index order, into ceil(D Q / 8) bytes.
// Trailing pad bits are zero.
std::vector<std::uint8_t> pack(std::span<const std::uint32_t> indices, int bits);
std::vector<std::uint32_t> unpack(std::span<const std::uint8_t> payload, std::size_t count, int bits);

inline std::size_t payload_bytes(std::size_t count, int bits)
{
    return (count * static_cast<std::size_t>(bits) + 7) / 8;
}

// One BS -> CU transfer: D quantized latent coefficients and the gain field.
struct FronthaulMessage {
    std::uint16_t bs_id = 0;
    std::uint64_t snapshot_id = 0;
    std::uint8_t bits = 0;
    std::uint32_t length = 0; // D
    float gain = 0.0f;
    std::vector<std::uint8_t> payload;

    std::size_t payload_bits() const { return static_cast<std::size_t>(length) * bits; }
    friend bool operator==(const FronthaulMessage&, const FronthaulMessage&) = default;
};

struct DecodedMessage {
    std::uint16_t bs_id = 0;
    std::uint64_t snapshot_id = 0;
    std::vector<double> latent; // dequantized z-hat
    double gain = 0.0;          // g-hat after the f32 round trip
};

FronthaulMessage encode_message(std::span<const double> latent, double gain, const QuantizerConfig& cfg,
                                std::uint16_t bs_id, std::uint64_t snapshot_id);
DecodedMessage decode_message(const FronthaulMessage& msg, const QuantizerConfig& cfg);

// Wire format, little-endian header then payload:
//   "ECCFH1" | bs_id u16 | snapshot_id u64 | Q u8 | D u32 | gain f32 | payload
std::vector<std::uint8_t> serialize(const FronthaulMessage& msg);
FronthaulMessage deserialize(std::span<const std::uint8_t> bytes);

inline constexpr std::size_t kWireHeaderBytes = 6 + 2 + 8 + 1 + 4 + 4;

} // namespace ecc::fronthaul
