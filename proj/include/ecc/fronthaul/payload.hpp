// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace ecc::fronthaul {

struct CsiDims {
    std::uint64_t slots;       // T
    std::uint64_t antennas;    // N_r
    std::uint64_t subcarriers; // N_sc
};

// Lossless forwarding cost: one complex64 per CSI entry.
std::uint64_t lossless_csi_bits(const CsiDims& dims);
std::uint64_t embedding_bits(std::uint64_t latent_length, int bits);

// eta = D Q / (64 T N_r N_sc); with include_gain, (D Q + B_g) / (64 T N_r N_sc).
double payload_ratio(std::uint64_t latent_length, int bits, const CsiDims& dims, std::uint64_t gain_bits,
                     bool include_gain);

inline constexpr std::uint64_t kGainFieldBits = 32;

} // namespace ecc::fronthaul
