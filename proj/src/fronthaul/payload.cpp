// SPDX-License-Identifier: Apache-2.0
#include "ecc/fronthaul/payload.hpp"

#include <stdexcept>

namespace ecc::fronthaul {

std::uint64_t lossless_csi_bits(const CsiDims& dims)
{
    if (dims.slots == 0 || dims.antennas == 0 || dims.subcarriers == 0)
        throw std::invalid_argument("payload: CSI dimensions must be positive");
    return 64 * dims.slots * dims.antennas * dims.subcarriers;
}

std::uint64_t embedding_bits(std::uint64_t latent_length, int bits)
{
    if (latent_length == 0 || bits <= 0) throw std::invalid_argument("payload: D and Q must be positive");
    return latent_length * static_cast<std::uint64_t>(bits);
}

double payload_ratio(std::uint64_t latent_length, int bits, const CsiDims& dims, std::uint64_t gain_bits,
                     bool include_gain)
{
    const std::uint64_t numerator = embedding_bits(latent_length, bits) + (include_gain ? gain_bits : 0);
    return static_cast<double>(numerator) / static_cast<double>(lossless_csi_bits(dims));
}

} // namespace ecc::fronthaul
