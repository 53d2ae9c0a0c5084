// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace ecc::fronthaul {

// Midrise uniform scalar quantizer with Q bits and step size Delta. The
// 2^Q reconstruction levels are the odd multiples of Delta/2 inside
// [-A, A], A = (2^Q - 1) Delta / 2. Inputs beyond +-A saturate.
class QuantizerConfig {
public:
    static constexpr int kMaxBits = 32;

    QuantizerConfig(int bits, double step);

    int bits() const { return bits_; }
    double step() const { return step_; }
    double clip_amplitude() const { return clip_; }
    std::uint64_t level_count() const { return std::uint64_t{1} << bits_; }

    friend bool operator==(const QuantizerConfig&, const QuantizerConfig&) = default;

private:
    int bits_;
    double step_;
    double clip_;
};

// Signed cell index j with y in [j Delta, (j+1) Delta), clamped to the
// 2^Q cells; the level is (j + 1/2) Delta. Throws on non-finite input.
double quantize(double y, const QuantizerConfig& cfg);

// Level <-> transmitted index k in [0, 2^Q - 1]; k = round(level/Delta - 1/2) + 2^(Q-1).
std::uint32_t level_index(double level, const QuantizerConfig& cfg);
double index_level(std::uint32_t index, const QuantizerConfig& cfg);

// Direct value -> index path used by the encoder.
std::uint32_t quantize_index(double y, const QuantizerConfig& cfg);

// Delta = 2 q_p / (2^Q - 1), q_p the nearest-rank `percentile` of |samples|,
// so that the covered fraction of samples lies inside +-A.
double calibrate_step(std::span<const double> samples, int bits, double percentile);

} // namespace ecc::fronthaul
