// SPDX-License-Identifier: Apache-2.0
#include "ecc/fronthaul/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace ecc::fronthaul {

QuantizerConfig::QuantizerConfig(int bits, double step) : bits_(bits), step_(step)
{
    if (bits < 1 || bits > kMaxBits) throw std::invalid_argument("quantizer: bits must be in [1, 32], got " + std::to_string(bits));
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("quantizer: step must be positive and finite");
    clip_ = (std::ldexp(1.0, bits) - 1.0) * step / 2.0;
}

namespace {

// Signed cell index in [-2^(Q-1), 2^(Q-1) - 1].
std::int64_t cell_of(double y, const QuantizerConfig& cfg)
{
    if (!std::isfinite(y)) throw std::domain_error("quantizer: non-finite input");
    const auto half = static_cast<std::int64_t>(cfg.level_count() / 2);
    const double cell = std::floor(y / cfg.step());
    if (cell < static_cast<double>(-half)) return -half;
    if (cell > static_cast<double>(half - 1)) return half - 1;
    return static_cast<std::int64_t>(cell);
}

double level_of(std::int64_t cell, const QuantizerConfig& cfg)
{
    return (static_cast<double>(cell) + 0.5) * cfg.step();
}

} // namespace

double quantize(double y, const QuantizerConfig& cfg) { return level_of(cell_of(y, cfg), cfg); }

std::uint32_t quantize_index(double y, const QuantizerConfig& cfg)
{
    return static_cast<std::uint32_t>(cell_of(y, cfg) + static_cast<std::int64_t>(cfg.level_count() / 2));
}

double index_level(std::uint32_t index, const QuantizerConfig& cfg)
{
    if (index >= cfg.level_count())
        throw std::out_of_range("quantizer: index " + std::to_string(index) + " exceeds " + std::to_string(cfg.bits()) + " bits");
    return level_of(static_cast<std::int64_t>(index) - static_cast<std::int64_t>(cfg.level_count() / 2), cfg);
}

std::uint32_t level_index(double level, const QuantizerConfig& cfg)
{
    if (!std::isfinite(level)) throw std::domain_error("quantizer: non-finite level");
    const double k = std::round(level / cfg.step() - 0.5) + static_cast<double>(cfg.level_count() / 2);
    if (k < 0.0 || k >= static_cast<double>(cfg.level_count()))
        throw std::invalid_argument("quantizer: value " + std::to_string(level) + " is outside the level range");
    const auto index = static_cast<std::uint32_t>(k);
    if (std::abs(index_level(index, cfg) - level) > 1e-9 * cfg.step())
        throw std::invalid_argument("quantizer: value " + std::to_string(level) + " is not a reconstruction level");
    return index;
}

double calibrate_step(std::span<const double> samples, int bits, double percentile)
{
    if (samples.empty()) throw std::invalid_argument("calibrate_step: no samples");
    if (!(percentile > 0.0 && percentile <= 100.0)) throw std::invalid_argument("calibrate_step: percentile must be in (0, 100]");
    if (bits < 1 || bits > QuantizerConfig::kMaxBits) throw std::invalid_argument("calibrate_step: bad bit count");
    std::vector<double> mags(samples.size());
    std::transform(samples.begin(), samples.end(), mags.begin(), [](double v) { return std::abs(v); });
    std::sort(mags.begin(), mags.end());
    const auto n = static_cast<double>(mags.size());
    const auto rank = static_cast<std::size_t>(std::max(1.0, std::ceil(percentile / 100.0 * n)));
    const double q = mags[std::min(rank, mags.size()) - 1];
    if (!(q > 0.0)) throw std::domain_error("calibrate_step: degenerate latent (percentile magnitude is zero)");
    const double levels = std::ldexp(1.0, bits) - 1.0;
    double step = 2.0 * q / levels;
    // Rounding may leave A one ulp below q; the covered samples must stay inside.
    while (levels * step / 2.0 < q) step = std::nextafter(step, INFINITY);
    return step;
}

} // namespace ecc::fronthaul
