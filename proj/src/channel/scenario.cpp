// SPDX-License-Identifier: Apache-2.0
#include "ecc/channel/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ecc::channel {

double Box::diagonal() const
{
    return std::sqrt((x_max - x_min) * (x_max - x_min) + (y_max - y_min) * (y_max - y_min) +
                     (z_max - z_min) * (z_max - z_min));
}

bool Box::contains(const Vec3& p) const
{
    return p[0] >= x_min && p[0] <= x_max && p[1] >= y_min && p[1] <= y_max && p[2] >= z_min && p[2] <= z_max;
}

ArrayGeometry ScenarioConfig::geometry() const
{
    return ArrayGeometry{array_rows, array_cols, antenna_spacing * wavelength(), wavelength()};
}

void ScenarioConfig::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("scenario: " + what); };
    if (num_bs < 1) fail("num_bs must be >= 1");
    if (slots < 1) fail("slots must be >= 1");
    if (antennas() < 1) fail("array must have at least one element");
    if (subcarriers < 1) fail("subcarriers must be >= 1");
    if (!(noise_variance >= 0.0)) fail("noise_variance must be >= 0");
    if (!(region.x_min <= region.x_max && region.y_min <= region.y_max && region.z_min <= region.z_max))
        fail("region bounds are empty");
    if (!(carrier_hz > 0.0) || !(first_subcarrier_hz > 0.0) || !(subcarrier_spacing_hz >= 0.0))
        fail("frequencies must be positive");
    if (paths_min < 1 || paths_max < paths_min) fail("paths range must satisfy 1 <= min <= max");
    if (!(blockage_probability >= 0.0 && blockage_probability <= 1.0)) fail("blockage_probability outside [0, 1]");
    if (!bs_positions.empty() && bs_positions.size() != num_bs) fail("bs_positions count differs from num_bs");
    for (std::size_t i = 0; i < bs_positions.size(); ++i)
        for (std::size_t j = i + 1; j < bs_positions.size(); ++j)
            if (bs_positions[i] == bs_positions[j]) fail("BS positions must be distinct");
}

ScenarioConfig ScenarioConfig::desk() { return ScenarioConfig{}; }

ScenarioConfig ScenarioConfig::full_scale()
{
    ScenarioConfig cfg;
    cfg.num_bs = 6;
    cfg.slots = 10;
    cfg.array_rows = 2;
    cfg.array_cols = 4;
    cfg.subcarriers = 24;
    cfg.subcarrier_spacing_hz = 12 * 60e3;
    cfg.region = Box{0.0, 200.0, 0.0, 200.0, 0.0, 30.0};
    cfg.bs_height = 40.0;
    cfg.paths_max = 11;
    return cfg;
}

std::vector<BsSite> make_sites(const ScenarioConfig& cfg)
{
    cfg.validate();
    const Vec3 c = cfg.region.center();
    const auto half = cfg.region.half_extent();
    const double radius = cfg.bs_ring_factor * std::hypot(half[0], half[1]);
    std::vector<BsSite> sites(cfg.num_bs);
    for (std::size_t l = 0; l < cfg.num_bs; ++l) {
        BsSite& s = sites[l];
        if (cfg.bs_positions.empty()) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(l) / static_cast<double>(cfg.num_bs) +
                             std::numbers::pi / 4.0;
            s.position = {c[0] + radius * std::cos(a), c[1] + radius * std::sin(a), cfg.bs_height};
        } else {
            s.position = cfg.bs_positions[l];
        }
        s.azimuth = std::atan2(c[1] - s.position[1], c[0] - s.position[0]);
        s.tilt = 0.0;
        s.array = cfg.geometry();
    }
    return sites;
}

} // namespace ecc::channel
