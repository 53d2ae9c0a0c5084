// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace ecc::channel {

inline constexpr double kSpeedOfLight = 299792458.0;

using Vec3 = std::array<double, 3>;

struct Box {
    double x_min = 0.0, x_max = 60.0;
    double y_min = 0.0, y_max = 60.0;
    double z_min = 0.0, z_max = 10.0;

    Vec3 center() const { return {(x_min + x_max) / 2, (y_min + y_max) / 2, (z_min + z_max) / 2}; }
    Vec3 half_extent() const { return {(x_max - x_min) / 2, (y_max - y_min) / 2, (z_max - z_min) / 2}; }
    double diagonal() const;
    bool contains(const Vec3& p) const;
};

// Uniform planar array in the local y-z plane, boresight along local +x.
// Element m = row * cols + col sits at (0, col * d, row * d); element 0 is
// the phase reference.
struct ArrayGeometry {
    std::size_t rows = 1;
    std::size_t cols = 2;
    double spacing = 0.0; // meters
    double wavelength = 0.0;

    std::size_t size() const { return rows * cols; }
};

struct BsSite {
    Vec3 position{};
    double azimuth = 0.0; // boresight heading in the x-y plane, rad
    double tilt = 0.0;    // downtilt, rad
    ArrayGeometry array;
};

struct ScenarioConfig {
    std::size_t num_bs = 3;      // L
    std::size_t slots = 2;       // T
    std::size_t array_rows = 1;
    std::size_t array_cols = 2;  // N_r = rows * cols
    std::size_t subcarriers = 8; // N_sc, retained subcarriers
    double subcarrier_spacing_hz = 720e3; // effective spacing of retained subcarriers
    double first_subcarrier_hz = 3.5e9;   // f0
    double carrier_hz = 3.5e9;
    double antenna_spacing = 0.5; // in carrier wavelengths
    Box region;
    double bs_height = 20.0;
    double bs_ring_factor = 1.1; // BS ring radius relative to the half xy diagonal
    std::vector<Vec3> bs_positions; // overrides the ring placement when non-empty
    double noise_variance = 1e-3;
    std::size_t paths_min = 3;
    std::size_t paths_max = 6;
    double blockage_probability = 0.5;
    double blocked_gain = 1e-3;       // residual amplitude factor of a blocked direct path
    double reference_distance = 10.0; // path amplitude = reflection * reference_distance / length
    double reflection_min = 0.2;
    double reflection_max = 0.6;
    std::uint64_t seed = 1;

    std::size_t antennas() const { return array_rows * array_cols; }
    double wavelength() const { return kSpeedOfLight / carrier_hz; }
    double subcarrier_frequency(std::size_t n) const
    {
        return first_subcarrier_hz + static_cast<double>(n) * subcarrier_spacing_hz;
    }
    ArrayGeometry geometry() const;
    void validate() const;

    // Desk-scale reference scenario.
    static ScenarioConfig desk();
    // Dimensions of the full-scale setup: L=6, T=10, 2x4 UPA, N_sc=24, 12 x 60 kHz spacing.
    static ScenarioConfig full_scale();
};

// BSs placed on a ring around the region, boresight toward the region
// center, unless explicit positions are configured.
std::vector<BsSite> make_sites(const ScenarioConfig& cfg);

} // namespace ecc::channel
