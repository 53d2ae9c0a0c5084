// SPDX-License-Identifier: Apache-2.0
#include "ecc/channel/channel.hpp"

#include <cmath>
#include <numbers>

namespace ecc::channel {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) { return splitmix64(splitmix64(seed) ^ index); }

double distance(const Vec3& a, const Vec3& b)
{
    return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

Vec3 sample_ue_position(const Box& region, Rng& rng)
{
    auto draw = [&rng](double lo, double hi) {
        if (lo == hi) return lo;
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    const double x = draw(region.x_min, region.x_max);
    const double y = draw(region.y_min, region.y_max);
    const double z = draw(region.z_min, region.z_max);
    return {x, y, z};
}

std::pair<double, double> local_angles(const BsSite& site, const Vec3& target)
{
    const double vx = target[0] - site.position[0];
    const double vy = target[1] - site.position[1];
    const double vz = target[2] - site.position[2];
    const double ca = std::cos(site.azimuth), sa = std::sin(site.azimuth);
    const double x1 = ca * vx + sa * vy;
    const double y1 = -sa * vx + ca * vy;
    const double ct = std::cos(site.tilt), st = std::sin(site.tilt);
    const double x2 = x1 * ct - vz * st;
    const double z2 = x1 * st + vz * ct;
    return {std::atan2(y1, x2), std::atan2(z2, std::hypot(x2, y1))};
}

PathSet synth_paths(const ScenarioConfig& cfg, const Vec3& ue, const BsSite& site, Rng& rng)
{
    const auto count = std::uniform_int_distribution<std::size_t>(cfg.paths_min, cfg.paths_max)(rng);
    const bool blocked = std::bernoulli_distribution(cfg.blockage_probability)(rng);
    PathSet paths;
    paths.reserve(count);

    const double direct = distance(ue, site.position);
    const auto [az, el] = local_angles(site, ue);
    const double direct_amp = cfg.reference_distance / std::max(direct, 1.0) * (blocked ? cfg.blocked_gain : 1.0);
    paths.push_back({cdouble(direct_amp, 0.0), az, el, direct / kSpeedOfLight});

    std::uniform_real_distribution<double> reflection(cfg.reflection_min, cfg.reflection_max);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (std::size_t k = 1; k < count; ++k) {
        const Vec3 scatterer = sample_ue_position(cfg.region, rng);
        const double length = distance(ue, scatterer) + distance(scatterer, site.position);
        const auto [saz, sel] = local_angles(site, scatterer);
        const double amp = reflection(rng) * cfg.reference_distance / std::max(length, 1.0);
        paths.push_back({std::polar(amp, phase(rng)), saz, sel, length / kSpeedOfLight});
    }
    return paths;
}

std::vector<cdouble> array_response(double azimuth, double elevation, const ArrayGeometry& geometry)
{
    const double uy = std::cos(elevation) * std::sin(azimuth);
    const double uz = std::sin(elevation);
    const double k = 2.0 * std::numbers::pi / geometry.wavelength;
    std::vector<cdouble> a(geometry.size());
    for (std::size_t r = 0; r < geometry.rows; ++r)
        for (std::size_t c = 0; c < geometry.cols; ++c) {
            const double proj = static_cast<double>(c) * geometry.spacing * uy + static_cast<double>(r) * geometry.spacing * uz;
            a[r * geometry.cols + c] = std::polar(1.0, k * proj);
        }
    return a;
}

std::vector<cdouble> channel_freq_response(const PathSet& paths, double frequency, const ArrayGeometry& geometry)
{
    std::vector<cdouble> h(geometry.size());
    for (const auto& p : paths) {
        const auto a = array_response(p.azimuth, p.elevation, geometry);
        const cdouble w = p.gain * std::polar(1.0, -2.0 * std::numbers::pi * frequency * p.delay);
        for (std::size_t m = 0; m < h.size(); ++m) h[m] += w * a[m];
    }
    return h;
}

CsiTensor channel_tensor(const ScenarioConfig& cfg, const PathSet& paths, const ArrayGeometry& geometry)
{
    CsiTensor H(cfg.slots, geometry.size(), cfg.subcarriers);
    for (std::size_t n = 0; n < cfg.subcarriers; ++n) {
        const auto h = channel_freq_response(paths, cfg.subcarrier_frequency(n), geometry);
        for (std::size_t t = 0; t < cfg.slots; ++t)
            for (std::size_t m = 0; m < h.size(); ++m) H(t, m, n) = h[m];
    }
    return H;
}

std::vector<cdouble> default_pilots(const ScenarioConfig& cfg) { return std::vector<cdouble>(cfg.subcarriers, 1.0); }

CsiTensor observe_pilots(const CsiTensor& channel, const std::vector<cdouble>& pilots, double noise_variance, Rng& rng)
{
    if (pilots.size() != channel.subcarriers()) throw std::invalid_argument("observe_pilots: pilot count differs from N_sc");
    for (const auto& x : pilots)
        if (std::abs(x) == 0.0) throw std::invalid_argument("observe_pilots: pilot with zero modulus");
    CsiTensor Y(channel.slots(), channel.antennas(), channel.subcarriers());
    std::normal_distribution<double> noise(0.0, std::sqrt(noise_variance / 2.0));
    for (std::size_t t = 0; t < channel.slots(); ++t)
        for (std::size_t m = 0; m < channel.antennas(); ++m)
            for (std::size_t n = 0; n < channel.subcarriers(); ++n) {
                cdouble y = pilots[n] * channel(t, m, n);
                if (noise_variance > 0.0) {
                    const double re = noise(rng);
                    const double im = noise(rng);
                    y += cdouble(re, im);
                }
                Y(t, m, n) = y;
            }
    return Y;
}

Snapshot make_snapshot_at(const ScenarioConfig& cfg, const std::vector<BsSite>& sites, const Vec3& ue,
                          std::uint64_t sample_seed)
{
    Rng rng(sample_seed);
    Snapshot snap;
    snap.position = ue;
    const auto pilots = default_pilots(cfg);
    for (const auto& site : sites) {
        snap.paths.push_back(synth_paths(cfg, ue, site, rng));
        snap.channels.push_back(channel_tensor(cfg, snap.paths.back(), site.array));
        snap.observations.push_back(observe_pilots(snap.channels.back(), pilots, cfg.noise_variance, rng));
    }
    return snap;
}

Snapshot make_snapshot(const ScenarioConfig& cfg, const std::vector<BsSite>& sites, std::uint64_t sample_seed)
{
    Rng rng(sample_seed);
    const Vec3 ue = sample_ue_position(cfg.region, rng);
    return make_snapshot_at(cfg, sites, ue, splitmix64(sample_seed));
}

} // namespace ecc::channel
