// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ecc/channel/scenario.hpp"
#include "ecc/csi_tensor.hpp"

namespace ecc::channel {

using Rng = std::mt19937_64;

// splitmix64 finalizer; derives independent per-sample seeds.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

struct PathComponent {
    cdouble gain;     // alpha
    double azimuth;   // local to the BS array, rad
    double elevation; // local to the BS array, rad
    double delay;     // s
};

using PathSet = std::vector<PathComponent>;

Vec3 sample_ue_position(const Box& region, Rng& rng);

// Local (azimuth, elevation) of the direction from the BS towards `target`.
std::pair<double, double> local_angles(const BsSite& site, const Vec3& target);

// Direct path first (delay |p - s| / c), then single-bounce scatterer paths.
PathSet synth_paths(const ScenarioConfig& cfg, const Vec3& ue, const BsSite& site, Rng& rng);

// Unit-modulus steering vector, phase 2 pi / lambda * (element position . direction).
std::vector<cdouble> array_response(double azimuth, double elevation, const ArrayGeometry& geometry);

// h(f) = sum_k alpha_k a(theta_k, phi_k) exp(-j 2 pi f tau_k)
std::vector<cdouble> channel_freq_response(const PathSet& paths, double frequency, const ArrayGeometry& geometry);

// Ground-truth CSI over T slots (held fixed across slots) and all retained subcarriers.
CsiTensor channel_tensor(const ScenarioConfig& cfg, const PathSet& paths, const ArrayGeometry& geometry);

// Pilot symbols x_n; constant modulus, all ones.
std::vector<cdouble> default_pilots(const ScenarioConfig& cfg);

// y[t,m,n] = x_n h[t,m,n] + w, w ~ CN(0, noise_variance).
CsiTensor observe_pilots(const CsiTensor& channel, const std::vector<cdouble>& pilots, double noise_variance, Rng& rng);

struct Snapshot {
    Vec3 position{};
    std::vector<PathSet> paths;           // per BS
    std::vector<CsiTensor> channels;      // H, per BS
    std::vector<CsiTensor> observations;  // Y, per BS
};

// Snapshot at a drawn UE position, or at `ue` when given.
Snapshot make_snapshot(const ScenarioConfig& cfg, const std::vector<BsSite>& sites, std::uint64_t sample_seed);
Snapshot make_snapshot_at(const ScenarioConfig& cfg, const std::vector<BsSite>& sites, const Vec3& ue,
                          std::uint64_t sample_seed);

double distance(const Vec3& a, const Vec3& b);

} // namespace ecc::channel
